//! Core MDP representation, exact occupancy and value computation, and
//! trajectory simulation.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance under which stored distributions (kernel rows, policy rows,
/// the initial distribution) must sum to one.
pub const DIST_TOL: f64 = 1e-12;

/// Tolerance for per-step occupancy normalization.
pub const OCC_TOL: f64 = 1e-9;

/// A dense `H x |S| x |A|` table of 64-bit floats.
///
/// Used for rewards, policies, occupancy measures, and discriminator values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaTable {
    pub horizon: usize,
    pub num_states: usize,
    pub num_actions: usize,
    data: Vec<f64>,
}

impl SaTable {
    pub fn zeros(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        SaTable {
            horizon,
            num_states,
            num_actions,
            data: vec![0.0; horizon * num_states * num_actions],
        }
    }

    pub fn from_fn(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut t = Self::zeros(horizon, num_states, num_actions);
        for h in 0..horizon {
            for s in 0..num_states {
                for a in 0..num_actions {
                    t[(h, s, a)] = f(h, s, a);
                }
            }
        }
        t
    }

    #[inline]
    fn offset(&self, h: usize, s: usize, a: usize) -> usize {
        debug_assert!(h < self.horizon && s < self.num_states && a < self.num_actions);
        (h * self.num_states + s) * self.num_actions + a
    }

    /// The `|S| x |A|` slice for step `h`.
    #[inline]
    pub fn step(&self, h: usize) -> &[f64] {
        let n = self.num_states * self.num_actions;
        &self.data[h * n..(h + 1) * n]
    }

    #[inline]
    pub fn step_mut(&mut self, h: usize) -> &mut [f64] {
        let n = self.num_states * self.num_actions;
        &mut self.data[h * n..(h + 1) * n]
    }

    /// The `|A|` slice for `(h, s)`.
    #[inline]
    pub fn row(&self, h: usize, s: usize) -> &[f64] {
        let off = self.offset(h, s, 0);
        &self.data[off..off + self.num_actions]
    }

    #[inline]
    pub fn row_mut(&mut self, h: usize, s: usize) -> &mut [f64] {
        let off = self.offset(h, s, 0);
        &mut self.data[off..off + self.num_actions]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn same_shape(&self, other: &SaTable) -> bool {
        self.horizon == other.horizon
            && self.num_states == other.num_states
            && self.num_actions == other.num_actions
    }

    /// Total l1 distance to `other`, summed over all steps.
    pub fn l1_distance(&self, other: &SaTable) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| (x - y).abs())
            .sum()
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.horizon)
            .map(|h| {
                (0..self.num_states)
                    .map(|s| self.row(h, s).to_vec())
                    .collect()
            })
            .collect()
    }

    pub fn from_nested(nested: &[Vec<Vec<f64>>]) -> Result<Self> {
        let horizon = nested.len();
        let num_states = nested.first().map_or(0, |s| s.len());
        let num_actions = nested
            .first()
            .and_then(|s| s.first())
            .map_or(0, |a| a.len());
        let mut t = Self::zeros(horizon, num_states, num_actions);
        for (h, per_state) in nested.iter().enumerate() {
            if per_state.len() != num_states {
                return Err(Error::ShapeMismatch("ragged state dimension".into()));
            }
            for (s, per_action) in per_state.iter().enumerate() {
                if per_action.len() != num_actions {
                    return Err(Error::ShapeMismatch("ragged action dimension".into()));
                }
                t.row_mut(h, s).copy_from_slice(per_action);
            }
        }
        Ok(t)
    }
}

impl std::ops::Index<(usize, usize, usize)> for SaTable {
    type Output = f64;
    #[inline]
    fn index(&self, (h, s, a): (usize, usize, usize)) -> &f64 {
        &self.data[self.offset(h, s, a)]
    }
}

impl std::ops::IndexMut<(usize, usize, usize)> for SaTable {
    #[inline]
    fn index_mut(&mut self, (h, s, a): (usize, usize, usize)) -> &mut f64 {
        let off = self.offset(h, s, a);
        &mut self.data[off]
    }
}

/// One step of the transition function in compressed sparse row form:
/// for each `(s, a)` the nonzero `(next_state, probability)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelStep {
    num_states: usize,
    num_actions: usize,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    probs: Vec<f64>,
}

impl KernelStep {
    /// Build from a dense `|S| x |A| x |S|` row-major slice, dropping zeros.
    pub fn from_dense(num_states: usize, num_actions: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != num_states * num_actions * num_states {
            return Err(Error::ShapeMismatch("kernel step has wrong length".into()));
        }
        let mut offsets = Vec::with_capacity(num_states * num_actions + 1);
        let mut targets = Vec::new();
        let mut probs = Vec::new();
        offsets.push(0u32);
        for row in dense.chunks(num_states) {
            let mut sum = 0.0;
            for (s2, &p) in row.iter().enumerate() {
                if p < 0.0 {
                    return Err(Error::InvalidDistribution(format!(
                        "negative transition probability {p}"
                    )));
                }
                if p != 0.0 {
                    targets.push(s2 as u32);
                    probs.push(p);
                }
                sum += p;
            }
            if (sum - 1.0).abs() > DIST_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "transition row sums to {sum}, expected 1"
                )));
            }
            offsets.push(targets.len() as u32);
        }
        Ok(KernelStep {
            num_states,
            num_actions,
            offsets,
            targets,
            probs,
        })
    }

    /// Nonzero `(next_state, prob)` pairs for `(s, a)`.
    #[inline]
    pub fn row(&self, s: usize, a: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let i = s * self.num_actions + a;
        let lo = self.offsets[i] as usize;
        let hi = self.offsets[i + 1] as usize;
        self.targets[lo..hi]
            .iter()
            .zip(&self.probs[lo..hi])
            .map(|(&t, &p)| (t as usize, p))
    }

    /// Probability of `s2` under `(s, a)`.
    pub fn prob(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.row(s, a)
            .find(|&(t, _)| t == s2)
            .map_or(0.0, |(_, p)| p)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.num_states * self.num_actions * self.num_states];
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                let base = (s * self.num_actions + a) * self.num_states;
                for (s2, p) in self.row(s, a) {
                    dense[base + s2] = p;
                }
            }
        }
        dense
    }
}

/// The per-step transition function `P_h`. Most instances in this crate are
/// time-homogeneous, which `Stationary` stores without `H`-fold duplication.
#[derive(Debug, Clone, PartialEq)]
pub enum TransitionKernel {
    Stationary(KernelStep),
    PerStep(Vec<KernelStep>),
}

impl TransitionKernel {
    #[inline]
    pub fn at(&self, h: usize) -> &KernelStep {
        match self {
            TransitionKernel::Stationary(k) => k,
            TransitionKernel::PerStep(v) => &v[h],
        }
    }
}

/// A finite episodic MDP `(S, A, P, r, H, rho)` with per-step kernels and
/// rewards in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMDP {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    pub transition: TransitionKernel,
    pub reward: SaTable,
    pub initial_dist: Vec<f64>,
}

impl TabularMDP {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        transition: TransitionKernel,
        reward: SaTable,
        initial_dist: Vec<f64>,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 || horizon == 0 {
            return Err(Error::InvalidSpec(
                "num_states, num_actions and horizon must be positive".into(),
            ));
        }
        if reward.horizon != horizon
            || reward.num_states != num_states
            || reward.num_actions != num_actions
        {
            return Err(Error::ShapeMismatch("reward table shape".into()));
        }
        if initial_dist.len() != num_states {
            return Err(Error::ShapeMismatch("initial distribution length".into()));
        }
        check_distribution(&initial_dist, "initial distribution")?;
        for &r in reward.as_slice() {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidDistribution(format!(
                    "reward {r} outside [0, 1]"
                )));
            }
        }
        if let TransitionKernel::PerStep(v) = &transition {
            if v.len() != horizon {
                return Err(Error::ShapeMismatch("per-step kernel count".into()));
            }
        }
        let mdp = TabularMDP {
            num_states,
            num_actions,
            horizon,
            transition,
            reward,
            initial_dist,
        };
        for h in 0..mdp.horizon {
            let step = mdp.transition.at(h);
            if step.num_states != num_states || step.num_actions != num_actions {
                return Err(Error::ShapeMismatch("kernel step shape".into()));
            }
        }
        Ok(mdp)
    }

    fn check_policy_shape(&self, policy: &NonStationaryPolicy) -> Result<()> {
        let p = &policy.probs;
        if p.horizon != self.horizon
            || p.num_states != self.num_states
            || p.num_actions != self.num_actions
        {
            return Err(Error::ShapeMismatch(format!(
                "policy is {}x{}x{}, mdp wants {}x{}x{}",
                p.horizon,
                p.num_states,
                p.num_actions,
                self.horizon,
                self.num_states,
                self.num_actions
            )));
        }
        Ok(())
    }
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    let mut sum = 0.0;
    for &x in p {
        if x < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "{what} has negative entry {x}"
            )));
        }
        sum += x;
    }
    if (sum - 1.0).abs() > DIST_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{what} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// `H` stochastic per-step action distributions `pi_h(a | s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonStationaryPolicy {
    pub probs: SaTable,
}

impl NonStationaryPolicy {
    pub fn new(probs: SaTable) -> Result<Self> {
        for h in 0..probs.horizon {
            for s in 0..probs.num_states {
                check_distribution(probs.row(h, s), "policy row")?;
            }
        }
        Ok(NonStationaryPolicy { probs })
    }

    /// The uniform policy.
    pub fn uniform(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        let p = 1.0 / num_actions as f64;
        NonStationaryPolicy {
            probs: SaTable::from_fn(horizon, num_states, num_actions, |_, _, _| p),
        }
    }

    /// The deterministic policy taking `action` in every state at every step.
    pub fn deterministic(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        action: usize,
    ) -> Self {
        NonStationaryPolicy {
            probs: SaTable::from_fn(horizon, num_states, num_actions, |_, _, a| {
                if a == action {
                    1.0
                } else {
                    0.0
                }
            }),
        }
    }

    #[inline]
    pub fn prob(&self, h: usize, s: usize, a: usize) -> f64 {
        self.probs[(h, s, a)]
    }
}

/// State-action distributions `d_h(s, a)`, one simplex per step.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMeasure {
    pub dist: SaTable,
}

impl OccupancyMeasure {
    pub fn new(dist: SaTable) -> Result<Self> {
        let occ = OccupancyMeasure { dist };
        occ.validate()?;
        Ok(occ)
    }

    /// Checks per-step normalization and nonnegativity.
    pub fn validate(&self) -> Result<()> {
        for h in 0..self.dist.horizon {
            let mut sum = 0.0;
            for &x in self.dist.step(h) {
                if x < 0.0 {
                    return Err(Error::InvalidDistribution(format!(
                        "occupancy entry {x} negative at step {h}"
                    )));
                }
                sum += x;
            }
            if (sum - 1.0).abs() > OCC_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "occupancy at step {h} sums to {sum}"
                )));
            }
        }
        Ok(())
    }

    /// State marginal `d_h(s)`.
    pub fn state_marginal(&self, h: usize) -> Vec<f64> {
        (0..self.dist.num_states)
            .map(|s| self.dist.row(h, s).iter().sum())
            .collect()
    }

    /// Total l1 distance to another occupancy, summed over steps.
    pub fn l1_distance(&self, other: &OccupancyMeasure) -> f64 {
        self.dist.l1_distance(&other.dist)
    }
}

/// One episode: `H` (state, action) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trajectory {
    pub steps: Vec<(usize, usize)>,
}

/// Exact occupancy measure of `policy` on `mdp` by the forward flow
/// recursion: `d_1(s, a) = rho(s) pi_1(a|s)` and
/// `d_h(s, a) = [sum_{s', a'} d_{h-1}(s', a') P_{h-1}(s | s', a')] pi_h(a|s)`.
pub fn compute_occupancy(
    mdp: &TabularMDP,
    policy: &NonStationaryPolicy,
) -> Result<OccupancyMeasure> {
    mdp.check_policy_shape(policy)?;
    let (ns, na, h_max) = (mdp.num_states, mdp.num_actions, mdp.horizon);
    let mut dist = SaTable::zeros(h_max, ns, na);
    let mut state_mass = mdp.initial_dist.clone();
    let mut next_mass = vec![0.0; ns];
    for h in 0..h_max {
        {
            let step = dist.step_mut(h);
            for s in 0..ns {
                let m = state_mass[s];
                let pi = policy.probs.row(h, s);
                for a in 0..na {
                    step[s * na + a] = m * pi[a];
                }
            }
        }
        debug_assert!(
            (dist.step(h).iter().sum::<f64>() - 1.0).abs() <= OCC_TOL,
            "occupancy normalization drift at step {h}"
        );
        if h + 1 < h_max {
            let kernel = mdp.transition.at(h);
            next_mass.iter_mut().for_each(|x| *x = 0.0);
            let step = dist.step(h);
            for s in 0..ns {
                for a in 0..na {
                    let d = step[s * na + a];
                    if d == 0.0 {
                        continue;
                    }
                    for (s2, p) in kernel.row(s, a) {
                        next_mass[s2] += d * p;
                    }
                }
            }
            std::mem::swap(&mut state_mass, &mut next_mass);
        }
    }
    Ok(OccupancyMeasure { dist })
}

/// Policy value in the dual form `V(pi) = sum_h sum_{s,a} d_h(s,a) r_h(s,a)`.
pub fn policy_value(mdp: &TabularMDP, policy: &NonStationaryPolicy) -> Result<f64> {
    let occ = compute_occupancy(mdp, policy)?;
    Ok(occupancy_value(&occ, &mdp.reward))
}

/// Value of a policy under a reward table that may differ from the MDP's own.
pub fn policy_value_under(
    mdp: &TabularMDP,
    policy: &NonStationaryPolicy,
    reward: &SaTable,
) -> Result<f64> {
    if !reward.same_shape(&mdp.reward) {
        return Err(Error::ShapeMismatch("reward override shape".into()));
    }
    let occ = compute_occupancy(mdp, policy)?;
    Ok(occupancy_value(&occ, reward))
}

/// `sum_h sum_{s,a} d_h(s,a) r_h(s,a)` for a fixed occupancy.
pub fn occupancy_value(occ: &OccupancyMeasure, reward: &SaTable) -> f64 {
    occ.dist
        .as_slice()
        .iter()
        .zip(reward.as_slice())
        .map(|(d, r)| d * r)
        .sum()
}

/// Finite-horizon value iteration against `reward_override`; returns a
/// deterministic optimal policy. Ties pick the smallest action index.
pub fn best_response(mdp: &TabularMDP, reward_override: &SaTable) -> Result<NonStationaryPolicy> {
    if reward_override.horizon != mdp.horizon
        || reward_override.num_states != mdp.num_states
        || reward_override.num_actions != mdp.num_actions
    {
        return Err(Error::ShapeMismatch("reward override shape".into()));
    }
    let (ns, na, h_max) = (mdp.num_states, mdp.num_actions, mdp.horizon);
    let mut probs = SaTable::zeros(h_max, ns, na);
    let mut value_next = vec![0.0f64; ns];
    let mut value = vec![0.0f64; ns];
    for h in (0..h_max).rev() {
        let kernel = mdp.transition.at(h);
        let r = reward_override.step(h);
        for s in 0..ns {
            let mut best_q = f64::NEG_INFINITY;
            let mut best_a = 0;
            for a in 0..na {
                let mut q = r[s * na + a];
                if h + 1 < h_max {
                    for (s2, p) in kernel.row(s, a) {
                        q += p * value_next[s2];
                    }
                }
                if q > best_q {
                    best_q = q;
                    best_a = a;
                }
            }
            value[s] = best_q;
            probs[(h, s, best_a)] = 1.0;
        }
        std::mem::swap(&mut value, &mut value_next);
    }
    Ok(NonStationaryPolicy { probs })
}

/// Sample an index from a dense distribution using one uniform draw.
pub(crate) fn sample_dense(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

fn sample_kernel(step: &KernelStep, s: usize, a: usize, rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = s;
    for (s2, p) in step.row(s, a) {
        acc += p;
        last = s2;
        if u < acc {
            return s2;
        }
    }
    last
}

/// Roll out `n` independent trajectories of `policy`, reproducible under
/// `rng_seed`.
pub fn rollout(
    mdp: &TabularMDP,
    policy: &NonStationaryPolicy,
    rng_seed: u64,
    n: usize,
) -> Result<Vec<Trajectory>> {
    mdp.check_policy_shape(policy)?;
    let mut rng = StdRng::seed_from_u64(rng_seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut steps = Vec::with_capacity(mdp.horizon);
        let mut s = sample_dense(&mdp.initial_dist, &mut rng);
        for h in 0..mdp.horizon {
            let a = sample_dense(policy.probs.row(h, s), &mut rng);
            steps.push((s, a));
            if h + 1 < mdp.horizon {
                s = sample_kernel(mdp.transition.at(h), s, a, &mut rng);
            }
        }
        out.push(Trajectory { steps });
    }
    Ok(out)
}

/// Mean return of `trajectories` under the MDP's own reward.
pub fn empirical_return(mdp: &TabularMDP, trajectories: &[Trajectory]) -> f64 {
    let mut total = 0.0;
    for tr in trajectories {
        for (h, &(s, a)) in tr.steps.iter().enumerate() {
            total += mdp.reward[(h, s, a)];
        }
    }
    total / trajectories.len() as f64
}

/// Checks flow conservation of an occupancy against the MDP dynamics:
/// for h >= 2, `sum_a d_h(s, a) = sum_{s',a'} d_{h-1}(s', a') P_{h-1}(s|s',a')`
/// per state. Returns the largest violation.
pub fn flow_conservation_gap(mdp: &TabularMDP, occ: &OccupancyMeasure) -> f64 {
    let (ns, na) = (mdp.num_states, mdp.num_actions);
    let mut worst: f64 = 0.0;
    for h in 1..mdp.horizon {
        let kernel = mdp.transition.at(h - 1);
        let prev = occ.dist.step(h - 1);
        let mut inflow = vec![0.0; ns];
        for s in 0..ns {
            for a in 0..na {
                let d = prev[s * na + a];
                if d == 0.0 {
                    continue;
                }
                for (s2, p) in kernel.row(s, a) {
                    inflow[s2] += d * p;
                }
            }
        }
        for (s, &arriving) in inflow.iter().enumerate() {
            let out: f64 = occ.dist.row(h, s).iter().sum();
            worst = worst.max((out - arriving).abs());
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

/// Serialized MDP document. `transition` is `H x |S| x |A| x |S|` nested
/// arrays and `reward` is `H x |S| x |A|`; round-trips are bit-faithful for
/// finite doubles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdpJson {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    pub rho: Vec<f64>,
    pub transition: Vec<Vec<Vec<Vec<f64>>>>,
    pub reward: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<crate::instance::InstanceMetadata>,
}

impl TabularMDP {
    pub fn to_json_doc(&self) -> MdpJson {
        let transition = (0..self.horizon)
            .map(|h| {
                let dense = self.transition.at(h).to_dense();
                (0..self.num_states)
                    .map(|s| {
                        (0..self.num_actions)
                            .map(|a| {
                                let base = (s * self.num_actions + a) * self.num_states;
                                dense[base..base + self.num_states].to_vec()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        MdpJson {
            num_states: self.num_states,
            num_actions: self.num_actions,
            horizon: self.horizon,
            rho: self.initial_dist.clone(),
            transition,
            reward: self.reward.to_nested(),
            metadata: None,
        }
    }

    pub fn from_json_doc(doc: &MdpJson) -> Result<Self> {
        if doc.transition.len() != doc.horizon {
            return Err(Error::ShapeMismatch("transition horizon".into()));
        }
        let mut steps = Vec::with_capacity(doc.horizon);
        for per_step in &doc.transition {
            let mut dense = Vec::with_capacity(doc.num_states * doc.num_actions * doc.num_states);
            if per_step.len() != doc.num_states {
                return Err(Error::ShapeMismatch("transition state dim".into()));
            }
            for per_state in per_step {
                if per_state.len() != doc.num_actions {
                    return Err(Error::ShapeMismatch("transition action dim".into()));
                }
                for row in per_state {
                    if row.len() != doc.num_states {
                        return Err(Error::ShapeMismatch("transition next-state dim".into()));
                    }
                    dense.extend_from_slice(row);
                }
            }
            steps.push(KernelStep::from_dense(
                doc.num_states,
                doc.num_actions,
                &dense,
            )?);
        }
        let kernel = if steps.len() == 1 || steps.iter().all(|k| *k == steps[0]) {
            TransitionKernel::Stationary(steps.swap_remove(0))
        } else {
            TransitionKernel::PerStep(steps)
        };
        let reward = SaTable::from_nested(&doc.reward)?;
        TabularMDP::new(
            doc.num_states,
            doc.num_actions,
            doc.horizon,
            kernel,
            reward,
            doc.rho.clone(),
        )
    }
}

/// Serialized policy document (`probs` is `H x |S| x |A|`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyJson {
    pub horizon: usize,
    pub num_states: usize,
    pub num_actions: usize,
    pub probs: Vec<Vec<Vec<f64>>>,
}

impl NonStationaryPolicy {
    pub fn to_json_doc(&self) -> PolicyJson {
        PolicyJson {
            horizon: self.probs.horizon,
            num_states: self.probs.num_states,
            num_actions: self.probs.num_actions,
            probs: self.probs.to_nested(),
        }
    }

    pub fn from_json_doc(doc: &PolicyJson) -> Result<Self> {
        let table = SaTable::from_nested(&doc.probs)?;
        if table.horizon != doc.horizon
            || table.num_states != doc.num_states
            || table.num_actions != doc.num_actions
        {
            return Err(Error::ShapeMismatch("policy document shape".into()));
        }
        NonStationaryPolicy::new(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{self, InstanceSpec};

    fn fig2() -> crate::instance::LabeledInstance {
        instance::make_rbas(&InstanceSpec::rbas(3, 2, 2, 2)).unwrap()
    }

    /// The policy family from the worked two-good-state example: expert on
    /// visited states, `pi_1(blue | s2) = 1 - beta`.
    fn beta_policy(beta: f64) -> NonStationaryPolicy {
        let mut probs = SaTable::zeros(2, 3, 2);
        probs[(0, 0, 0)] = 1.0;
        probs[(0, 1, 0)] = beta;
        probs[(0, 1, 1)] = 1.0 - beta;
        probs[(0, 2, 1)] = 1.0;
        probs[(1, 0, 0)] = 1.0;
        probs[(1, 1, 0)] = 1.0;
        probs[(1, 2, 1)] = 1.0;
        NonStationaryPolicy::new(probs).unwrap()
    }

    #[test]
    fn occupancy_beta_zero() {
        let inst = fig2();
        let occ = compute_occupancy(&inst.mdp, &beta_policy(0.0)).unwrap();
        assert!((occ.dist[(1, 0, 0)] - 0.25).abs() < 1e-12);
        assert!((occ.dist[(1, 1, 0)] - 0.25).abs() < 1e-12);
        assert!((occ.dist[(1, 2, 1)] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn occupancy_beta_one_is_expert() {
        let inst = fig2();
        let occ = compute_occupancy(&inst.mdp, &beta_policy(1.0)).unwrap();
        assert!((occ.dist[(1, 0, 0)] - 0.5).abs() < 1e-12);
        assert!((occ.dist[(1, 1, 0)] - 0.5).abs() < 1e-12);
        assert_eq!(occ.dist[(1, 2, 0)], 0.0);
        assert_eq!(occ.dist[(1, 2, 1)], 0.0);
    }

    #[test]
    fn occupancy_single_step_is_rho_times_policy() {
        let inst = instance::make_isolated_absorbing(&InstanceSpec::isolated(5, 3, 1)).unwrap();
        let policy = NonStationaryPolicy::uniform(1, 5, 3);
        let occ = compute_occupancy(&inst.mdp, &policy).unwrap();
        for s in 0..5 {
            for a in 0..3 {
                let want = inst.mdp.initial_dist[s] / 3.0;
                assert!((occ.dist[(0, s, a)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn policy_values_on_fig2() {
        let inst = fig2();
        assert!((policy_value(&inst.mdp, &inst.expert).unwrap() - 2.0).abs() < 1e-12);
        let all_blue = NonStationaryPolicy::deterministic(2, 3, 2, 1);
        assert_eq!(policy_value(&inst.mdp, &all_blue).unwrap(), 0.0);
    }

    #[test]
    fn rollout_deterministic_mdp_unique_trajectory() {
        // Single state, single action: every rollout is forced.
        let kernel = KernelStep::from_dense(1, 1, &[1.0])
            .map(TransitionKernel::Stationary)
            .unwrap();
        let mdp = TabularMDP::new(
            1,
            1,
            3,
            kernel,
            SaTable::from_fn(3, 1, 1, |_, _, _| 1.0),
            vec![1.0],
        )
        .unwrap();
        let policy = NonStationaryPolicy::deterministic(3, 1, 1, 0);
        for seed in [0u64, 1, 99] {
            let trs = rollout(&mdp, &policy, seed, 2).unwrap();
            for tr in trs {
                assert_eq!(tr.steps, vec![(0, 0), (0, 0), (0, 0)]);
            }
        }
    }

    #[test]
    fn rollout_initial_state_frequency() {
        let inst = fig2();
        let trs = rollout(&inst.mdp, &inst.expert, 7, 100_000).unwrap();
        let first_s0 = trs.iter().filter(|t| t.steps[0].0 == 0).count();
        let freq = first_s0 as f64 / trs.len() as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn monte_carlo_matches_exact_occupancy() {
        let inst = fig2();
        let n = 100_000;
        let trs = rollout(&inst.mdp, &inst.expert, 13, n).unwrap();
        let exact = compute_occupancy(&inst.mdp, &inst.expert).unwrap();
        let mut emp = SaTable::zeros(2, 3, 2);
        for tr in &trs {
            for (h, &(s, a)) in tr.steps.iter().enumerate() {
                emp[(h, s, a)] += 1.0 / n as f64;
            }
        }
        let l1: f64 = emp
            .step(1)
            .iter()
            .zip(exact.dist.step(1))
            .map(|(x, y)| (x - y).abs())
            .sum();
        assert!(l1 < 0.02, "l1 {l1}");
    }

    #[test]
    fn monte_carlo_rate_improves_with_samples() {
        let inst = fig2();
        let exact = compute_occupancy(&inst.mdp, &inst.expert).unwrap();
        let err_at = |n: usize, seed: u64| {
            let trs = rollout(&inst.mdp, &inst.expert, seed, n).unwrap();
            let mut emp = SaTable::zeros(2, 3, 2);
            for tr in &trs {
                for (h, &(s, a)) in tr.steps.iter().enumerate() {
                    emp[(h, s, a)] += 1.0 / n as f64;
                }
            }
            emp.l1_distance(&exact.dist)
        };
        // Averaged over a few seeds, 16x the samples should shrink the l1
        // error by roughly 4x; require at least 2x to keep the test stable.
        let small: f64 = (0..5).map(|s| err_at(2_000, s)).sum::<f64>() / 5.0;
        let large: f64 = (0..5).map(|s| err_at(32_000, 100 + s)).sum::<f64>() / 5.0;
        assert!(
            small / large > 2.0,
            "small {small} large {large} ratio {}",
            small / large
        );
    }

    #[test]
    fn value_duality_against_rollouts() {
        let inst = fig2();
        let policy = beta_policy(0.3);
        let exact = policy_value(&inst.mdp, &policy).unwrap();
        let n = 10_000;
        let trs = rollout(&inst.mdp, &policy, 3, n).unwrap();
        let returns: Vec<f64> = trs
            .iter()
            .map(|tr| {
                tr.steps
                    .iter()
                    .enumerate()
                    .map(|(h, &(s, a))| inst.mdp.reward[(h, s, a)])
                    .sum()
            })
            .collect();
        let mean = returns.iter().sum::<f64>() / n as f64;
        let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * se,
            "mean {mean} exact {exact} se {se}"
        );
    }

    #[test]
    fn best_response_recovers_expert_on_rbas() {
        let inst = fig2();
        let pi = best_response(&inst.mdp, &inst.mdp.reward).unwrap();
        for h in 0..2 {
            for s in 0..2 {
                assert_eq!(pi.prob(h, s, 0), 1.0);
            }
        }
    }

    #[test]
    fn best_response_zero_reward_breaks_ties_low() {
        let inst = fig2();
        let zero = SaTable::zeros(2, 3, 2);
        let pi = best_response(&inst.mdp, &zero).unwrap();
        for h in 0..2 {
            for s in 0..3 {
                assert_eq!(pi.prob(h, s, 0), 1.0);
            }
        }
    }

    fn random_mdp(ns: usize, na: usize, h: usize, seed: u64) -> TabularMDP {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut dense = vec![0.0; ns * na * ns];
        for row in dense.chunks_mut(ns) {
            let mut sum = 0.0;
            for x in row.iter_mut() {
                *x = rng.gen::<f64>();
                sum += *x;
            }
            for x in row.iter_mut() {
                *x /= sum;
            }
            // Remove float drift so the row sums to exactly 1.
            let drift: f64 = row.iter().sum::<f64>() - 1.0;
            row[0] -= drift;
        }
        let kernel = TransitionKernel::Stationary(KernelStep::from_dense(ns, na, &dense).unwrap());
        let reward = SaTable::from_fn(h, ns, na, |_, _, _| rng.gen());
        let mut rho: Vec<f64> = (0..ns).map(|_| rng.gen::<f64>()).collect();
        let sum: f64 = rho.iter().sum();
        rho.iter_mut().for_each(|x| *x /= sum);
        let drift: f64 = rho.iter().sum::<f64>() - 1.0;
        rho[0] -= drift;
        TabularMDP::new(ns, na, h, kernel, reward, rho).unwrap()
    }

    /// Enumerates every deterministic non-stationary policy.
    fn brute_force_best(mdp: &TabularMDP, reward: &SaTable) -> f64 {
        let (ns, na, h) = (mdp.num_states, mdp.num_actions, mdp.horizon);
        let per_step = na.pow(ns as u32);
        let total = per_step.pow(h as u32);
        let mut best = f64::NEG_INFINITY;
        for code in 0..total {
            let mut c = code;
            let mut probs = SaTable::zeros(h, ns, na);
            for hh in 0..h {
                let mut step_code = c % per_step;
                c /= per_step;
                for s in 0..ns {
                    let a = step_code % na;
                    step_code /= na;
                    probs[(hh, s, a)] = 1.0;
                }
            }
            let pi = NonStationaryPolicy { probs };
            let v = policy_value_under(mdp, &pi, reward).unwrap();
            if v > best {
                best = v;
            }
        }
        best
    }

    #[test]
    fn best_response_matches_brute_force() {
        for (ns, na, h, seed) in [(4, 3, 3, 1u64), (3, 2, 3, 2), (4, 2, 2, 3), (2, 3, 3, 4)] {
            let mdp = random_mdp(ns, na, h, seed);
            let mut rng = StdRng::seed_from_u64(seed + 1000);
            let reward = SaTable::from_fn(h, ns, na, |_, _, _| rng.gen());
            let pi = best_response(&mdp, &reward).unwrap();
            let got = policy_value_under(&mdp, &pi, &reward).unwrap();
            let want = brute_force_best(&mdp, &reward);
            assert!((got - want).abs() < 1e-10, "got {got} want {want}");
        }
    }

    #[test]
    fn flow_conservation_holds_for_computed_occupancy() {
        for seed in 0..5 {
            let mdp = random_mdp(4, 2, 5, seed);
            let mut rng = StdRng::seed_from_u64(seed + 77);
            let mut probs = SaTable::zeros(5, 4, 2);
            for h in 0..5 {
                for s in 0..4 {
                    let x: f64 = rng.gen_range(0.05..0.95);
                    probs[(h, s, 0)] = x;
                    probs[(h, s, 1)] = 1.0 - x;
                }
            }
            let pi = NonStationaryPolicy::new(probs).unwrap();
            let occ = compute_occupancy(&mdp, &pi).unwrap();
            assert!(flow_conservation_gap(&mdp, &occ) < 1e-9);
        }
    }

    #[test]
    fn mdp_json_round_trip_is_bit_faithful() {
        let inst = fig2();
        let doc = inst.to_json_doc();
        let text = serde_json::to_string(&doc).unwrap();
        let back: MdpJson = serde_json::from_str(&text).unwrap();
        let mdp = TabularMDP::from_json_doc(&back).unwrap();
        assert_eq!(mdp, inst.mdp);
        assert_eq!(serde_json::to_string(&mdp.to_json_doc()).unwrap(), {
            let mut doc2 = back.clone();
            doc2.metadata = None;
            serde_json::to_string(&doc2).unwrap()
        });
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(KernelStep::from_dense(2, 1, &[0.6, 0.5, 0.5, 0.5]).is_err());
        assert!(KernelStep::from_dense(2, 1, &[-0.1, 1.1, 0.5, 0.5]).is_err());
        let inst = fig2();
        let bad_policy = NonStationaryPolicy::uniform(3, 3, 2);
        assert!(compute_occupancy(&inst.mdp, &bad_policy).is_err());
    }
}
