//! Constructors for every MDP family studied here, with their expert
//! policies attached, plus validators for the structural assumptions the
//! families must satisfy.

use serde::{Deserialize, Serialize};

use crate::mdp::{KernelStep, MdpJson, NonStationaryPolicy, SaTable, TabularMDP, TransitionKernel};
use crate::{Error, Result};

/// Which family an instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    /// Reachable bad absorbing states: wrong actions trap the agent in
    /// zero-reward absorbing states, while the expert action keeps every
    /// good state reachable.
    Rbas,
    /// Every state self-loops under every action; stages decouple.
    IsolatedAbsorbing,
    /// RBAS variant whose expert action resets according to a skewed
    /// initial distribution parameterized by the expert sample size.
    OfflineLowerBound,
    /// The bundled 3-state, 2-good-state instance with uniform transitions
    /// between the good states (`--kind fig2` on the CLI).
    Fig2,
    /// The 5-state deterministic instance whose matching loss is non-convex.
    NonconvexWitness,
}

impl InstanceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InstanceKind::Rbas => "rbas",
            InstanceKind::IsolatedAbsorbing => "isolated_absorbing",
            InstanceKind::OfflineLowerBound => "offline_lower_bound",
            InstanceKind::Fig2 => "fig2",
            InstanceKind::NonconvexWitness => "nonconvex_witness",
        }
    }
}

/// Parameters for instance construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    #[serde(default)]
    pub rng_seed: u64,
    /// Number of good states for the RBAS family (default `|S| - 1`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_good_states: Option<usize>,
    /// Expert sample size `N` shaping the offline lower-bound initial
    /// distribution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_expert_trajectories: Option<usize>,
}

impl InstanceSpec {
    pub fn rbas(num_states: usize, num_good: usize, num_actions: usize, horizon: usize) -> Self {
        InstanceSpec {
            kind: InstanceKind::Rbas,
            num_states,
            num_actions,
            horizon,
            rng_seed: 0,
            num_good_states: Some(num_good),
            num_expert_trajectories: None,
        }
    }

    pub fn isolated(num_states: usize, num_actions: usize, horizon: usize) -> Self {
        InstanceSpec {
            kind: InstanceKind::IsolatedAbsorbing,
            num_states,
            num_actions,
            horizon,
            rng_seed: 0,
            num_good_states: None,
            num_expert_trajectories: None,
        }
    }

    pub fn offline_lower_bound(num_states: usize, horizon: usize, n: usize) -> Self {
        InstanceSpec {
            kind: InstanceKind::OfflineLowerBound,
            num_states,
            num_actions: 2,
            horizon,
            rng_seed: 0,
            num_good_states: Some(num_states - 1),
            num_expert_trajectories: Some(n),
        }
    }

    pub fn fig2() -> Self {
        InstanceSpec {
            kind: InstanceKind::Fig2,
            num_states: 3,
            num_actions: 2,
            horizon: 2,
            rng_seed: 0,
            num_good_states: Some(2),
            num_expert_trajectories: None,
        }
    }

    pub fn nonconvex_witness() -> Self {
        InstanceSpec {
            kind: InstanceKind::NonconvexWitness,
            num_states: 5,
            num_actions: 2,
            horizon: 2,
            rng_seed: 0,
            num_good_states: None,
            num_expert_trajectories: None,
        }
    }
}

/// Labeling carried with a generated instance: the good/bad partition and
/// the globally shared expert action index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    pub kind: InstanceKind,
    pub good_states: Vec<usize>,
    pub bad_states: Vec<usize>,
    pub expert_action: usize,
}

/// An MDP together with its deterministic expert policy and metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledInstance {
    pub mdp: TabularMDP,
    pub expert: NonStationaryPolicy,
    pub metadata: InstanceMetadata,
}

impl LabeledInstance {
    pub fn to_json_doc(&self) -> MdpJson {
        let mut doc = self.mdp.to_json_doc();
        doc.metadata = Some(self.metadata.clone());
        doc
    }

    pub fn from_json_doc(doc: &MdpJson) -> Result<Self> {
        let mdp = TabularMDP::from_json_doc(doc)?;
        let metadata = doc
            .metadata
            .clone()
            .ok_or_else(|| Error::InvalidSpec("document has no instance metadata".into()))?;
        if metadata.expert_action >= mdp.num_actions {
            return Err(Error::InvalidSpec("expert action out of range".into()));
        }
        let expert = NonStationaryPolicy::deterministic(
            mdp.horizon,
            mdp.num_states,
            mdp.num_actions,
            metadata.expert_action,
        );
        Ok(LabeledInstance {
            mdp,
            expert,
            metadata,
        })
    }
}

fn expert_reward(
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    good: &[bool],
    expert_action: usize,
) -> SaTable {
    SaTable::from_fn(horizon, num_states, num_actions, |_, s, a| {
        if good[s] && a == expert_action {
            1.0
        } else {
            0.0
        }
    })
}

fn labeled(
    kind: InstanceKind,
    mdp: TabularMDP,
    good: Vec<usize>,
    bad: Vec<usize>,
    expert_action: usize,
) -> LabeledInstance {
    let expert = NonStationaryPolicy::deterministic(
        mdp.horizon,
        mdp.num_states,
        mdp.num_actions,
        expert_action,
    );
    LabeledInstance {
        mdp,
        expert,
        metadata: InstanceMetadata {
            kind,
            good_states: good,
            bad_states: bad,
            expert_action,
        },
    }
}

/// RBAS instance: the expert action moves uniformly between good states,
/// every other action falls into the bad absorbing set, reward 1 exactly on
/// (good state, expert action), initial distribution uniform over good
/// states.
pub fn make_rbas(spec: &InstanceSpec) -> Result<LabeledInstance> {
    let (ns, na, h) = (spec.num_states, spec.num_actions, spec.horizon);
    let num_good = spec.num_good_states.unwrap_or(ns.saturating_sub(1));
    if num_good == 0 {
        return Err(Error::InvalidSpec(
            "rbas needs at least one good state".into(),
        ));
    }
    if num_good >= ns {
        return Err(Error::InvalidSpec(
            "rbas needs at least one bad state".into(),
        ));
    }
    if na < 2 {
        return Err(Error::InvalidSpec("rbas needs at least two actions".into()));
    }
    let num_bad = ns - num_good;
    let expert_action = 0;
    let mut dense = vec![0.0; ns * na * ns];
    for s in 0..ns {
        for a in 0..na {
            let row = &mut dense[(s * na + a) * ns..(s * na + a + 1) * ns];
            if s < num_good {
                if a == expert_action {
                    for r in row.iter_mut().take(num_good) {
                        *r = 1.0 / num_good as f64;
                    }
                } else {
                    for r in row.iter_mut().skip(num_good) {
                        *r = 1.0 / num_bad as f64;
                    }
                }
            } else {
                row[s] = 1.0;
            }
        }
    }
    let kernel = TransitionKernel::Stationary(KernelStep::from_dense(ns, na, &dense)?);
    let good_mask: Vec<bool> = (0..ns).map(|s| s < num_good).collect();
    let reward = expert_reward(h, ns, na, &good_mask, expert_action);
    let mut rho = vec![0.0; ns];
    for r in rho.iter_mut().take(num_good) {
        *r = 1.0 / num_good as f64;
    }
    let mdp = TabularMDP::new(ns, na, h, kernel, reward, rho)?;
    Ok(labeled(
        InstanceKind::Rbas,
        mdp,
        (0..num_good).collect(),
        (num_good..ns).collect(),
        expert_action,
    ))
}

/// The bundled three-state instance: two good states, one bad state,
/// horizon 2, uniform initial distribution over the good states.
pub fn make_fig2() -> Result<LabeledInstance> {
    let mut inst = make_rbas(&InstanceSpec::rbas(3, 2, 2, 2))?;
    inst.metadata.kind = InstanceKind::Fig2;
    Ok(inst)
}

/// Isolated-absorbing instance: every state self-loops under every action
/// and only the expert action is rewarded. Initial distribution uniform
/// over all states.
pub fn make_isolated_absorbing(spec: &InstanceSpec) -> Result<LabeledInstance> {
    let (ns, na, h) = (spec.num_states, spec.num_actions, spec.horizon);
    if na < 2 {
        return Err(Error::InvalidSpec(
            "isolated-absorbing needs at least two actions".into(),
        ));
    }
    if ns == 0 {
        return Err(Error::InvalidSpec("need at least one state".into()));
    }
    let expert_action = 0;
    let mut dense = vec![0.0; ns * na * ns];
    for s in 0..ns {
        for a in 0..na {
            dense[(s * na + a) * ns + s] = 1.0;
        }
    }
    let kernel = TransitionKernel::Stationary(KernelStep::from_dense(ns, na, &dense)?);
    let all_good = vec![true; ns];
    let reward = expert_reward(h, ns, na, &all_good, expert_action);
    let rho = vec![1.0 / ns as f64; ns];
    let mdp = TabularMDP::new(ns, na, h, kernel, reward, rho)?;
    Ok(labeled(
        InstanceKind::IsolatedAbsorbing,
        mdp,
        (0..ns).collect(),
        Vec::new(),
        expert_action,
    ))
}

/// Offline hard instance: `|S| - 1` good states, one bad state, initial
/// distribution `(1/(N+1), ..., 1/(N+1), 1 - (|S|-2)/(N+1), 0)`, expert
/// action resets according to that distribution.
pub fn make_offline_lower_bound(
    num_states: usize,
    horizon: usize,
    n: usize,
) -> Result<LabeledInstance> {
    if num_states < 2 {
        return Err(Error::InvalidSpec(
            "offline lower bound needs at least two states".into(),
        ));
    }
    // The heavy state's mass 1 - (|S|-2)/(N+1) must stay strictly positive,
    // otherwise the expert-action kernel loses reachability.
    if num_states >= 3 && n < num_states - 2 {
        return Err(Error::InvalidSpec(format!(
            "offline lower bound needs N >= |S| - 2 (got N = {n}, |S| = {num_states}); \
             the heavy-state mass 1 - (|S|-2)/(N+1) would not be positive"
        )));
    }
    let ns = num_states;
    let na = 2;
    let num_good = ns - 1;
    let expert_action = 0;
    let mut rho = vec![0.0; ns];
    for r in rho.iter_mut().take(ns.saturating_sub(2)) {
        *r = 1.0 / (n as f64 + 1.0);
    }
    rho[num_good - 1] = 1.0 - (ns as f64 - 2.0) / (n as f64 + 1.0);
    let mut dense = vec![0.0; ns * na * ns];
    for s in 0..ns {
        for a in 0..na {
            let row = &mut dense[(s * na + a) * ns..(s * na + a + 1) * ns];
            if s < num_good {
                if a == expert_action {
                    row.copy_from_slice(&rho);
                } else {
                    row[num_good] = 1.0;
                }
            } else {
                row[s] = 1.0;
            }
        }
    }
    let kernel = TransitionKernel::Stationary(KernelStep::from_dense(ns, na, &dense)?);
    let good_mask: Vec<bool> = (0..ns).map(|s| s < num_good).collect();
    let reward = expert_reward(horizon, ns, na, &good_mask, expert_action);
    let mdp = TabularMDP::new(ns, na, horizon, kernel, reward, rho)?;
    Ok(labeled(
        InstanceKind::OfflineLowerBound,
        mdp,
        (0..num_good).collect(),
        vec![num_good],
        expert_action,
    ))
}

/// The 5-state deterministic instance whose matching loss, viewed as a
/// function of `(pi_1(a1|s1), pi_2(a1|s2))`, equals `2 (2 - x - x y)` for
/// the single expert trajectory `(s1, a1) -> (s2, a1)`.
pub fn make_nonconvex_witness() -> Result<LabeledInstance> {
    let (ns, na, h) = (5, 2, 2);
    let expert_action = 0;
    let mut dense = vec![0.0; ns * na * ns];
    let mut arrow = |s: usize, a: usize, s2: usize| {
        dense[(s * na + a) * ns + s2] = 1.0;
    };
    arrow(0, 0, 1); // s1 --a1--> s2
    arrow(0, 1, 2); // s1 --a2--> s3
    arrow(1, 0, 3); // s2 --a1--> s4
    arrow(1, 1, 4); // s2 --a2--> s5
    for s in 2..5 {
        arrow(s, 0, s);
        arrow(s, 1, s);
    }
    let kernel = TransitionKernel::Stationary(KernelStep::from_dense(ns, na, &dense)?);
    let good_mask = [true, true, false, false, false];
    let reward = expert_reward(h, ns, na, &good_mask, expert_action);
    let rho = vec![1.0, 0.0, 0.0, 0.0, 0.0];
    let mdp = TabularMDP::new(ns, na, h, kernel, reward, rho)?;
    Ok(labeled(
        InstanceKind::NonconvexWitness,
        mdp,
        vec![0, 1],
        vec![2, 3, 4],
        expert_action,
    ))
}

/// Builds the instance a spec describes.
pub fn make_instance(spec: &InstanceSpec) -> Result<LabeledInstance> {
    match spec.kind {
        InstanceKind::Rbas => make_rbas(spec),
        InstanceKind::IsolatedAbsorbing => make_isolated_absorbing(spec),
        InstanceKind::OfflineLowerBound => make_offline_lower_bound(
            spec.num_states,
            spec.horizon,
            spec.num_expert_trajectories.ok_or_else(|| {
                Error::InvalidSpec("offline lower bound needs num_expert_trajectories".into())
            })?,
        ),
        InstanceKind::Fig2 => make_fig2(),
        InstanceKind::NonconvexWitness => make_nonconvex_witness(),
    }
}

// ---------------------------------------------------------------------------
// Assumption validators
// ---------------------------------------------------------------------------

/// `(h, s, a, s')` pinpointing the first violation of a structural check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub h: usize,
    pub s: usize,
    pub a: usize,
    pub s2: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckResult {
    fn ok(name: &'static str) -> Self {
        CheckResult {
            name,
            pass: true,
            witness: None,
        }
    }

    fn fail(name: &'static str, witness: Witness) -> Self {
        CheckResult {
            name,
            pass: false,
            witness: Some(witness),
        }
    }
}

/// Per-bullet validation of the two structural assumptions.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub rbas: Vec<CheckResult>,
    pub isolated_absorbing: Vec<CheckResult>,
}

impl AssumptionReport {
    pub fn rbas_ok(&self) -> bool {
        self.rbas.iter().all(|c| c.pass)
    }

    pub fn isolated_ok(&self) -> bool {
        self.isolated_absorbing.iter().all(|c| c.pass)
    }
}

/// Runs every structural check against the instance and reports them all;
/// failures carry the first counterexample found.
pub fn validate_assumptions(inst: &LabeledInstance) -> AssumptionReport {
    AssumptionReport {
        rbas: rbas_checks(inst),
        isolated_absorbing: isolated_checks(inst),
    }
}

fn rbas_checks(inst: &LabeledInstance) -> Vec<CheckResult> {
    let mdp = &inst.mdp;
    let meta = &inst.metadata;
    let (ns, na, h_max) = (mdp.num_states, mdp.num_actions, mdp.horizon);
    let a1 = meta.expert_action;
    let mut good = vec![false; ns];
    let mut bad = vec![false; ns];
    let mut checks = Vec::with_capacity(5);

    // Bullet 1: good/bad states partition the state space.
    let mut partition = CheckResult::ok("good_bad_partition");
    for &s in &meta.good_states {
        if s >= ns || good[s] {
            partition = CheckResult::fail(
                "good_bad_partition",
                Witness {
                    h: 0,
                    s,
                    a: 0,
                    s2: None,
                },
            );
        } else {
            good[s] = true;
        }
    }
    for &s in &meta.bad_states {
        if s >= ns || bad[s] || good[s] {
            partition = CheckResult::fail(
                "good_bad_partition",
                Witness {
                    h: 0,
                    s,
                    a: 0,
                    s2: None,
                },
            );
        } else {
            bad[s] = true;
        }
    }
    if partition.pass {
        if let Some(s) = (0..ns).find(|&s| !good[s] && !bad[s]) {
            partition = CheckResult::fail(
                "good_bad_partition",
                Witness {
                    h: 0,
                    s,
                    a: 0,
                    s2: None,
                },
            );
        }
        if meta.good_states.is_empty() {
            partition = CheckResult::fail(
                "good_bad_partition",
                Witness {
                    h: 0,
                    s: 0,
                    a: 0,
                    s2: None,
                },
            );
        }
    }
    checks.push(partition);

    // Bullet 2: reward 1 exactly on (good, expert action).
    let mut rewards = CheckResult::ok("expert_action_rewards");
    'reward: for h in 0..h_max {
        for s in 0..ns {
            for a in 0..na {
                let want = if good[s] && a == a1 { 1.0 } else { 0.0 };
                if mdp.reward[(h, s, a)] != want {
                    rewards =
                        CheckResult::fail("expert_action_rewards", Witness { h, s, a, s2: None });
                    break 'reward;
                }
            }
        }
    }
    checks.push(rewards);

    // Bullet 3: under the expert action every good state reaches every good
    // state with positive probability.
    let mut reach = CheckResult::ok("expert_action_reachability");
    'reach: for h in 0..h_max {
        let kernel = mdp.transition.at(h);
        for &s in &meta.good_states {
            for &s2 in &meta.good_states {
                if kernel.prob(s, a1, s2) <= 0.0 {
                    reach = CheckResult::fail(
                        "expert_action_reachability",
                        Witness {
                            h,
                            s,
                            a: a1,
                            s2: Some(s2),
                        },
                    );
                    break 'reach;
                }
            }
        }
    }
    checks.push(reach);

    // Bullet 4: non-expert actions never reach good states.
    let mut avoid = CheckResult::ok("non_expert_actions_leave_good");
    'avoid: for h in 0..h_max {
        let kernel = mdp.transition.at(h);
        for &s in &meta.good_states {
            for a in 0..na {
                if a == a1 {
                    continue;
                }
                for (s2, p) in kernel.row(s, a) {
                    if good[s2] && p > 0.0 {
                        avoid = CheckResult::fail(
                            "non_expert_actions_leave_good",
                            Witness {
                                h,
                                s,
                                a,
                                s2: Some(s2),
                            },
                        );
                        break 'avoid;
                    }
                }
            }
        }
    }
    checks.push(avoid);

    // Bullet 5: bad states only transition within the bad set.
    let mut absorbing = CheckResult::ok("bad_states_absorbing");
    'absorb: for h in 0..h_max {
        let kernel = mdp.transition.at(h);
        for &s in &meta.bad_states {
            for a in 0..na {
                let bad_mass: f64 = kernel
                    .row(s, a)
                    .filter(|&(s2, _)| bad[s2])
                    .map(|(_, p)| p)
                    .sum();
                if (bad_mass - 1.0).abs() > crate::mdp::DIST_TOL {
                    absorbing =
                        CheckResult::fail("bad_states_absorbing", Witness { h, s, a, s2: None });
                    break 'absorb;
                }
            }
        }
    }
    checks.push(absorbing);

    checks
}

fn isolated_checks(inst: &LabeledInstance) -> Vec<CheckResult> {
    let mdp = &inst.mdp;
    let (ns, na, h_max) = (mdp.num_states, mdp.num_actions, mdp.horizon);
    let a1 = inst.metadata.expert_action;
    let mut checks = Vec::with_capacity(2);

    let mut selfloop = CheckResult::ok("every_state_self_absorbing");
    'outer: for h in 0..h_max {
        let kernel = mdp.transition.at(h);
        for s in 0..ns {
            for a in 0..na {
                if (kernel.prob(s, a, s) - 1.0).abs() > crate::mdp::DIST_TOL {
                    selfloop = CheckResult::fail(
                        "every_state_self_absorbing",
                        Witness {
                            h,
                            s,
                            a,
                            s2: Some(s),
                        },
                    );
                    break 'outer;
                }
            }
        }
    }
    checks.push(selfloop);

    let mut rewards = CheckResult::ok("expert_action_rewards_everywhere");
    'rew: for h in 0..h_max {
        for s in 0..ns {
            for a in 0..na {
                let want = if a == a1 { 1.0 } else { 0.0 };
                if mdp.reward[(h, s, a)] != want {
                    rewards = CheckResult::fail(
                        "expert_action_rewards_everywhere",
                        Witness { h, s, a, s2: None },
                    );
                    break 'rew;
                }
            }
        }
    }
    checks.push(rewards);

    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{compute_occupancy, policy_value};

    #[test]
    fn fig2_matches_expected_arrays() {
        let inst = make_fig2().unwrap();
        assert_eq!(inst.mdp.initial_dist, vec![0.5, 0.5, 0.0]);
        let k = inst.mdp.transition.at(0);
        assert_eq!(k.prob(0, 0, 0), 0.5);
        assert_eq!(k.prob(0, 0, 1), 0.5);
        assert_eq!(k.prob(1, 0, 0), 0.5);
        assert_eq!(k.prob(0, 1, 2), 1.0);
        assert_eq!(k.prob(1, 1, 2), 1.0);
        assert_eq!(k.prob(2, 0, 2), 1.0);
        assert_eq!(k.prob(2, 1, 2), 1.0);
        assert_eq!(inst.mdp.reward[(0, 0, 0)], 1.0);
        assert_eq!(inst.mdp.reward[(0, 2, 0)], 0.0);
        assert_eq!(inst.mdp.reward[(1, 1, 1)], 0.0);
    }

    #[test]
    fn rbas_expert_value_is_horizon() {
        let inst = make_rbas(&InstanceSpec::rbas(20, 19, 2, 1000)).unwrap();
        let v = policy_value(&inst.mdp, &inst.expert).unwrap();
        assert!((v - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn rbas_passes_validator() {
        let inst = make_rbas(&InstanceSpec::rbas(20, 19, 2, 5)).unwrap();
        let report = validate_assumptions(&inst);
        assert!(report.rbas_ok(), "{:?}", report.rbas);
        assert!(!report.isolated_ok());
    }

    #[test]
    fn rbas_rejects_empty_good_set() {
        assert!(make_rbas(&InstanceSpec::rbas(3, 0, 2, 2)).is_err());
        assert!(make_rbas(&InstanceSpec::rbas(3, 3, 2, 2)).is_err());
    }

    #[test]
    fn expert_never_visits_bad_states() {
        for inst in [
            make_rbas(&InstanceSpec::rbas(6, 4, 3, 7)).unwrap(),
            make_offline_lower_bound(4, 6, 10).unwrap(),
            make_fig2().unwrap(),
        ] {
            let occ = compute_occupancy(&inst.mdp, &inst.expert).unwrap();
            for h in 0..inst.mdp.horizon {
                for &b in &inst.metadata.bad_states {
                    let mass: f64 = occ.dist.row(h, b).iter().sum();
                    assert!(mass.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn isolated_occupancy_equals_initial_distribution() {
        let inst = make_isolated_absorbing(&InstanceSpec::isolated(4, 2, 6)).unwrap();
        // Any policy: state visitation equals rho at every step.
        let policy = NonStationaryPolicy::uniform(6, 4, 2);
        let occ = compute_occupancy(&inst.mdp, &policy).unwrap();
        for h in 0..6 {
            let marg = occ.state_marginal(h);
            for s in 0..4 {
                assert!((marg[s] - inst.mdp.initial_dist[s]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn isolated_expert_value() {
        let inst = make_isolated_absorbing(&InstanceSpec::isolated(100, 2, 100)).unwrap();
        let v = policy_value(&inst.mdp, &inst.expert).unwrap();
        assert!((v - 100.0).abs() < 1e-9);
        let report = validate_assumptions(&inst);
        assert!(report.isolated_ok());
    }

    #[test]
    fn two_state_instance_passes_isolated_fails_rbas() {
        let inst = make_isolated_absorbing(&InstanceSpec::isolated(2, 2, 1)).unwrap();
        assert_eq!(inst.mdp.initial_dist, vec![0.5, 0.5]);
        let report = validate_assumptions(&inst);
        assert!(report.isolated_ok());
        assert!(!report.rbas_ok());
    }

    #[test]
    fn offline_lower_bound_rho() {
        let inst = make_offline_lower_bound(4, 3, 10).unwrap();
        let rho = &inst.mdp.initial_dist;
        assert!((rho[0] - 1.0 / 11.0).abs() < 1e-15);
        assert!((rho[1] - 1.0 / 11.0).abs() < 1e-15);
        assert!((rho[2] - 9.0 / 11.0).abs() < 1e-15);
        assert_eq!(rho[3], 0.0);
        assert!(validate_assumptions(&inst).rbas_ok());
    }

    #[test]
    fn offline_lower_bound_feasibility_boundary() {
        // N = |S| - 3 makes the heavy-state mass exactly zero and
        // N < |S| - 3 makes it negative; both are refused.
        assert!(make_offline_lower_bound(4, 3, 1).is_err());
        assert!(make_offline_lower_bound(5, 3, 1).is_err());
        assert!(make_offline_lower_bound(4, 3, 2).is_ok());
    }

    #[test]
    fn validator_reports_witness_on_edited_kernel() {
        let inst = make_fig2().unwrap();
        let mut dense = inst.mdp.transition.at(0).to_dense();
        // Remove the s1 -> s1 expert transition and dump its mass on s2.
        dense[0] = 0.0;
        dense[1] = 1.0;
        let kernel = TransitionKernel::Stationary(KernelStep::from_dense(3, 2, &dense).unwrap());
        let edited = TabularMDP::new(
            3,
            2,
            2,
            kernel,
            inst.mdp.reward.clone(),
            vec![0.5, 0.5, 0.0],
        )
        .unwrap();
        let edited_inst = LabeledInstance {
            mdp: edited,
            expert: inst.expert.clone(),
            metadata: inst.metadata.clone(),
        };
        let report = validate_assumptions(&edited_inst);
        let reach = report
            .rbas
            .iter()
            .find(|c| c.name == "expert_action_reachability")
            .unwrap();
        assert!(!reach.pass);
        assert_eq!(
            reach.witness,
            Some(Witness {
                h: 0,
                s: 0,
                a: 0,
                s2: Some(0)
            })
        );
    }

    #[test]
    fn generators_are_deterministic() {
        let a = make_rbas(&InstanceSpec::rbas(20, 19, 2, 4)).unwrap();
        let b = make_rbas(&InstanceSpec::rbas(20, 19, 2, 4)).unwrap();
        let ja = serde_json::to_vec(&a.to_json_doc()).unwrap();
        let jb = serde_json::to_vec(&b.to_json_doc()).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn labeled_instance_json_round_trip() {
        let inst = make_offline_lower_bound(4, 3, 10).unwrap();
        let text = serde_json::to_string(&inst.to_json_doc()).unwrap();
        let doc: MdpJson = serde_json::from_str(&text).unwrap();
        let back = LabeledInstance::from_json_doc(&doc).unwrap();
        assert_eq!(back, inst);
    }
}
