//! Closed-form occupancy matching on isolated-absorbing instances.
//!
//! When every state self-loops, the per-step problems decouple and the
//! optimal set is an interval per (step, state): the expert-action
//! probability may sit anywhere in `[target_h(s) / rho(s), 1]` on states
//! where the target mass falls short of `rho`, and must be 1 elsewhere.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::instance::{validate_assumptions, LabeledInstance};
use crate::mdp::{NonStationaryPolicy, OccupancyMeasure, SaTable};
use crate::{Error, Result};

/// How to pick inside the optimal interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IsoTieRule {
    /// Sample uniformly from the optimal interval, independently per
    /// (step, state).
    #[default]
    UniformRandom,
    /// Lower interval end: the largest imitation gap among optima.
    WorstCase,
    /// Upper interval end: recovers the expert.
    BestCase,
}

fn check_applicable(inst: &LabeledInstance, target: &OccupancyMeasure) -> Result<()> {
    if !validate_assumptions(inst).isolated_ok() {
        return Err(Error::NotApplicable(
            "instance fails the isolated-absorbing checks".into(),
        ));
    }
    let a1 = inst.metadata.expert_action;
    for h in 0..target.dist.horizon {
        for s in 0..target.dist.num_states {
            for a in 0..target.dist.num_actions {
                if a != a1 && target.dist[(h, s, a)] != 0.0 {
                    return Err(Error::NotApplicable(
                        "target carries mass off the expert action".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Picks a loss-minimizing policy according to `tie_rule`.
pub fn isolated_absorbing_solve(
    inst: &LabeledInstance,
    target: &OccupancyMeasure,
    tie_rule: IsoTieRule,
    seed: u64,
) -> Result<NonStationaryPolicy> {
    check_applicable(inst, target)?;
    let mdp = &inst.mdp;
    let (ns, na, h_max) = (mdp.num_states, mdp.num_actions, mdp.horizon);
    if target.dist.horizon != h_max || target.dist.num_states != ns {
        return Err(Error::ShapeMismatch("target occupancy shape".into()));
    }
    let a1 = inst.metadata.expert_action;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut probs = SaTable::zeros(h_max, ns, na);
    for h in 0..h_max {
        for s in 0..ns {
            let rho = mdp.initial_dist[s];
            let hat: f64 = target.dist.row(h, s).iter().sum();
            let lower = if rho > 0.0 { (hat / rho).min(1.0) } else { 1.0 };
            let p1 = if lower >= 1.0 {
                1.0
            } else {
                match tie_rule {
                    IsoTieRule::WorstCase => lower,
                    IsoTieRule::BestCase => 1.0,
                    IsoTieRule::UniformRandom => lower + rng.gen::<f64>() * (1.0 - lower),
                }
            };
            let rest = (1.0 - p1) / (na as f64 - 1.0);
            let row = probs.row_mut(h, s);
            for (a, v) in row.iter_mut().enumerate() {
                *v = if a == a1 { p1 } else { rest };
            }
        }
    }
    NonStationaryPolicy::new(probs)
}

/// Largest imitation gap over the optimal set:
/// `1/2 sum_h || target_h(.) - d^expert_h(.) ||_1` in state marginals.
pub fn worst_case_gap(inst: &LabeledInstance, target: &OccupancyMeasure) -> Result<f64> {
    check_applicable(inst, target)?;
    Ok(0.5 * state_l1_to_rho(inst, target))
}

/// Expected imitation gap when ties are drawn uniformly from the optimal
/// interval: half the worst case.
pub fn uniform_tie_expected_gap(inst: &LabeledInstance, target: &OccupancyMeasure) -> Result<f64> {
    check_applicable(inst, target)?;
    Ok(0.25 * state_l1_to_rho(inst, target))
}

/// Minimal matching loss on an isolated-absorbing instance:
/// `sum_h || target_h(.) - rho ||_1` in state marginals.
pub fn optimal_matching_loss(inst: &LabeledInstance, target: &OccupancyMeasure) -> Result<f64> {
    check_applicable(inst, target)?;
    Ok(state_l1_to_rho(inst, target))
}

fn state_l1_to_rho(inst: &LabeledInstance, target: &OccupancyMeasure) -> f64 {
    let mut total = 0.0;
    for h in 0..target.dist.horizon {
        let marg = target.state_marginal(h);
        for (s, &rho) in inst.mdp.initial_dist.iter().enumerate() {
            total += (marg[s] - rho).abs();
        }
    }
    total
}
