//! Exact occupancy matching by linear programming.
//!
//! The policy variable is relaxed to the occupancy measure, which ranges
//! over the flow polytope cut out by the per-step conservation equalities;
//! absolute values are linearized with one slack variable per `(h, s, a)`;
//! the optimal policy is recovered from the optimal occupancy.

use crate::learners::simplex::{self, LpConstraint, LpProblem, RelOp};
use crate::mdp::{NonStationaryPolicy, OccupancyMeasure, SaTable, TabularMDP};
use crate::{Error, Result};

/// Globally minimizes `sum_h ||d_h - target_h||_1` over the flow polytope
/// and returns the recovered policy with the optimal loss.
pub fn tvail_lp(mdp: &TabularMDP, target: &OccupancyMeasure) -> Result<(NonStationaryPolicy, f64)> {
    if target.dist.horizon != mdp.horizon
        || target.dist.num_states != mdp.num_states
        || target.dist.num_actions != mdp.num_actions
    {
        return Err(Error::ShapeMismatch("target occupancy shape".into()));
    }
    target.validate()?;
    let (ns, na, h_max) = (mdp.num_states, mdp.num_actions, mdp.horizon);
    let n_sa = h_max * ns * na;
    let d_var = |h: usize, s: usize, a: usize| (h * ns + s) * na + a;
    let u_var = |h: usize, s: usize, a: usize| n_sa + (h * ns + s) * na + a;

    let mut objective = vec![0.0; 2 * n_sa];
    for v in objective.iter_mut().skip(n_sa) {
        *v = 1.0;
    }

    let mut constraints = Vec::with_capacity(h_max * ns + 2 * n_sa);
    // Flow: step 1 matches the initial distribution.
    for s in 0..ns {
        let coeffs: Vec<(usize, f64)> = (0..na).map(|a| (d_var(0, s, a), 1.0)).collect();
        constraints.push(LpConstraint {
            coeffs,
            op: RelOp::Eq,
            rhs: mdp.initial_dist[s],
        });
    }
    // Flow: each later step receives exactly the pushed-forward mass.
    for h in 1..h_max {
        let kernel = mdp.transition.at(h - 1);
        for s in 0..ns {
            let mut coeffs: Vec<(usize, f64)> = (0..na).map(|a| (d_var(h, s, a), 1.0)).collect();
            for s_prev in 0..ns {
                for a_prev in 0..na {
                    let p = kernel.prob(s_prev, a_prev, s);
                    if p > 0.0 {
                        coeffs.push((d_var(h - 1, s_prev, a_prev), -p));
                    }
                }
            }
            constraints.push(LpConstraint {
                coeffs,
                op: RelOp::Eq,
                rhs: 0.0,
            });
        }
    }
    // |d - target| linearization: u >= d - target and u >= target - d.
    for h in 0..h_max {
        for s in 0..ns {
            for a in 0..na {
                let t = target.dist[(h, s, a)];
                constraints.push(LpConstraint {
                    coeffs: vec![(d_var(h, s, a), 1.0), (u_var(h, s, a), -1.0)],
                    op: RelOp::Le,
                    rhs: t,
                });
                constraints.push(LpConstraint {
                    coeffs: vec![(d_var(h, s, a), 1.0), (u_var(h, s, a), 1.0)],
                    op: RelOp::Ge,
                    rhs: t,
                });
            }
        }
    }

    let solution = simplex::solve(&LpProblem {
        num_vars: 2 * n_sa,
        objective,
        constraints,
    })?;

    let mut occupancy = SaTable::zeros(h_max, ns, na);
    occupancy
        .as_mut_slice()
        .copy_from_slice(&solution.x[..n_sa]);
    let policy = policy_from_occupancy(&occupancy);
    Ok((policy, solution.objective))
}

/// Conditional distribution `d_h(s, a) / d_h(s)`; states with no mass get
/// the uniform row.
pub fn policy_from_occupancy(occupancy: &SaTable) -> NonStationaryPolicy {
    let (h_max, ns, na) = (
        occupancy.horizon,
        occupancy.num_states,
        occupancy.num_actions,
    );
    let mut probs = SaTable::zeros(h_max, ns, na);
    for h in 0..h_max {
        for s in 0..ns {
            let mass: f64 = occupancy.row(h, s).iter().sum();
            let row = probs.row_mut(h, s);
            if mass > 1e-300 {
                for (p, d) in row.iter_mut().zip(occupancy.row(h, s)) {
                    *p = (d / mass).max(0.0);
                }
                // Scrub float drift so each row is an exact distribution.
                let sum: f64 = row.iter().sum();
                row.iter_mut().for_each(|p| *p /= sum);
            } else {
                row.fill(1.0 / na as f64);
            }
        }
    }
    NonStationaryPolicy { probs }
}
