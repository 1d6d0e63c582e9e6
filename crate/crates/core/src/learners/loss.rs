//! State-action distribution matching losses.

use serde::{Deserialize, Serialize};

use crate::mdp::{compute_occupancy, NonStationaryPolicy, OccupancyMeasure, TabularMDP};
use crate::{Error, Result};

/// Per-step divergence between occupancy measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    /// Total variation flavor: `sum_h ||d_h - t_h||_1`.
    L1,
    /// `sum_h ||d_h - t_h||_2`.
    L2,
    /// `sum_h ||d_h - t_h||_inf`.
    LInf,
    /// `sum_h D_JS(d_h, t_h)` with the `0 log 0 = 0` convention.
    Js,
}

fn js_step(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&x, &y) in p.iter().zip(q) {
        let m = 0.5 * (x + y);
        if x > 0.0 {
            total += x * (x / m).ln();
        }
        if y > 0.0 {
            total += y * (y / m).ln();
        }
    }
    total
}

/// Divergence between two per-step state-action distributions.
pub fn occupancy_loss(occ: &OccupancyMeasure, target: &OccupancyMeasure, div: Divergence) -> f64 {
    let steps = occ.dist.horizon;
    let mut total = 0.0;
    for h in 0..steps {
        let d = occ.dist.step(h);
        let t = target.dist.step(h);
        total += match div {
            Divergence::L1 => d.iter().zip(t).map(|(x, y)| (x - y).abs()).sum(),
            Divergence::L2 => d
                .iter()
                .zip(t)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Divergence::LInf => d
                .iter()
                .zip(t)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
            Divergence::Js => js_step(d, t),
        };
    }
    total
}

/// Matching loss of a policy on `mdp` against a per-step-normalized target.
pub fn matching_loss(
    mdp: &TabularMDP,
    policy: &NonStationaryPolicy,
    target: &OccupancyMeasure,
    div: Divergence,
) -> Result<f64> {
    if target.dist.horizon != mdp.horizon
        || target.dist.num_states != mdp.num_states
        || target.dist.num_actions != mdp.num_actions
    {
        return Err(Error::ShapeMismatch("target occupancy shape".into()));
    }
    target.validate()?;
    let occ = compute_occupancy(mdp, policy)?;
    Ok(occupancy_loss(&occ, target, div))
}
