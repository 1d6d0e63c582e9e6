//! Expert data collection, empirical occupancy estimation, and
//! estimation-error statistics.

use serde::{Deserialize, Serialize};

use crate::instance::LabeledInstance;
use crate::mdp::{rollout, OccupancyMeasure, SaTable, Trajectory};
use crate::{Error, Result};

/// `N` expert trajectories of equal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertDataset {
    pub horizon: usize,
    pub trajectories: Vec<Trajectory>,
    #[serde(rename = "seed")]
    pub source_seed: u64,
}

impl ExpertDataset {
    pub fn new(trajectories: Vec<Trajectory>, source_seed: u64) -> Result<Self> {
        let horizon = trajectories.first().map_or(0, |t| t.steps.len());
        if horizon == 0 || trajectories.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if trajectories.iter().any(|t| t.steps.len() != horizon) {
            return Err(Error::ShapeMismatch(
                "trajectories have unequal lengths".into(),
            ));
        }
        Ok(ExpertDataset {
            horizon,
            trajectories,
            source_seed,
        })
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }
}

/// Rolls out the instance's expert policy `n` times.
pub fn collect(inst: &LabeledInstance, n: usize, seed: u64) -> Result<ExpertDataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let trajectories = rollout(&inst.mdp, &inst.expert, seed, n)?;
    ExpertDataset::new(trajectories, seed)
}

/// Empirical occupancy `d_h(s, a) = (count of trajectories at (s, a) in
/// step h) / N`. Each step sums to exactly one.
pub fn estimate_occupancy(
    dataset: &ExpertDataset,
    num_states: usize,
    num_actions: usize,
) -> Result<OccupancyMeasure> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = dataset.len() as f64;
    let mut dist = SaTable::zeros(dataset.horizon, num_states, num_actions);
    for tr in &dataset.trajectories {
        for (h, &(s, a)) in tr.steps.iter().enumerate() {
            if s >= num_states || a >= num_actions {
                return Err(Error::ShapeMismatch(format!(
                    "trajectory state-action ({s}, {a}) out of range"
                )));
            }
            dist[(h, s, a)] += 1.0;
        }
    }
    for x in dist.as_mut_slice() {
        *x /= n;
    }
    OccupancyMeasure::new(dist)
}

/// Per-step and total l1 distances between two occupancy measures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimationError {
    pub per_step: Vec<f64>,
    pub total: f64,
}

/// `sum_h sum_{s,a} |true_h(s,a) - est_h(s,a)|`, reported per step and in
/// total.
pub fn estimation_error(
    true_occ: &OccupancyMeasure,
    est: &OccupancyMeasure,
) -> Result<EstimationError> {
    if !true_occ.dist.same_shape(&est.dist) {
        return Err(Error::ShapeMismatch("occupancy shapes differ".into()));
    }
    let per_step: Vec<f64> = (0..true_occ.dist.horizon)
        .map(|h| {
            true_occ
                .dist
                .step(h)
                .iter()
                .zip(est.dist.step(h))
                .map(|(x, y)| (x - y).abs())
                .sum()
        })
        .collect();
    let total = crate::stats::compensated_sum(per_step.iter().copied());
    Ok(EstimationError { per_step, total })
}
