//! Tabular imitation-learning laboratory.
//!
//! This crate implements finite episodic MDPs with exact occupancy-measure
//! computation, the MDP families used to study occupancy matching (reachable
//! bad absorbing states, isolated absorbing states, reset-style offline
//! hard instances), expert data collection and estimation-error statistics,
//! and a set of imitation learners: behavioral cloning, total-variation
//! occupancy matching solved either by an online-gradient-descent game or
//! exactly by linear programming, closed-form solvers for isolated-absorbing
//! instances, and l2/linf/JS divergence variants of the matching game.

// Index loops are the clearer form for the dense kernels and the
// witness-reporting validators here.
#![allow(clippy::needless_range_loop)]

pub mod expert;
pub mod instance;
pub mod learners;
pub mod mdp;
pub mod metrics;
pub mod risk;
pub mod seed;
pub mod stats;

pub use expert::ExpertDataset;
pub use instance::{InstanceKind, InstanceMetadata, InstanceSpec, LabeledInstance};
pub use mdp::{
    NonStationaryPolicy, OccupancyMeasure, SaTable, TabularMDP, Trajectory, TransitionKernel,
};

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("lp solver did not converge after {iterations} pivots")]
    LpDidNotConverge { iterations: usize },

    #[error("lp infeasible: {0}")]
    LpInfeasible(String),

    #[error("operation not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
