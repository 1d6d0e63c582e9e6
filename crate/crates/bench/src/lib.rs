//! Reproducible experiment harness and command-line interface for the
//! tabular imitation-learning laboratory.

pub mod cli;
pub mod fmt;
pub mod harness;
pub mod tables;
