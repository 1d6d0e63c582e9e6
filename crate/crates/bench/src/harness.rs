//! Experiment harness: run learners across (N, H, seed) grids, persist raw
//! per-seed results, and aggregate deterministically.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use ail_core::expert::{collect, estimate_occupancy, estimation_error};
use ail_core::instance::{make_instance, InstanceKind, InstanceSpec, LabeledInstance};
use ail_core::learners::{matching_loss, run_learner, Divergence, LearnerConfig};
use ail_core::mdp::compute_occupancy;
use ail_core::metrics::imitation_gap;
use ail_core::seed::derive_seed;
use ail_core::stats::{mean, sample_std};

use crate::fmt::{csv_field, sig6};

/// Grid of experiment cells: every (learner, N, H) combination.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    /// Dataset sizes `N`.
    pub dataset_sizes: Vec<usize>,
    /// Horizons `H`.
    pub horizons: Vec<usize>,
    pub learners: Vec<LearnerConfig>,
    pub num_seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> ail_core::Result<()> {
        if self.num_seeds == 0
            || self.dataset_sizes.is_empty()
            || self.horizons.is_empty()
            || self.learners.is_empty()
        {
            return Err(ail_core::Error::InvalidSpec(
                "need at least one seed, dataset size, horizon and learner".into(),
            ));
        }
        Ok(())
    }
}

/// One per-seed result row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawRecord {
    pub instance: String,
    pub learner: String,
    pub n: usize,
    pub horizon: usize,
    pub seed: usize,
    pub gap: f64,
    pub loss: f64,
    pub est_error: f64,
    pub wall_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Per-cell aggregate over seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateRow {
    pub instance: String,
    pub learner: String,
    pub n: usize,
    pub horizon: usize,
    pub mean_gap: f64,
    pub std_gap: f64,
    pub mean_est_error: f64,
    pub mean_wall_ms: f64,
    pub failures: usize,
}

/// Builds the instance for one cell, rescaling the spec's horizon and (for
/// the reset-style hard family) its dataset-size parameter.
pub fn cell_instance(
    base: &InstanceSpec,
    horizon: usize,
    n: usize,
) -> ail_core::Result<LabeledInstance> {
    let mut spec = base.clone();
    spec.horizon = horizon;
    if spec.kind == InstanceKind::OfflineLowerBound {
        spec.num_expert_trajectories = Some(n);
    }
    make_instance(&spec)
}

/// Runs one (instance, learner, N, seed) work unit.
fn run_one(
    base: &InstanceSpec,
    learner: &LearnerConfig,
    n: usize,
    horizon: usize,
    seed_index: usize,
    cell_index: usize,
    base_seed: u64,
) -> RawRecord {
    let started = Instant::now();
    let mut record = RawRecord {
        instance: base.kind.as_str().to_string(),
        learner: learner.algo.as_str().to_string(),
        n,
        horizon,
        seed: seed_index,
        gap: f64::NAN,
        loss: f64::NAN,
        est_error: f64::NAN,
        wall_ms: 0.0,
        error: None,
    };
    let data_seed = derive_seed(base_seed, &[cell_index as u64, seed_index as u64, 0]);
    let learner_seed = derive_seed(base_seed, &[cell_index as u64, seed_index as u64, 1]);
    let outcome = (|| -> ail_core::Result<(f64, f64, f64)> {
        let inst = cell_instance(base, horizon, n)?;
        let dataset = collect(&inst, n, data_seed)?;
        let mut cfg = learner.clone();
        cfg.seed = learner_seed;
        let output = run_learner(&inst, &dataset, &cfg)?;
        let gap = imitation_gap(&inst, &output.policy)?.gap;
        let target = estimate_occupancy(&dataset, inst.mdp.num_states, inst.mdp.num_actions)?;
        let loss = matching_loss(&inst.mdp, &output.policy, &target, Divergence::L1)?;
        let expert_occ = compute_occupancy(&inst.mdp, &inst.expert)?;
        let est = estimation_error(&expert_occ, &target)?.total;
        Ok((gap, loss, est))
    })();
    match outcome {
        Ok((gap, loss, est)) => {
            record.gap = gap;
            record.loss = loss;
            record.est_error = est;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record.wall_ms = started.elapsed().as_secs_f64() * 1000.0;
    record
}

/// Worker-pool size from `AIL_LAB_THREADS` (0 or 1 = serial; unset = all
/// cores).
pub fn thread_cap() -> usize {
    std::env::var("AIL_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .map(|v| if v == 0 { 1 } else { v })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Runs every cell of the grid; raw results are ordered by (cell, seed)
/// regardless of scheduling, so output never depends on completion order.
pub fn run_experiment(
    config: &ExperimentConfig,
) -> ail_core::Result<(Vec<RawRecord>, Vec<AggregateRow>)> {
    config.validate()?;
    let mut work = Vec::new();
    let mut cell_index = 0usize;
    for learner in &config.learners {
        for &n in &config.dataset_sizes {
            for &h in &config.horizons {
                for seed_index in 0..config.num_seeds {
                    work.push((learner.clone(), n, h, seed_index, cell_index));
                }
                cell_index += 1;
            }
        }
    }

    let threads = thread_cap();
    let raw: Vec<RawRecord> = if threads <= 1 {
        work.iter()
            .map(|(l, n, h, s, c)| run_one(&config.instance, l, *n, *h, *s, *c, config.base_seed))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("worker pool");
        pool.install(|| {
            use rayon::prelude::*;
            work.par_iter()
                .map(|(l, n, h, s, c)| {
                    run_one(&config.instance, l, *n, *h, *s, *c, config.base_seed)
                })
                .collect()
        })
    };

    let mut aggregates = Vec::new();
    for chunk in raw.chunks(config.num_seeds) {
        let ok: Vec<&RawRecord> = chunk.iter().filter(|r| r.error.is_none()).collect();
        let gaps: Vec<f64> = ok.iter().map(|r| r.gap).collect();
        let ests: Vec<f64> = ok.iter().map(|r| r.est_error).collect();
        let walls: Vec<f64> = chunk.iter().map(|r| r.wall_ms).collect();
        let first = &chunk[0];
        aggregates.push(AggregateRow {
            instance: first.instance.clone(),
            learner: first.learner.clone(),
            n: first.n,
            horizon: first.horizon,
            mean_gap: mean(&gaps),
            std_gap: sample_std(&gaps),
            mean_est_error: mean(&ests),
            mean_wall_ms: mean(&walls),
            failures: chunk.len() - ok.len(),
        });
    }
    Ok((raw, aggregates))
}

pub fn write_raw_csv<W: Write>(mut w: W, raw: &[RawRecord]) -> std::io::Result<()> {
    writeln!(w, "instance,learner,N,H,seed,gap,loss,est_error,wall_ms")?;
    for r in raw {
        if r.error.is_some() {
            continue;
        }
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            csv_field(&r.instance),
            csv_field(&r.learner),
            r.n,
            r.horizon,
            r.seed,
            sig6(r.gap),
            sig6(r.loss),
            sig6(r.est_error),
            sig6(r.wall_ms)
        )?;
    }
    Ok(())
}

pub fn write_aggregate_csv<W: Write>(mut w: W, rows: &[AggregateRow]) -> std::io::Result<()> {
    writeln!(
        w,
        "instance,learner,N,H,mean_gap,std_gap,mean_est_error,mean_wall_ms,failures"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            csv_field(&r.instance),
            csv_field(&r.learner),
            r.n,
            r.horizon,
            sig6(r.mean_gap),
            sig6(r.std_gap),
            sig6(r.mean_est_error),
            sig6(r.mean_wall_ms),
            r.failures
        )?;
    }
    Ok(())
}
