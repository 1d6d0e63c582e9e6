//! Imitation learners: behavioral cloning, occupancy matching via the
//! online-gradient-descent game or exact linear programming, closed-form
//! solvers for isolated-absorbing instances, and divergence variants.

pub mod bc;
pub mod iso;
pub mod loss;
pub mod lp;
pub mod ogd;
pub mod simplex;

pub use bc::bc_fit;
pub use iso::{isolated_absorbing_solve, IsoTieRule};
pub use loss::{matching_loss, occupancy_loss, Divergence};
pub use lp::{policy_from_occupancy, tvail_lp};
pub use ogd::{
    adaptive_step, tv_diameter, tvail_ogd, variant_game, Discriminator, DiscriminatorMode, DualSet,
    GameTrace, StepRule,
};

use serde::{Deserialize, Serialize};

use crate::expert::{estimate_occupancy, ExpertDataset};
use crate::instance::LabeledInstance;
use crate::mdp::NonStationaryPolicy;
use crate::{Error, Result};

/// Which learner to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Bc,
    TvailOgd,
    TvailLp,
    Fem,
    Gtal,
    Gail,
    IsoClosedForm,
    /// Identity baseline: returns the instance's expert policy.
    Expert,
}

impl Algo {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algo::Bc => "bc",
            Algo::TvailOgd => "tvail_ogd",
            Algo::TvailLp => "tvail_lp",
            Algo::Fem => "fem",
            Algo::Gtal => "gtal",
            Algo::Gail => "gail",
            Algo::IsoClosedForm => "iso_closed_form",
            Algo::Expert => "expert",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepRuleName {
    #[default]
    Adaptive,
    Constant,
}

fn default_iters() -> usize {
    5000
}

/// Learner configuration block, shared by the CLI and the experiment
/// harness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub algo: Algo,
    #[serde(rename = "T", default = "default_iters")]
    pub iterations: usize,
    #[serde(default)]
    pub step_rule: StepRuleName,
    /// Fixed step for the constant rule; when absent the analyzed constant
    /// `sqrt(|S||A| / (8 T))` is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_const: Option<f64>,
    /// Discriminator iterate handling for the game learners; when absent,
    /// each algorithm uses its table-calibrated default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discriminator_mode: Option<DiscriminatorMode>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tie_rule: IsoTieRule,
    /// Replace the last-step policy with behavioral cloning's, removing
    /// the matching game's freedom at the final step.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub override_last_step_with_bc: bool,
}

impl LearnerConfig {
    pub fn new(algo: Algo) -> Self {
        LearnerConfig {
            algo,
            iterations: default_iters(),
            step_rule: StepRuleName::Adaptive,
            step_const: None,
            discriminator_mode: None,
            seed: 0,
            tie_rule: IsoTieRule::UniformRandom,
            override_last_step_with_bc: false,
        }
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tie_rule(mut self, tie_rule: IsoTieRule) -> Self {
        self.tie_rule = tie_rule;
        self
    }

    /// The discriminator mode in effect: explicit override, otherwise the
    /// calibrated default for the algorithm (the l2 game keeps its ball
    /// projection; the l1 and linf games run unconstrained).
    pub fn resolved_mode(&self) -> DiscriminatorMode {
        self.discriminator_mode.unwrap_or(match self.algo {
            Algo::Fem => DiscriminatorMode::Projected,
            _ => DiscriminatorMode::Unconstrained,
        })
    }

    pub fn resolved_step_rule(&self) -> StepRule {
        match (self.step_rule, self.step_const) {
            (StepRuleName::Adaptive, _) => StepRule::Adaptive,
            (StepRuleName::Constant, Some(c)) => StepRule::Constant(c),
            (StepRuleName::Constant, None) => StepRule::AnalyzedConstant,
        }
    }
}

/// Output of a learner run: the policy plus the game trace when the
/// learner is iterative.
#[derive(Debug, Clone)]
pub struct LearnerOutput {
    pub policy: NonStationaryPolicy,
    pub trace: Option<GameTrace>,
}

/// Trains the configured learner on `(instance, dataset)`.
pub fn run_learner(
    inst: &LabeledInstance,
    dataset: &ExpertDataset,
    config: &LearnerConfig,
) -> Result<LearnerOutput> {
    let mdp = &inst.mdp;
    if dataset.horizon != mdp.horizon {
        return Err(Error::ShapeMismatch(
            "dataset horizon differs from the mdp".into(),
        ));
    }
    let target = estimate_occupancy(dataset, mdp.num_states, mdp.num_actions)?;
    let mut out = match config.algo {
        Algo::Bc => LearnerOutput {
            policy: bc_fit(dataset, mdp.num_states, mdp.num_actions)?,
            trace: None,
        },
        Algo::TvailOgd => {
            let (policy, trace) = tvail_ogd(
                mdp,
                &target,
                config.iterations,
                config.resolved_step_rule(),
                config.resolved_mode(),
                config.seed,
            )?;
            LearnerOutput {
                policy,
                trace: Some(trace),
            }
        }
        Algo::TvailLp => {
            let (policy, _optimal) = tvail_lp(mdp, &target)?;
            LearnerOutput {
                policy,
                trace: None,
            }
        }
        Algo::Fem | Algo::Gtal | Algo::Gail => {
            let divergence = match config.algo {
                Algo::Fem => Divergence::L2,
                Algo::Gtal => Divergence::LInf,
                _ => Divergence::Js,
            };
            let (policy, trace) = variant_game(
                mdp,
                &target,
                divergence,
                config.iterations,
                config.resolved_mode(),
                config.seed,
            )?;
            LearnerOutput {
                policy,
                trace: Some(trace),
            }
        }
        Algo::IsoClosedForm => LearnerOutput {
            policy: isolated_absorbing_solve(inst, &target, config.tie_rule, config.seed)?,
            trace: None,
        },
        Algo::Expert => LearnerOutput {
            policy: inst.expert.clone(),
            trace: None,
        },
    };
    if config.override_last_step_with_bc && config.algo != Algo::Bc {
        let bc = bc_fit(dataset, mdp.num_states, mdp.num_actions)?;
        let last = mdp.horizon - 1;
        for s in 0..mdp.num_states {
            for a in 0..mdp.num_actions {
                out.policy.probs[(last, s, a)] = bc.probs[(last, s, a)];
            }
        }
    }
    Ok(out)
}
