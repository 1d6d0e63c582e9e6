//! Behavioral cloning: the empirical conditional action distribution on
//! visited states, the uniform distribution elsewhere.

use crate::expert::ExpertDataset;
use crate::mdp::{NonStationaryPolicy, SaTable};
use crate::{Error, Result};

pub fn bc_fit(
    dataset: &ExpertDataset,
    num_states: usize,
    num_actions: usize,
) -> Result<NonStationaryPolicy> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let h_max = dataset.horizon;
    let mut counts = SaTable::zeros(h_max, num_states, num_actions);
    for tr in &dataset.trajectories {
        for (h, &(s, a)) in tr.steps.iter().enumerate() {
            if s >= num_states || a >= num_actions {
                return Err(Error::ShapeMismatch(format!(
                    "trajectory state-action ({s}, {a}) out of range"
                )));
            }
            counts[(h, s, a)] += 1.0;
        }
    }
    let uniform = 1.0 / num_actions as f64;
    let mut probs = SaTable::zeros(h_max, num_states, num_actions);
    for h in 0..h_max {
        for s in 0..num_states {
            let visits: f64 = counts.row(h, s).iter().sum();
            let row = probs.row_mut(h, s);
            if visits > 0.0 {
                for (p, c) in row.iter_mut().zip(counts.row(h, s)) {
                    *p = c / visits;
                }
            } else {
                row.fill(uniform);
            }
        }
    }
    NonStationaryPolicy::new(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expert::collect;
    use crate::instance::make_fig2;
    use crate::mdp::{policy_value, Trajectory};
    use crate::metrics::imitation_gap;

    fn example_dataset() -> ExpertDataset {
        ExpertDataset::new(
            vec![
                Trajectory {
                    steps: vec![(0, 0), (0, 0)],
                },
                Trajectory {
                    steps: vec![(0, 0), (1, 0)],
                },
            ],
            0,
        )
        .unwrap()
    }

    #[test]
    fn bc_on_example_dataset() {
        let pi = bc_fit(&example_dataset(), 3, 2).unwrap();
        assert_eq!(pi.prob(0, 0, 0), 1.0);
        // Non-visited s2 at the first step gets the uniform policy.
        assert_eq!(pi.prob(0, 1, 0), 0.5);
        assert_eq!(pi.prob(0, 1, 1), 0.5);
        assert_eq!(pi.prob(1, 0, 0), 1.0);
        assert_eq!(pi.prob(1, 1, 0), 1.0);
    }

    #[test]
    fn bc_gap_on_example_is_half() {
        let inst = make_fig2().unwrap();
        let pi = bc_fit(&example_dataset(), 3, 2).unwrap();
        let report = imitation_gap(&inst, &pi).unwrap();
        assert!((report.gap - 0.5).abs() < 1e-12);
        assert!((policy_value(&inst.mdp, &pi).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn full_coverage_recovers_expert() {
        let inst = make_fig2().unwrap();
        // Enough rollouts to visit both good states at both steps.
        let data = collect(&inst, 64, 3).unwrap();
        let pi = bc_fit(&data, 3, 2).unwrap();
        for h in 0..2 {
            for s in 0..2 {
                assert_eq!(pi.prob(h, s, 0), 1.0);
            }
        }
    }
}
