//! Monte-Carlo studies of the l1 risk of the empirical multinomial
//! estimator, including the missing-mass construction that forces a
//! constant lower bound in the small-sample regime.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::seed::derive_seed;
use crate::stats::{compensated_sum, std_error};
use crate::{Error, Result};

/// Which multinomial to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskDistribution {
    /// `|X| - 1` symbols of mass `1/(|X|+1)` and one symbol of mass
    /// `2/(|X|+1)`; most symbols stay unseen when `N <~ |X|`.
    MissingMass,
    Uniform,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultinomialRiskReport {
    pub support_size: usize,
    pub sample_size: usize,
    pub replications: usize,
    pub distribution: RiskDistribution,
    pub mean_l1_risk: f64,
    pub std_error: f64,
}

fn weights(dist: RiskDistribution, support: usize) -> Vec<f64> {
    match dist {
        RiskDistribution::Uniform => vec![1.0 / support as f64; support],
        RiskDistribution::MissingMass => {
            let mut w = vec![1.0 / (support as f64 + 1.0); support];
            w[support - 1] = 1.0 - (support as f64 - 1.0) / (support as f64 + 1.0);
            w
        }
    }
}

/// Monte-Carlo estimate of `E || Q - Q_hat ||_1` for the count estimator
/// over `replications` independent datasets of `sample_size` draws.
pub fn l1_risk_study(
    support: usize,
    sample_size: usize,
    distribution: RiskDistribution,
    replications: usize,
    seed: u64,
) -> Result<MultinomialRiskReport> {
    if support == 0 || sample_size == 0 || replications == 0 {
        return Err(Error::InvalidSpec(
            "support, sample size and replications must be positive".into(),
        ));
    }
    let q = weights(distribution, support);
    let cumulative: Vec<f64> = q
        .iter()
        .scan(0.0, |acc, &w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let mut risks = Vec::with_capacity(replications);
    let mut counts = vec![0u64; support];
    for rep in 0..replications {
        let mut rng = StdRng::seed_from_u64(derive_seed(seed, &[rep as u64]));
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..sample_size {
            let u: f64 = rng.gen();
            let i = cumulative.partition_point(|&c| c <= u).min(support - 1);
            counts[i] += 1;
        }
        let risk = compensated_sum(
            counts
                .iter()
                .zip(&q)
                .map(|(&c, &w)| (c as f64 / sample_size as f64 - w).abs()),
        );
        risks.push(risk);
    }
    Ok(MultinomialRiskReport {
        support_size: support,
        sample_size,
        replications,
        distribution,
        mean_l1_risk: compensated_sum(risks.iter().copied()) / replications as f64,
        std_error: std_error(&risks),
    })
}

/// Analytic small-sample lower bound `1 / (3 e^c)` for the missing-mass
/// construction at `N = c |X|`.
pub fn missing_mass_lower_bound(c: f64) -> f64 {
    1.0 / (3.0 * c.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_has_zero_risk() {
        let report = l1_risk_study(1, 50, RiskDistribution::Uniform, 120, 3).unwrap();
        assert_eq!(report.mean_l1_risk, 0.0);
    }

    #[test]
    fn missing_mass_risk_beats_analytic_bound() {
        let report = l1_risk_study(1000, 100, RiskDistribution::MissingMass, 200, 11).unwrap();
        assert!(report.mean_l1_risk >= missing_mass_lower_bound(0.1));
        assert!(report.mean_l1_risk <= 2.0);
    }

    #[test]
    fn missing_mass_bound_holds_across_sampling_ratios() {
        for (c, support) in [(0.1, 200usize), (0.5, 200), (1.0, 200)] {
            let n = (c * support as f64).round() as usize;
            let report = l1_risk_study(support, n, RiskDistribution::MissingMass, 300, 7).unwrap();
            assert!(
                report.mean_l1_risk >= missing_mass_lower_bound(c),
                "c={c} mean={}",
                report.mean_l1_risk
            );
        }
    }

    #[test]
    fn uniform_large_sample_risk_is_small() {
        let report = l1_risk_study(10, 1_000_000, RiskDistribution::Uniform, 100, 5).unwrap();
        let bound = 2.0 * (10.0f64 / 1_000_000.0).sqrt();
        assert!(report.mean_l1_risk <= bound, "{}", report.mean_l1_risk);
    }

    #[test]
    fn replication_aggregate_is_order_independent() {
        let a = l1_risk_study(50, 20, RiskDistribution::MissingMass, 150, 9).unwrap();
        let b = l1_risk_study(50, 20, RiskDistribution::MissingMass, 150, 9).unwrap();
        assert_eq!(a.mean_l1_risk, b.mean_l1_risk);
        assert_eq!(a.std_error, b.std_error);
    }
}
