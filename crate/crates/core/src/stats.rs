//! Order-robust summation and summary statistics.

/// Neumaier compensated sum; the result does not depend on accumulation
/// order beyond one rounding.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for n < 2.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss = compensated_sum(values.iter().map(|v| (v - m) * (v - m)));
    (ss / (values.len() as f64 - 1.0)).max(0.0).sqrt()
}

/// Standard error of the mean.
pub fn std_error(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    sample_std(values) / (values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_handles_cancellation() {
        let vals = [1e16, 1.0, -1e16];
        assert_eq!(compensated_sum(vals.iter().copied()), 1.0);
    }

    #[test]
    fn basic_moments() {
        let vals = [1.0, 2.0, 3.0, 4.0];
        assert!((mean(&vals) - 2.5).abs() < 1e-15);
        let expected_std = (5.0f64 / 3.0).sqrt();
        assert!((sample_std(&vals) - expected_std).abs() < 1e-15);
    }
}
