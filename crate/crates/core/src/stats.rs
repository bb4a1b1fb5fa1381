//! Sample mean with its standard error.

/// Mean, standard error of the mean and sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl MeanEstimate {
    /// Two-pass estimate over `samples` in slice order. Empty input gives NaN mean.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { mean: f64::NAN, std_error: f64::NAN, n };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, std_error: 0.0, n };
        }
        let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
        let var = ss / (n - 1) as f64;
        Self { mean, std_error: libm::sqrt(var / n as f64), n }
    }
}

/// Empirical CDF evaluated at `points`: fraction of `samples` ≤ each point.
pub fn empirical_cdf(samples: &[f64], points: &[f64]) -> alloc::vec::Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    points
        .iter()
        .map(|&p| {
            let count = sorted.partition_point(|&x| x <= p);
            count as f64 / sorted.len().max(1) as f64
        })
        .collect()
}

/// Lower median (element at index `(n-1)/2` after sorting).
pub fn median(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.is_empty() {
        return f64::NAN;
    }
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_sample() {
        let e = MeanEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        // s² = 5/3, se = sqrt(5/12)
        assert!((e.std_error - libm::sqrt(5.0 / 12.0)).abs() < 1e-15);
        assert_eq!(e.n, 4);
    }

    #[test]
    fn degenerate_sizes() {
        assert!(MeanEstimate::from_samples(&[]).mean.is_nan());
        assert_eq!(MeanEstimate::from_samples(&[7.0]).std_error, 0.0);
    }

    #[test]
    fn cdf_and_median() {
        let s = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(empirical_cdf(&s, &[0.0, 2.0, 4.0]), alloc::vec![0.0, 0.5, 1.0]);
        assert_eq!(median(&s), 2.5);
        assert_eq!(median(&[5.0, 1.0, 3.0]), 3.0);
    }
}
