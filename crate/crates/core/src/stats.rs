//! Sample moments with standard errors.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMoments {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub se_mean: f64,
    /// From the fourth central moment:
    /// `Var(s^2) ~ (m4 - s^4 (n - 3) / (n - 1)) / n`.
    pub se_variance: f64,
    /// Delete-one jackknife over the samples.
    pub se_variance_jackknife: f64,
}

impl SampleMoments {
    /// Needs at least three samples for the jackknife; with two it is `NaN`.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        let variance = ss / (nf - 1.0);
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
        let var_s2 = (m4 - variance * variance * (nf - 3.0) / (nf - 1.0)) / nf;
        let se_variance = var_s2.max(0.0).sqrt();
        let se_variance_jackknife = if n >= 3 {
            // s^2 with x_i removed, in O(1) each.
            let loo: Vec<f64> = xs
                .iter()
                .map(|x| (ss - nf / (nf - 1.0) * (x - mean).powi(2)) / (nf - 2.0))
                .collect();
            let lm = loo.iter().sum::<f64>() / nf;
            ((nf - 1.0) / nf * loo.iter().map(|v| (v - lm).powi(2)).sum::<f64>()).sqrt()
        } else {
            f64::NAN
        };
        Self {
            n,
            mean,
            variance,
            se_mean: (variance / nf).sqrt(),
            se_variance,
            se_variance_jackknife,
        }
    }
}

/// Mean and standard error of a weighted sum of independent estimates.
pub fn combine_se(ses: &[f64]) -> f64 {
    ses.iter().map(|s| s * s).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_moments() {
        let s = SampleMoments::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((s.se_mean - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let xs: Vec<f64> = (0..30).map(|i| ((i * 7919) % 31) as f64 * 0.3).collect();
        let s = SampleMoments::from_samples(&xs);
        let n = xs.len() as f64;
        let loo: Vec<f64> = (0..xs.len())
            .map(|i| {
                let ys: Vec<f64> = xs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &x)| x).collect();
                SampleMoments::from_samples(&ys).variance
            })
            .collect();
        let lm = loo.iter().sum::<f64>() / n;
        let jk = ((n - 1.0) / n * loo.iter().map(|v| (v - lm).powi(2)).sum::<f64>()).sqrt();
        assert!((jk - s.se_variance_jackknife).abs() < 1e-12);
        // Both error estimates are of the same size for moderate n.
        assert!((s.se_variance / s.se_variance_jackknife - 1.0).abs() < 0.3);
    }
}
