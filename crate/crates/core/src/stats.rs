//! Small statistical toolkit for the Monte Carlo experiments.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::statistics::{Data, OrderStatistics, RankTieBreaker};

use crate::error::{Error, Result};

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub fn mean_estimate(xs: &[f64]) -> MeanEstimate {
    let n = xs.len();
    if n == 0 {
        return MeanEstimate {
            mean: f64::NAN,
            std_error: f64::NAN,
            samples: 0,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    MeanEstimate {
        mean,
        std_error: (var / n as f64).sqrt(),
        samples: n,
    }
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() || a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::Numerical("KS test needs non-empty samples without NaN".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (m, n) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    let lambda = d * (m * n / (m + n)).sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(lambda).clamp(0.0, 1.0),
    })
}

/// `P(K > x)` for the Kolmogorov distribution.
fn kolmogorov_survival(x: f64) -> f64 {
    use std::f64::consts::PI;
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // theta-function form, fast for small x
        let q = (-PI * PI / (8.0 * x * x)).exp();
        let cdf = (2.0 * PI).sqrt() / x * (q + q.powi(9) + q.powi(25) + q.powi(49));
        return 1.0 - cdf;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = f64::from(k);
        let term = (-2.0 * k * k * x * x).exp();
        sum += if k as u32 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    2.0 * sum
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation with a one-sided test for a negative trend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendTest {
    pub rho: f64,
    /// `rho * sqrt(N - 1)`, approximately standard normal under independence.
    pub z: f64,
    /// `P(Z <= z)`.
    pub p_negative: f64,
    pub samples: usize,
}

/// Spearman rank correlation, ties sharing their average rank.
pub fn rank_correlation(x: &[f64], y: &[f64]) -> f64 {
    let rx = Data::new(x.to_vec()).ranks(RankTieBreaker::Average);
    let ry = Data::new(y.to_vec()).ranks(RankTieBreaker::Average);
    pearson(&rx, &ry)
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<TrendTest> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Domain("Spearman needs two samples of equal length >= 3".into()));
    }
    let rho = rank_correlation(x, y);
    let z = rho * ((x.len() - 1) as f64).sqrt();
    let normal = Normal::standard();
    Ok(TrendTest {
        rho,
        z,
        p_negative: normal.cdf(z),
        samples: x.len(),
    })
}

/// Wilson score interval for a binomial proportion at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mean_and_error() {
        let e = mean_estimate(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert_abs_diff_eq!(e.std_error, (5.0f64 / 3.0 / 4.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // P(K > 1.36) ~ 0.0494, P(K > 0.5) ~ 0.9639
        assert!((kolmogorov_survival(1.36) - 0.04946).abs() < 1e-4);
        assert!((kolmogorov_survival(0.5) - 0.96394).abs() < 1e-4);
        assert!((kolmogorov_survival(0.99999) - kolmogorov_survival(1.00001)).abs() < 1e-4);
        let same = ks_two_sample(&[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!((same.statistic, same.p_value), (0.0, 1.0));
    }

    #[test]
    fn ks_detects_shift() {
        let a: Vec<f64> = (0..500).map(|k| k as f64 / 500.0).collect();
        let same: Vec<f64> = (0..400).map(|k| (k as f64 + 0.5) / 400.0).collect();
        let shifted: Vec<f64> = a.iter().map(|x| x + 0.3).collect();
        assert!(ks_two_sample(&a, &same).unwrap().p_value > 0.5);
        let r = ks_two_sample(&a, &shifted).unwrap();
        assert_abs_diff_eq!(r.statistic, 0.3, epsilon = 1e-2);
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn spearman_perfect_trends() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let down = [9.0, 7.0, 4.0, 2.0, 1.0];
        let t = spearman(&x, &down).unwrap();
        assert_abs_diff_eq!(t.rho, -1.0, epsilon = 1e-15);
        assert!(t.p_negative < 0.05);
        assert!(spearman(&x, &x).unwrap().p_negative > 0.95);
        // ties get average ranks
        let tied = spearman(&[1.0, 1.0, 2.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!(tied.rho < 0.0);
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5);
        assert_abs_diff_eq!(lo, 0.4038, epsilon = 1e-3);
        assert_eq!(wilson_interval(0, 0, 1.96), (0.0, 1.0));
    }
}
