//! Monte Carlo harnesses combining walks, chains, flows and measures.
//!
//! Every experiment is deterministic given its seed: replica `r` draws from
//! its own ChaCha stream and results are gathered in replica order.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfplane::SlitChain;
use crate::loewner::{
    capacity_estimate, hull_interval, interval_hausdorff, piecewise_reverse_at, solve_reverse,
    DriverFunction,
};
use crate::measure::path_distance_from;
use crate::parallel::{par_map, try_par_map};
use crate::stats::{ks_two_sample, rank_correlation, spearman, KsResult, TrendTest};
use crate::walk::{replica_rng, sample_walk_stream, IncrementLaw, WalkPath};

/// Real number formatted with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// `exp(2 N^2 t) - 1`, the Gronwall factor for flows on `Im z >= 1/N`.
pub fn gronwall_factor(big_n: f64, t: f64) -> f64 {
    (2.0 * big_n * big_n * t).exp_m1()
}

// ---------------------------------------------------------------------------
// Discrete versus continuous flows

/// Parameters of [`convergence_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub law: IncrementLaw,
    /// Horizon `t`.
    pub t: f64,
    /// Increasing walk scales.
    pub n_list: Vec<u32>,
    pub seed: u64,
    /// Independent walk realisations (streams `0..replicas`).
    pub replicas: usize,
    /// Height of the comparison grid is `1/big_n`.
    pub big_n: f64,
    /// Number of grid times in `(0, t]`.
    pub times: usize,
    /// Points on the comparison line.
    pub points: usize,
    /// Half-width of the comparison line beyond the driver range.
    pub margin: f64,
    pub tol: f64,
}

impl ConvergenceConfig {
    pub fn new(law: IncrementLaw, t: f64, n_list: Vec<u32>, seed: u64) -> Self {
        Self {
            law,
            t,
            n_list,
            seed,
            replicas: 1,
            big_n: 2.0,
            times: 4,
            points: 41,
            margin: 4.0,
            tol: 1e-9,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || self.n_list.is_empty() || self.times == 0 || self.points < 2 {
            return Err(Error::Config("convergence sweep needs t > 0, scales, times and points".into()));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n_list must be strictly increasing".into()));
        }
        if !(self.big_n > 0.0) || !(self.tol > 0.0) {
            return Err(Error::Config("grid height and tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub replica: usize,
    pub n: u32,
    /// Path distance between the step-driver and linear-driver map paths.
    pub path_distance: f64,
    /// Largest `|f_n - f|` on the comparison grid over all grid times.
    pub sup_distance: f64,
    /// Largest endpoint gap over all grid times.
    pub endpoint_gap: f64,
    /// Modulus of continuity `rho(n, t; S_n)`.
    pub modulus: f64,
    /// `(exp(2 N^2 t) - 1) * modulus`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: ConvergenceConfig,
    pub rows: Vec<ConvergenceRow>,
    /// Spearman trend of distance against `n` (None for fewer than 3 rows).
    pub trend: Option<TrendTest>,
    pub bound_violations: usize,
}

fn compare_flows(cfg: &ConvergenceConfig, walk: &WalkPath) -> Result<(f64, f64, f64)> {
    let t = cfg.t;
    let driver = DriverFunction::interpolated(walk);
    let n = f64::from(walk.n());
    let (lo, hi) = driver.range(t);
    let a = 1.0 / cfg.big_n;
    let zs: Vec<Complex64> = (0..cfg.points)
        .map(|i| {
            let x = lo - cfg.margin + (hi - lo + 2.0 * cfg.margin) * i as f64 / (cfg.points - 1) as f64;
            Complex64::new(x, a)
        })
        .collect();
    let mut times = vec![0.0];
    let mut dists = vec![0.0];
    let (mut sup_all, mut gap_all) = (0.0f64, 0.0f64);
    for k in 1..=cfg.times {
        let tau = t * k as f64 / cfg.times as f64;
        let mut sup = 0.0f64;
        for &z in &zs {
            let discrete = piecewise_reverse_at(walk, z, tau, tau)?;
            let continuous = solve_reverse(&driver, z, tau, cfg.tol)?;
            sup = sup.max((discrete - continuous).norm());
        }
        let steps = tau * n;
        let discrete_ends = if (steps - steps.round()).abs() < 1e-9 {
            walk.to_chain()
                .prefix(steps.round() as usize)
                .hull_endpoints()
                .unwrap_or((0.0, 0.0))
        } else {
            hull_interval(&DriverFunction::piecewise_constant(walk), tau, cfg.tol)?
        };
        let continuous_ends = hull_interval(&driver, tau, cfg.tol)?;
        let gap = interval_hausdorff(discrete_ends, continuous_ends);
        times.push(tau);
        dists.push(sup + gap);
        sup_all = sup_all.max(sup);
        gap_all = gap_all.max(gap);
    }
    Ok((path_distance_from(&times, &dists), sup_all, gap_all))
}

/// For each scale `n` and replica, compare the map path of the step-driven
/// flow (exact slit compositions) with that of the linearly interpolated
/// driver (ODE), on the line `Im z = 1/N`.
pub fn convergence_sweep(cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let jobs: Vec<(usize, u32)> = (0..cfg.replicas)
        .flat_map(|r| cfg.n_list.iter().map(move |&n| (r, n)))
        .collect();
    let rows = try_par_map(jobs.len(), |i| {
        let (replica, n) = jobs[i];
        let m = (cfg.t * f64::from(n)).ceil() as usize;
        let walk = sample_walk_stream(&cfg.law, n, m, cfg.seed, replica as u64)?;
        let (path_distance, sup_distance, endpoint_gap) = compare_flows(cfg, &walk)?;
        let modulus = walk.modulus_of_continuity(cfg.t, 1.0 / f64::from(n))?;
        Ok::<_, Error>(ConvergenceRow {
            replica,
            n,
            path_distance,
            sup_distance,
            endpoint_gap,
            modulus,
            bound: gronwall_factor(cfg.big_n, cfg.t) * modulus,
        })
    })?;
    let trend = if rows.len() >= 3 {
        let ns: Vec<f64> = rows.iter().map(|r| f64::from(r.n)).collect();
        let ds: Vec<f64> = rows.iter().map(|r| r.path_distance).collect();
        Some(spearman(&ns, &ds)?)
    } else {
        None
    };
    let bound_violations = rows
        .iter()
        .filter(|r| r.sup_distance > r.bound + 10.0 * cfg.tol)
        .count();
    Ok(ConvergenceReport {
        config: cfg.clone(),
        rows,
        trend,
        bound_violations,
    })
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("replica,n,path_distance,sup_distance,endpoint_gap,modulus,bound\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.replica,
                r.n,
                fmt_real(r.path_distance),
                fmt_real(r.sup_distance),
                fmt_real(r.endpoint_gap),
                fmt_real(r.modulus),
                fmt_real(r.bound)
            );
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Scalar summaries of chain maps

/// Scalar features of a chain map used in distributional comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapSummary {
    pub capacity: f64,
    /// `A_f` of the chain.
    pub left: f64,
    /// `B_f - A_f`.
    pub width: f64,
    pub tip_re: f64,
    pub tip_im: f64,
}

/// Radius used for capacity fits in the summaries.
pub const SUMMARY_RADIUS: f64 = 1e3;

pub fn summarize(chain: &SlitChain) -> MapSummary {
    let (left, right) = chain.hull_endpoints().unwrap_or((0.0, 0.0));
    let tip = if chain.is_empty() {
        Complex64::new(0.0, 0.0)
    } else {
        chain.tip(chain.len() - 1)
    };
    MapSummary {
        capacity: capacity_estimate(|z| chain.eval(z), SUMMARY_RADIUS),
        left,
        width: right - left,
        tip_re: tip.re,
        tip_im: tip.im,
    }
}

/// KS comparison of one summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTest {
    pub summary: String,
    pub ks: KsResult,
}

/// Correlation of two summaries that should be independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceCheck {
    pub pair: String,
    pub correlation: f64,
    /// `1 / sqrt(N - 1)`.
    pub std_error: f64,
    pub within_three_se: bool,
}

/// Outcome of a two-sample distributional test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub test: String,
    pub replicas: usize,
    pub seed: u64,
    pub summaries: Vec<SummaryTest>,
    pub independence: Vec<IndependenceCheck>,
}

/// KS acceptance level for distributional tests.
pub const KS_LEVEL: f64 = 0.01;

impl DistributionReport {
    pub fn min_p_value(&self) -> f64 {
        self.summaries
            .iter()
            .map(|s| s.ks.p_value)
            .fold(1.0, f64::min)
    }

    pub fn passes(&self) -> bool {
        self.min_p_value() > KS_LEVEL && self.independence.iter().all(|c| c.within_three_se)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("test,summary,statistic,p_value\n");
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.test,
                s.summary,
                fmt_real(s.ks.statistic),
                fmt_real(s.ks.p_value)
            );
        }
        for c in &self.independence {
            let _ = writeln!(
                out,
                "{},corr:{},{},{}",
                self.test,
                c.pair,
                fmt_real(c.correlation),
                fmt_real(c.std_error)
            );
        }
        out
    }
}

fn ks_summary(name: &str, a: &[f64], b: &[f64]) -> Result<SummaryTest> {
    // a constant summary on both sides carries no information and is equal
    let ks = if a.iter().chain(b).all(|x| *x == a[0]) {
        KsResult {
            statistic: 0.0,
            p_value: 1.0,
        }
    } else {
        ks_two_sample(a, b)?
    };
    Ok(SummaryTest {
        summary: name.to_string(),
        ks,
    })
}

/// Rank correlation, whose null law does not depend on the tails of the
/// summaries; its standard error under independence is `1 / sqrt(N - 1)`.
fn independence(pair: &str, x: &[f64], y: &[f64]) -> IndependenceCheck {
    let correlation = rank_correlation(x, y);
    let std_error = 1.0 / ((x.len() - 1) as f64).sqrt();
    IndependenceCheck {
        pair: pair.to_string(),
        correlation,
        std_error,
        within_three_se: correlation.abs() <= 3.0 * std_error,
    }
}

/// Parameters of the distributional tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionConfig {
    pub law: IncrementLaw,
    pub n: u32,
    pub replicas: usize,
    pub seed: u64,
}

/// Shift identity in law: the increment `H~(m, m+k)` (chain over
/// `S(j) - S(m)`) is compared with an independent `D(k)`; `H~` is also
/// checked for correlation with summaries of `D(m+1)`.
pub fn stationarity_test(cfg: &DistributionConfig, m: usize, k: usize) -> Result<DistributionReport> {
    if cfg.replicas < 2 {
        return Err(Error::Config("distributional tests need at least 2 replicas".into()));
    }
    let samples = try_par_map(cfg.replicas, |r| {
        let walk = sample_walk_stream(&cfg.law, cfg.n, m + k + 1, cfg.seed, 2 * r as u64)?;
        let chain = walk.to_chain();
        let incr = chain.increment(m, k)?;
        let fresh = sample_walk_stream(&cfg.law, cfg.n, k, cfg.seed, 2 * r as u64 + 1)?.to_chain();
        let past = chain.prefix(m + 1);
        Ok::<_, Error>((summarize(&incr), summarize(&fresh), summarize(&past)))
    })?;
    let pick = |f: &dyn Fn(&MapSummary) -> f64, side: usize| -> Vec<f64> {
        samples
            .iter()
            .map(|s| match side {
                0 => f(&s.0),
                1 => f(&s.1),
                _ => f(&s.2),
            })
            .collect()
    };
    let cap = |s: &MapSummary| s.capacity;
    let width = |s: &MapSummary| s.width;
    let tip = |s: &MapSummary| s.tip_im;
    let summaries = vec![
        ks_summary("capacity", &pick(&cap, 0), &pick(&cap, 1))?,
        ks_summary("width", &pick(&width, 0), &pick(&width, 1))?,
        ks_summary("tip_im", &pick(&tip, 0), &pick(&tip, 1))?,
    ];
    let independence = if k == 0 {
        Vec::new()
    } else {
        vec![
            independence("width", &pick(&width, 2), &pick(&width, 0)),
            independence("tip_im", &pick(&tip, 2), &pick(&tip, 0)),
        ]
    };
    Ok(DistributionReport {
        test: "stationarity".into(),
        replicas: cfg.replicas,
        seed: cfg.seed,
        summaries,
        independence,
    })
}

/// Reflection symmetry in law: `D(m)` against `chi o D(m) o chi` (the chain
/// driven by `-S`) built from an independent walk. Sign-sensitive summaries
/// compare a sample with the mirror of the other.
pub fn reflection_test(cfg: &DistributionConfig, m: usize) -> Result<DistributionReport> {
    if !cfg.law.is_symmetric() {
        return Err(Error::Config("reflection test needs a symmetric increment law".into()));
    }
    if cfg.replicas < 2 {
        return Err(Error::Config("distributional tests need at least 2 replicas".into()));
    }
    let samples = try_par_map(cfg.replicas, |r| {
        let a = sample_walk_stream(&cfg.law, cfg.n, m, cfg.seed, 2 * r as u64)?.to_chain();
        let b = sample_walk_stream(&cfg.law, cfg.n, m, cfg.seed, 2 * r as u64 + 1)?.to_chain();
        Ok::<_, Error>((summarize(&a), summarize(&b.reflected())))
    })?;
    let col = |f: &dyn Fn(&MapSummary) -> f64, reflected: bool| -> Vec<f64> {
        samples
            .iter()
            .map(|(a, b)| if reflected { f(b) } else { f(a) })
            .collect()
    };
    let summaries = vec![
        ks_summary("tip_im", &col(&|s| s.tip_im, false), &col(&|s| s.tip_im, true))?,
        ks_summary("tip_re", &col(&|s| s.tip_re, false), &col(&|s| s.tip_re, true))?,
        ks_summary("left", &col(&|s| s.left, false), &col(&|s| s.left, true))?,
        ks_summary("width", &col(&|s| s.width, false), &col(&|s| s.width, true))?,
    ];
    Ok(DistributionReport {
        test: "reflection".into(),
        replicas: cfg.replicas,
        seed: cfg.seed,
        summaries,
        independence: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// Continuity bounds

/// Largest `sup |psi - phi|` for which the hull intervals at time `t` are
/// guaranteed to be within `delta`.
pub fn continuity_threshold(t: f64, delta: f64) -> f64 {
    let second = (2.0 / 3.0) * delta / (9.0 * t / (2.0 * delta * delta)).exp_m1();
    (delta / 3.0).min(second)
}

/// A driver pair to be compared.
#[derive(Debug, Clone)]
pub struct DriverPair {
    pub psi: DriverFunction,
    pub phi: DriverFunction,
}

/// Result of a continuity sweep at one `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub t: f64,
    pub delta: f64,
    pub threshold: f64,
    pub checked: usize,
    /// Pairs skipped because their driver distance exceeded the threshold.
    pub inadmissible: usize,
    pub violations: usize,
    /// Largest Hausdorff distance among admissible pairs.
    pub max_distance: f64,
}

/// Check the hull-interval continuity bound for every admissible pair.
pub fn continuity_bound_sweep(pairs: &[DriverPair], t: f64, delta: f64, tol: f64) -> Result<ContinuityReport> {
    if !(delta > 0.0) || !(t > 0.0) {
        return Err(Error::Config("continuity sweep needs t > 0 and delta > 0".into()));
    }
    let threshold = continuity_threshold(t, delta);
    let results = try_par_map(pairs.len(), |i| {
        let p = &pairs[i];
        if p.psi.sup_distance(&p.phi, t) >= threshold {
            return Ok::<_, Error>(None);
        }
        let a = hull_interval(&p.psi, t, tol)?;
        let b = hull_interval(&p.phi, t, tol)?;
        Ok(Some(interval_hausdorff(a, b)))
    })?;
    let distances: Vec<f64> = results.iter().flatten().copied().collect();
    Ok(ContinuityReport {
        t,
        delta,
        threshold,
        checked: distances.len(),
        inadmissible: results.len() - distances.len(),
        violations: distances.iter().filter(|d| **d > delta).count(),
        max_distance: distances.iter().copied().fold(0.0, f64::max),
    })
}

/// Random admissible pairs: `psi` is a linearly interpolated Gaussian walk on
/// `[0, t]` and `phi = psi + eta` with a smooth perturbation of sup norm
/// `scale * threshold` (or `scale * amplitude` when `amplitude` is given).
pub fn random_driver_pairs(count: usize, t: f64, amplitude: f64, seed: u64) -> Result<Vec<DriverPair>> {
    let law = IncrementLaw::gaussian(1.0)?;
    let n = 16u32;
    let m = (t * f64::from(n)).ceil() as usize;
    try_par_map(count, |r| {
        let walk = sample_walk_stream(&law, n, m, seed, r as u64)?;
        let psi = DriverFunction::interpolated(&walk);
        let mut rng = replica_rng(seed ^ 0x5eed_5eed, r as u64);
        let eps = amplitude * rng.random_range(0.0..0.99);
        let freq = rng.random_range(0.0..4.0 * PI);
        let phase = rng.random_range(0.0..2.0 * PI);
        let phi = psi.perturbed(move |s| eps * (freq * s + phase).sin());
        Ok(DriverPair { psi, phi })
    })
}

/// Result of a driver-perturbation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub t: f64,
    /// Grid height is `1/n`.
    pub n: f64,
    pub pairs: usize,
    pub points_checked: usize,
    pub violations: usize,
    /// Largest ratio of the measured difference to the bound.
    pub max_ratio: f64,
}

/// Check `|f(t, psi; z) - f(t, phi; z)| <= (exp(2 n^2 t) - 1) sup |psi - phi|`
/// on points with `Im z = 1/n` spread over the driver range.
pub fn perturbation_sweep(pairs: &[DriverPair], t: f64, n: f64, points: usize, tol: f64) -> Result<PerturbationReport> {
    let factor = gronwall_factor(n, t);
    let per_pair = try_par_map(pairs.len(), |i| {
        let p = &pairs[i];
        let eps = p.psi.sup_distance(&p.phi, t);
        let (lo, hi) = p.psi.range(t);
        let mut worst = 0.0f64;
        let mut bad = 0usize;
        for k in 0..points {
            let x = lo - 2.0 + (hi - lo + 4.0) * k as f64 / (points.max(2) - 1) as f64;
            let z = Complex64::new(x, 1.0 / n);
            let u1 = solve_reverse(&p.psi, z, t, tol)?;
            let u2 = solve_reverse(&p.phi, z, t, tol)?;
            let diff = (u1 - u2).norm();
            let bound = factor * eps + 10.0 * tol * (1.0 + u1.norm());
            if diff > bound {
                bad += 1;
            }
            if bound > 0.0 {
                worst = worst.max(diff / bound);
            }
        }
        Ok::<_, Error>((bad, worst))
    })?;
    Ok(PerturbationReport {
        t,
        n,
        pairs: pairs.len(),
        points_checked: pairs.len() * points,
        violations: per_pair.iter().map(|p| p.0).sum(),
        max_ratio: per_pair.iter().map(|p| p.1).fold(0.0, f64::max),
    })
}

/// Fraction of points for which the modulus of continuity at scale `n` is
/// below the one at scale `n / 4`, over `replicas` Gaussian walks on `[0, t]`.
pub fn modulus_trend(t: f64, n: u32, replicas: usize, seed: u64) -> Result<f64> {
    let law = IncrementLaw::gaussian(1.0)?;
    let coarse = (n / 4).max(1);
    let wins = par_map(replicas, |r| {
        let fine = sample_walk_stream(&law, n, (t * f64::from(n)).ceil() as usize, seed, r as u64)
            .and_then(|w| w.modulus_of_continuity(t, 1.0 / f64::from(n)));
        let rough = sample_walk_stream(&law, coarse, (t * f64::from(coarse)).ceil() as usize, seed, r as u64)
            .and_then(|w| w.modulus_of_continuity(t, 1.0 / f64::from(coarse)));
        matches!((fine, rough), (Ok(a), Ok(b)) if a < b)
    });
    Ok(wins.iter().filter(|w| **w).count() as f64 / replicas.max(1) as f64)
}
