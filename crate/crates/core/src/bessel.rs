//! The scalar chain `Y_m = sqrt((Y_{m-1} - X'_m)^2 + 4/kappa)` with
//! standardised increments `X'`.
//!
//! For large `y` the step has `2y E[dY] -> 4/kappa` and `E[dY^2] -> 1`, which
//! puts the chain on the transient side for `kappa < 4` and the recurrent side
//! for `kappa > 4`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::par_map;
use crate::stats::{mean_estimate, wilson_interval};
use crate::walk::{replica_rng, IncrementLaw};

/// One step of the chain.
pub fn chain_step(y: f64, x_prime: f64, kappa: f64) -> f64 {
    let d = y - x_prime;
    (d * d + 4.0 / kappa).sqrt()
}

/// `chain_step(y, x) - y`, computed without cancellation for large `y`.
pub fn step_increment(y: f64, x_prime: f64, kappa: f64) -> f64 {
    let next = chain_step(y, x_prime, kappa);
    if y > 0.0 {
        (x_prime * x_prime - 2.0 * y * x_prime + 4.0 / kappa) / (next + y)
    } else {
        next - y
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
    }
    Ok(())
}

fn check_unit_law(law: &IncrementLaw) -> Result<IncrementLaw> {
    let law = law.clone().validated()?;
    if (law.variance() - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "chain increments need variance 1, got {}",
            law.variance()
        )));
    }
    Ok(law)
}

/// Parameters of a chain run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub kappa: f64,
    /// Law of `X'`, variance 1.
    pub law: IncrementLaw,
    pub y0: f64,
    /// Number of steps `M`.
    pub steps: usize,
    pub seed: u64,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        check_kappa(self.kappa)?;
        check_unit_law(&self.law)?;
        if !(self.y0.is_finite() && self.y0 != 0.0) {
            return Err(Error::Config(format!("y0 must be finite and non-zero, got {}", self.y0)));
        }
        Ok(())
    }
}

/// Trajectory `Y_0, ..., Y_M` on stream `stream` of the seed.
pub fn simulate_chain_stream(cfg: &ChainConfig, stream: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut rng = replica_rng(cfg.seed, stream);
    let mut y = cfg.y0;
    let mut out = Vec::with_capacity(cfg.steps + 1);
    out.push(y);
    for _ in 0..cfg.steps {
        y = chain_step(y, cfg.law.sample(&mut rng), cfg.kappa);
        out.push(y);
    }
    Ok(out)
}

/// Trajectory on stream 0.
pub fn simulate_chain(cfg: &ChainConfig) -> Result<Vec<f64>> {
    simulate_chain_stream(cfg, 0)
}

/// Monte Carlo estimate of the one-step moments at `Y_0 = y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftEstimate {
    pub y: f64,
    pub kappa: f64,
    /// `2y E[Y_1 - y]`, limit `4/kappa`.
    pub scaled_drift: f64,
    pub scaled_drift_se: f64,
    /// `E[(Y_1 - y)^2]`, limit 1.
    pub second_moment: f64,
    pub second_moment_se: f64,
    pub samples: usize,
}

/// Plain Monte Carlo estimate of the scaled drift and second moment.
pub fn drift_estimate(
    y: f64,
    kappa: f64,
    law: &IncrementLaw,
    samples: usize,
    seed: u64,
) -> Result<DriftEstimate> {
    check_kappa(kappa)?;
    let law = check_unit_law(law)?;
    if samples < 2 {
        return Err(Error::Config("drift estimate needs at least 2 samples".into()));
    }
    let mut rng = replica_rng(seed, 0);
    let deltas: Vec<f64> = (0..samples)
        .map(|_| step_increment(y, law.sample(&mut rng), kappa))
        .collect();
    let squares: Vec<f64> = deltas.iter().map(|d| d * d).collect();
    let drift = mean_estimate(&deltas);
    let second = mean_estimate(&squares);
    Ok(DriftEstimate {
        y,
        kappa,
        scaled_drift: 2.0 * y * drift.mean,
        scaled_drift_se: 2.0 * y * drift.std_error,
        second_moment: second.mean,
        second_moment_se: second.std_error,
        samples,
    })
}

/// Exact `(2y E[dY], E[dY^2])` for a law with finitely many atoms.
pub fn exact_moments(y: f64, kappa: f64, law: &IncrementLaw) -> Option<(f64, f64)> {
    let atoms: Vec<[f64; 2]> = match law {
        IncrementLaw::Bernoulli { kappa: v } => {
            let s = v.sqrt();
            vec![[s, 0.5], [-s, 0.5]]
        }
        IncrementLaw::Atoms { atoms, .. } => atoms.clone(),
        IncrementLaw::Degenerate => vec![[0.0, 1.0]],
        _ => return None,
    };
    let (mut m1, mut m2) = (0.0, 0.0);
    for [x, w] in atoms {
        let d = step_increment(y, x, kappa);
        m1 += w * d;
        m2 += w * d * d;
    }
    Some((2.0 * y * m1, m2))
}

/// Return statistics of [`recurrence_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub kappa: f64,
    pub level: f64,
    pub steps: usize,
    pub replicas: usize,
    /// Replicas that went above `2 * level` and later came back below `level`.
    pub returned: usize,
    pub fraction: f64,
    /// 95% Wilson interval for the return probability.
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Whether a trajectory exceeds `2 level` and then drops below `level` within
/// the horizon. Stops as soon as the answer is known.
fn returns(cfg: &ChainConfig, level: f64, stream: u64) -> bool {
    let mut rng = replica_rng(cfg.seed, stream);
    let mut y = cfg.y0;
    let mut escaped = false;
    for _ in 0..cfg.steps {
        y = chain_step(y, cfg.law.sample(&mut rng), cfg.kappa);
        if !escaped {
            escaped = y > 2.0 * level;
        } else if y < level {
            return true;
        }
    }
    false
}

/// Fraction of replicas (streams `0..replicas`) that return below `level`
/// after first exceeding `2 level`.
pub fn recurrence_experiment(cfg: &ChainConfig, level: f64, replicas: usize) -> Result<RecurrenceReport> {
    cfg.validate()?;
    let floor = 2.0 / cfg.kappa.sqrt();
    if !(level > floor) {
        return Err(Error::Config(format!(
            "level {level} must exceed the chain floor {floor}"
        )));
    }
    let hits = par_map(replicas, |r| returns(cfg, level, r as u64));
    let returned = hits.iter().filter(|h| **h).count();
    let (ci_low, ci_high) = wilson_interval(returned, replicas, 1.96);
    Ok(RecurrenceReport {
        kappa: cfg.kappa,
        level,
        steps: cfg.steps,
        replicas,
        returned,
        fraction: if replicas == 0 { 0.0 } else { returned as f64 / replicas as f64 },
        ci_low,
        ci_high,
    })
}
