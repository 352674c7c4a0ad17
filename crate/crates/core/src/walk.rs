//! Random-walk drivers.
//!
//! A [`WalkPath`] holds i.i.d. increments `X_1, ..., X_m` and the rescaled
//! partial sums `S_n(k/n) = n^{-1/2} (X_1 + ... + X_k)`. Between knots the
//! path is read either linearly ([`WalkPath::interpolate`]) or as a
//! left-continuous step function ([`WalkPath::piecewise_constant`]).
//!
//! Randomness comes from ChaCha8 keyed by `(seed, stream)`, so replica `r` of
//! an experiment always sees the same increments regardless of how replicas
//! are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfplane::SlitChain;

/// Deterministic generator for replica `stream` of an experiment seeded with
/// `seed`.
pub fn replica_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const MOMENT_TOL: f64 = 1e-12;

/// Centered increment law with variance `kappa`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IncrementLaw {
    /// `P(X = sqrt(kappa)) = P(X = -sqrt(kappa)) = 1/2`.
    #[serde(alias = "rademacher")]
    Bernoulli { kappa: f64 },
    /// Uniform on `[-sqrt(3 kappa), sqrt(3 kappa)]`.
    Uniform { kappa: f64 },
    Gaussian { kappa: f64 },
    /// Finitely many `[value, weight]` atoms; must have mean 0 and variance `kappa`.
    Atoms { kappa: f64, atoms: Vec<[f64; 2]> },
    /// Always zero. Gives a constant driver.
    Degenerate,
}

impl IncrementLaw {
    pub fn bernoulli(kappa: f64) -> Result<Self> {
        Self::Bernoulli { kappa }.validated()
    }

    pub fn uniform(kappa: f64) -> Result<Self> {
        Self::Uniform { kappa }.validated()
    }

    pub fn gaussian(kappa: f64) -> Result<Self> {
        Self::Gaussian { kappa }.validated()
    }

    pub fn atoms(kappa: f64, atoms: Vec<[f64; 2]>) -> Result<Self> {
        Self::Atoms { kappa, atoms }.validated()
    }

    /// Build a law from its CLI name.
    pub fn from_name(name: &str, kappa: f64) -> Result<Self> {
        match name {
            "bernoulli" | "rademacher" => Self::bernoulli(kappa),
            "uniform" => Self::uniform(kappa),
            "gaussian" | "normal" => Self::gaussian(kappa),
            "degenerate" | "constant" => Ok(Self::Degenerate),
            other => Err(Error::Config(format!("unknown increment law '{other}'"))),
        }
    }

    /// Check parameters; returns the law unchanged when valid.
    pub fn validated(self) -> Result<Self> {
        let check_kappa = |k: f64| {
            if k.is_finite() && k > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("variance kappa must be positive, got {k}")))
            }
        };
        match &self {
            Self::Bernoulli { kappa } | Self::Uniform { kappa } | Self::Gaussian { kappa } => {
                check_kappa(*kappa)?
            }
            Self::Atoms { kappa, atoms } => {
                check_kappa(*kappa)?;
                if atoms.is_empty() {
                    return Err(Error::Config("atomic law needs at least one atom".into()));
                }
                if atoms.iter().any(|[x, w]| !x.is_finite() || !(*w >= 0.0)) {
                    return Err(Error::Config("atoms need finite values and weights >= 0".into()));
                }
                let total: f64 = atoms.iter().map(|[_, w]| w).sum();
                let mean: f64 = atoms.iter().map(|[x, w]| x * w).sum();
                let second: f64 = atoms.iter().map(|[x, w]| x * x * w).sum();
                if (total - 1.0).abs() > MOMENT_TOL {
                    return Err(Error::Config(format!("atom weights sum to {total}, not 1")));
                }
                if mean.abs() > MOMENT_TOL {
                    return Err(Error::Config(format!("atomic law has mean {mean}, not 0")));
                }
                if (second - kappa).abs() > MOMENT_TOL {
                    return Err(Error::Config(format!(
                        "atomic law has variance {second}, expected {kappa}"
                    )));
                }
            }
            Self::Degenerate => {}
        }
        Ok(self)
    }

    pub fn variance(&self) -> f64 {
        match self {
            Self::Bernoulli { kappa }
            | Self::Uniform { kappa }
            | Self::Gaussian { kappa }
            | Self::Atoms { kappa, .. } => *kappa,
            Self::Degenerate => 0.0,
        }
    }

    /// Whether `X` and `-X` have the same law.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Self::Atoms { atoms, .. } => {
                let weight_at = |v: f64| {
                    atoms
                        .iter()
                        .filter(|[y, _]| (y - v).abs() <= 1e-12 * (1.0 + v.abs()))
                        .map(|[_, w]| w)
                        .sum::<f64>()
                };
                atoms
                    .iter()
                    .all(|[x, _]| (weight_at(*x) - weight_at(-x)).abs() <= 1e-12)
            }
            _ => true,
        }
    }

    /// The same family rescaled to variance one (used for the `X / sqrt(kappa)`
    /// increments of the Bessel-type chain).
    pub fn standardized(&self) -> Result<Self> {
        match self {
            Self::Bernoulli { .. } => Self::bernoulli(1.0),
            Self::Uniform { .. } => Self::uniform(1.0),
            Self::Gaussian { .. } => Self::gaussian(1.0),
            Self::Atoms { kappa, atoms } => {
                let s = kappa.sqrt();
                Self::atoms(1.0, atoms.iter().map(|[x, w]| [x / s, *w]).collect())
            }
            Self::Degenerate => Err(Error::Config(
                "degenerate law cannot be standardized".into(),
            )),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Bernoulli { kappa } => {
                let s = kappa.sqrt();
                if rng.random_bool(0.5) {
                    s
                } else {
                    -s
                }
            }
            Self::Uniform { kappa } => {
                let w = (3.0 * kappa).sqrt();
                rng.random_range(-w..=w)
            }
            Self::Gaussian { kappa } => Normal::new(0.0, kappa.sqrt())
                .expect("validated variance")
                .sample(rng),
            Self::Atoms { atoms, .. } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for [x, w] in atoms {
                    acc += w;
                    if u < acc {
                        return *x;
                    }
                }
                atoms.last().map(|[x, _]| *x).unwrap_or(0.0)
            }
            Self::Degenerate => 0.0,
        }
    }
}

/// A sampled walk at scale `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkPath {
    n: u32,
    increments: Vec<f64>,
    seed: u64,
    /// `S_n(k/n)` for `k = 0..=m`.
    knots: Vec<f64>,
}

/// Sample `m` increments from `law` on stream 0 of `seed`.
pub fn sample_walk(law: &IncrementLaw, n: u32, m: usize, seed: u64) -> Result<WalkPath> {
    sample_walk_stream(law, n, m, seed, 0)
}

/// Sample `m` increments from `law` on stream `stream` of `seed`.
pub fn sample_walk_stream(
    law: &IncrementLaw,
    n: u32,
    m: usize,
    seed: u64,
    stream: u64,
) -> Result<WalkPath> {
    let law = law.clone().validated()?;
    let mut rng = replica_rng(seed, stream);
    let increments = (0..m).map(|_| law.sample(&mut rng)).collect();
    let mut path = WalkPath::from_increments(n, increments)?;
    path.seed = seed;
    Ok(path)
}

impl WalkPath {
    pub fn from_increments(n: u32, increments: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("walk scale n must be at least 1".into()));
        }
        if increments.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("walk increments must be finite".into()));
        }
        let scale = 1.0 / f64::from(n).sqrt();
        let mut knots = Vec::with_capacity(increments.len() + 1);
        let mut sum = 0.0;
        knots.push(0.0);
        for x in &increments {
            sum += x;
            knots.push(sum * scale);
        }
        Ok(Self {
            n,
            increments,
            seed: 0,
            knots,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Number of steps `m`.
    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// Last time `m/n` covered by the path.
    pub fn horizon(&self) -> f64 {
        self.len() as f64 / f64::from(self.n)
    }

    /// `S_n(k/n)` for `k = 0..=m`.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn knot(&self, k: usize) -> f64 {
        self.knots[k]
    }

    /// The same increments read at scale `n'`.
    pub fn rescaled(&self, n: u32) -> Result<Self> {
        let mut p = Self::from_increments(n, self.increments.clone())?;
        p.seed = self.seed;
        Ok(p)
    }

    /// Slit chain over `S(0), ..., S(m-1)`.
    pub fn to_chain(&self) -> SlitChain {
        SlitChain::new(self.n, self.knots[..self.len()].to_vec()).expect("finite knots")
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let horizon = self.horizon();
        let slack = 1e-12 * horizon.max(1.0);
        if !(t >= -slack && t <= horizon + slack) {
            return Err(Error::Domain(format!(
                "time {t} outside the walk's range [0, {horizon}]"
            )));
        }
        let nt = (t * f64::from(self.n)).clamp(0.0, self.len() as f64);
        let k = nt.round();
        if (nt - k).abs() <= 1e-9 {
            return Ok((k as usize, 0.0));
        }
        let k = nt.floor();
        Ok((k as usize, nt - k))
    }

    /// Linear interpolation of the knots: `S_n(t)`.
    pub fn interpolate(&self, t: f64) -> Result<f64> {
        let (k, frac) = self.locate(t)?;
        if frac == 0.0 {
            return Ok(self.knots[k]);
        }
        Ok((1.0 - frac) * self.knots[k] + frac * self.knots[k + 1])
    }

    /// Left-continuous step reading: `S_n(k/n)` for `t` in `[k/n, (k+1)/n)`.
    pub fn piecewise_constant(&self, t: f64) -> Result<f64> {
        let (k, _) = self.locate(t)?;
        Ok(self.knots[k])
    }

    /// Modulus of continuity `sup{|S(r) - S(s)| : 0 <= s < r <= t, r - s <= window}`
    /// of the interpolated path.
    pub fn modulus_of_continuity(&self, t: f64, window: f64) -> Result<f64> {
        self.locate(t)?;
        if t <= 0.0 {
            return Ok(0.0);
        }
        let n = f64::from(self.n);
        let val = |s: f64| self.interpolate(s.clamp(0.0, t)).expect("inside range");
        if window >= t {
            let (lo, hi) = self.range_on(0.0, t, &val);
            return Ok(hi - lo);
        }
        // The window range is convex between breakpoints, so its maximum sits at
        // a window start where either end crosses a knot.
        let last_start = t - window;
        let mut starts = vec![0.0, last_start];
        let kmax = (t * n).ceil() as usize;
        for k in 0..=kmax.min(self.len()) {
            let knot = k as f64 / n;
            for s in [knot, knot - window] {
                if s >= 0.0 && s <= last_start {
                    starts.push(s);
                }
            }
        }
        Ok(starts
            .into_iter()
            .map(|s| {
                let (lo, hi) = self.range_on(s, s + window, &val);
                hi - lo
            })
            .fold(0.0, f64::max))
    }

    fn range_on(&self, a: f64, b: f64, val: &dyn Fn(f64) -> f64) -> (f64, f64) {
        let n = f64::from(self.n);
        let mut lo = val(a).min(val(b));
        let mut hi = val(a).max(val(b));
        let first = (a * n).ceil() as usize;
        let last = ((b * n).floor() as usize).min(self.len());
        for k in first..=last {
            let v = self.knots[k];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn bernoulli_increments_are_plus_minus_root_kappa() {
        let w = sample_walk(&IncrementLaw::bernoulli(4.0).unwrap(), 1, 3, 11).unwrap();
        assert_eq!(w.len(), 3);
        assert!(w.increments().iter().all(|x| x.abs() == 2.0));
    }

    #[test]
    fn empty_walk() {
        let w = sample_walk(&IncrementLaw::gaussian(1.0).unwrap(), 3, 0, 5).unwrap();
        assert!(w.is_empty());
        assert_eq!(w.interpolate(0.0).unwrap(), 0.0);
        assert!(w.interpolate(0.1).is_err());
    }

    #[test]
    fn gaussian_sample_mean() {
        let w = sample_walk(&IncrementLaw::gaussian(1.0).unwrap(), 1, 100_000, 2024).unwrap();
        let mean = w.increments().iter().sum::<f64>() / 1e5;
        // 3 sigma / sqrt(N) = 0.0095
        assert!(mean.abs() < 0.02);
        let var = w.increments().iter().map(|x| x * x).sum::<f64>() / 1e5;
        assert!((var - 1.0).abs() < 0.03);
    }

    #[test]
    fn invalid_laws_are_rejected() {
        assert!(IncrementLaw::bernoulli(0.0).is_err());
        assert!(IncrementLaw::gaussian(-1.0).is_err());
        assert!(IncrementLaw::atoms(1.0, vec![[1.0, 0.5], [-1.0, 0.4]]).is_err());
        assert!(IncrementLaw::atoms(1.0, vec![[2.0, 0.5], [-1.0, 0.5]]).is_err());
        assert!(IncrementLaw::atoms(2.0, vec![[1.0, 0.5], [-1.0, 0.5]]).is_err());
        assert!(IncrementLaw::atoms(1.0, vec![[1.0, 0.5], [-1.0, 0.5]]).is_ok());
        assert!(IncrementLaw::from_name("cauchy", 1.0).is_err());
        let bad = IncrementLaw::Uniform { kappa: -2.0 };
        assert!(sample_walk(&bad, 1, 4, 0).is_err());
    }

    #[test]
    fn symmetry_detection() {
        assert!(IncrementLaw::bernoulli(2.0).unwrap().is_symmetric());
        let skew = IncrementLaw::atoms(2.0, vec![[2.0, 1.0 / 3.0], [-1.0, 2.0 / 3.0]]).unwrap();
        assert!(!skew.is_symmetric());
    }

    #[test]
    fn law_json_roundtrip() {
        let law: IncrementLaw = serde_json::from_str(r#"{"kind":"rademacher","kappa":2.0}"#).unwrap();
        assert_eq!(law, IncrementLaw::Bernoulli { kappa: 2.0 });
        let s = serde_json::to_string(&IncrementLaw::Degenerate).unwrap();
        assert_eq!(s, r#"{"kind":"degenerate"}"#);
    }

    #[test]
    fn interpolation_values() {
        let one = WalkPath::from_increments(1, vec![2.0]).unwrap();
        assert_eq!(one.interpolate(1.0).unwrap(), 2.0);
        assert_eq!(one.interpolate(0.0).unwrap(), 0.0);
        let four = WalkPath::from_increments(4, vec![2.0, 2.0]).unwrap();
        assert_abs_diff_eq!(four.interpolate(0.375).unwrap(), 1.5, epsilon = 1e-15);
        assert!(four.interpolate(0.6).is_err());
        assert!(four.interpolate(-0.1).is_err());
    }

    #[test]
    fn step_values() {
        let one = WalkPath::from_increments(1, vec![2.0]).unwrap();
        assert_eq!(one.piecewise_constant(0.7).unwrap(), 0.0);
        assert_eq!(one.piecewise_constant(1.0).unwrap(), 2.0);
        let two = WalkPath::from_increments(2, vec![1.0, -1.0]).unwrap();
        assert_abs_diff_eq!(
            two.piecewise_constant(0.75).unwrap(),
            1.0 / 2f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(two.piecewise_constant(1.5).is_err());
    }

    #[test]
    fn modulus_of_continuity_brute_force() {
        let w = sample_walk(&IncrementLaw::gaussian(1.0).unwrap(), 5, 12, 3).unwrap();
        let t = w.horizon();
        for window in [0.05, 0.2, 0.37, 1.0, 10.0] {
            let fast = w.modulus_of_continuity(t, window).unwrap();
            // oracle: pairs on a fine grid
            let grid: Vec<f64> = (0..=1200).map(|k| t * k as f64 / 1200.0).collect();
            let vals: Vec<f64> = grid.iter().map(|&s| w.interpolate(s).unwrap()).collect();
            let mut brute: f64 = 0.0;
            for i in 0..grid.len() {
                for j in i + 1..grid.len() {
                    if grid[j] - grid[i] > window + 1e-12 {
                        break;
                    }
                    brute = brute.max((vals[j] - vals[i]).abs());
                }
            }
            assert!(fast >= brute - 1e-12, "window {window}: {fast} < {brute}");
            assert!(fast <= brute + 0.02, "window {window}: {fast} >> {brute}");
        }
        // with the native window the modulus is the largest scaled increment
        let native = w.modulus_of_continuity(t, 0.2).unwrap();
        let max_inc = w.increments().iter().fold(0.0f64, |a, x| a.max(x.abs())) / 5f64.sqrt();
        assert_abs_diff_eq!(native, max_inc, epsilon = 1e-12);
    }

    #[test]
    fn same_seed_same_path() {
        let law = IncrementLaw::uniform(3.0).unwrap();
        let a = sample_walk_stream(&law, 2, 50, 9, 4).unwrap();
        let b = sample_walk_stream(&law, 2, 50, 9, 4).unwrap();
        let c = sample_walk_stream(&law, 2, 50, 9, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.increments(), c.increments());
    }

    proptest! {
        #[test]
        fn knot_scaling(incs in prop::collection::vec(-3.0..3.0f64, 1..60), n in 1u32..200) {
            let w = WalkPath::from_increments(n, incs.clone()).unwrap();
            let unit = WalkPath::from_increments(1, incs).unwrap();
            let k = f64::from(n).sqrt();
            for m in 0..=w.len() {
                let lhs = k * w.knot(m);
                prop_assert!((lhs - unit.knot(m)).abs() <= 1e-12 * (1.0 + lhs.abs()));
            }
        }

        #[test]
        fn interpolation_stays_between_knots(incs in prop::collection::vec(-3.0..3.0f64, 1..20), frac in 0.0..1.0f64) {
            let w = WalkPath::from_increments(3, incs).unwrap();
            let t = frac * w.horizon();
            let v = w.interpolate(t).unwrap();
            let k = ((t * 3.0).floor() as usize).min(w.len() - 1);
            let (a, b) = (w.knot(k), w.knot(k + 1));
            prop_assert!(v >= a.min(b) - 1e-12 && v <= a.max(b) + 1e-12);
        }
    }
}
