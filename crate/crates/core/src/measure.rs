//! Compactly supported probability measures on the line and the transforms
//! relating them to maps of the upper half-plane.
//!
//! * Cauchy transform `G(z) = int mu(dx) / (z - x)` and its reciprocal
//!   `f = 1/G`, which maps the upper half-plane into itself.
//! * Levy distance and the metric `rho = levy + endpoint gap`.
//! * Stieltjes inversion, monotone convolution (`f_lambda = f_mu o f_nu`).
//! * Maps with endpoints ([`SigmaMap`]) and the path metric on sampled
//!   map-valued paths.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfplane::{slit_root, SlitChain, SlitParams};

/// Weight tolerance for atomic measures.
pub const WEIGHT_TOL: f64 = 1e-12;

/// A compactly supported probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureDoc", into = "MeasureDoc")]
pub enum CompactMeasure {
    /// Weighted atoms `(position, weight)`, sorted by position, no repeats.
    Atoms(Vec<(f64, f64)>),
    /// Arcsine law on `[shift - 2/sqrt(n), shift + 2/sqrt(n)]`, with
    /// `f(z) = sqrt((z - shift)^2 - 4/n)`.
    Arcsine { n: f64, shift: f64 },
    /// The measure whose reciprocal Cauchy transform is the slit map
    /// `r_n(center; .)`: a deformed arcsine density plus, for
    /// `center != 0`, one atom outside the slit base.
    Slit { center: f64, n: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MeasureDoc {
    Atoms {
        atoms: Vec<[f64; 2]>,
    },
    Family {
        family: String,
        n: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shift: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<f64>,
    },
}

impl TryFrom<MeasureDoc> for CompactMeasure {
    type Error = Error;

    fn try_from(doc: MeasureDoc) -> Result<Self> {
        match doc {
            MeasureDoc::Atoms { atoms } => {
                CompactMeasure::atoms(atoms.into_iter().map(|[x, w]| (x, w)).collect())
            }
            MeasureDoc::Family {
                family,
                n,
                shift,
                center,
            } => match family.as_str() {
                "arcsine" => CompactMeasure::shifted_arcsine(shift.or(center).unwrap_or(0.0), n),
                "slit" => CompactMeasure::slit(center.or(shift).unwrap_or(0.0), n),
                other => Err(Error::Config(format!("unknown measure family '{other}'"))),
            },
        }
    }
}

impl From<CompactMeasure> for MeasureDoc {
    fn from(m: CompactMeasure) -> Self {
        match m {
            CompactMeasure::Atoms(atoms) => MeasureDoc::Atoms {
                atoms: atoms.into_iter().map(|(x, w)| [x, w]).collect(),
            },
            CompactMeasure::Arcsine { n, shift } => MeasureDoc::Family {
                family: "arcsine".into(),
                n,
                shift: Some(shift),
                center: None,
            },
            CompactMeasure::Slit { center, n } => MeasureDoc::Family {
                family: "slit".into(),
                n,
                shift: None,
                center: Some(center),
            },
        }
    }
}

fn check_scale(n: f64) -> Result<()> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Config(format!("scale n must be positive, got {n}")));
    }
    Ok(())
}

impl CompactMeasure {
    /// Atomic measure. Weights must be non-negative and sum to one within
    /// [`WEIGHT_TOL`]; they are renormalised exactly and equal positions merged.
    pub fn atoms(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Config("atomic measure needs at least one atom".into()));
        }
        if atoms
            .iter()
            .any(|(x, w)| !x.is_finite() || !w.is_finite() || *w < 0.0)
        {
            return Err(Error::Config("atoms need finite positions and weights >= 0".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Config(format!("atom weights sum to {total}, not 1")));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        merged.retain(|a| a.1 > 0.0);
        for a in &mut merged {
            a.1 /= total;
        }
        Ok(CompactMeasure::Atoms(merged))
    }

    pub fn dirac(a: f64) -> Self {
        CompactMeasure::Atoms(vec![(a, 1.0)])
    }

    pub fn arcsine(n: f64) -> Result<Self> {
        Self::shifted_arcsine(0.0, n)
    }

    pub fn shifted_arcsine(shift: f64, n: f64) -> Result<Self> {
        check_scale(n)?;
        if !shift.is_finite() {
            return Err(Error::Config("arcsine shift must be finite".into()));
        }
        Ok(CompactMeasure::Arcsine { n, shift })
    }

    pub fn slit(center: f64, n: f64) -> Result<Self> {
        check_scale(n)?;
        if !center.is_finite() {
            return Err(Error::Config("slit center must be finite".into()));
        }
        Ok(CompactMeasure::Slit { center, n })
    }

    fn half_width(n: f64) -> f64 {
        2.0 / n.sqrt()
    }

    /// Position and mass of the atom of a slit law, if any.
    pub fn slit_atom(center: f64, n: f64) -> Option<(f64, f64)> {
        if center == 0.0 {
            return None;
        }
        let r = center.hypot(Self::half_width(n));
        Some((center - center.signum() * r, center.abs() / r))
    }

    /// Convex closure `[A, B]` of the support.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            CompactMeasure::Atoms(ref atoms) => (atoms[0].0, atoms[atoms.len() - 1].0),
            CompactMeasure::Arcsine { n, shift } => {
                let c = Self::half_width(n);
                (shift - c, shift + c)
            }
            CompactMeasure::Slit { center, n } => {
                let c = Self::half_width(n);
                let (mut lo, mut hi) = (center - c, center + c);
                if let Some((p, _)) = Self::slit_atom(center, n) {
                    lo = lo.min(p);
                    hi = hi.max(p);
                }
                (lo, hi)
            }
        }
    }

    /// Interval outside which `f = 1/G` extends univalently.
    pub fn reciprocal_endpoints(&self) -> (f64, f64) {
        match *self {
            CompactMeasure::Slit { center, n } => {
                let c = Self::half_width(n);
                (center - c, center + c)
            }
            _ => self.support(),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            CompactMeasure::Atoms(ref atoms) => atoms.iter().map(|(x, w)| x * w).sum(),
            CompactMeasure::Arcsine { shift, .. } => shift,
            CompactMeasure::Slit { .. } => 0.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            CompactMeasure::Atoms(ref atoms) => {
                let m = self.mean();
                atoms.iter().map(|(x, w)| w * (x - m) * (x - m)).sum()
            }
            // f(z) = z - mean - variance / z + ... for both families
            CompactMeasure::Arcsine { n, .. } | CompactMeasure::Slit { n, .. } => 2.0 / n,
        }
    }

    /// `mu((-inf, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            CompactMeasure::Atoms(ref atoms) => atoms
                .iter()
                .take_while(|(p, _)| *p <= x)
                .map(|(_, w)| w)
                .sum::<f64>()
                .min(1.0),
            CompactMeasure::Arcsine { n, shift } => {
                let c = Self::half_width(n);
                let u = ((x - shift) / c).clamp(-1.0, 1.0);
                0.5 + u.asin() / PI
            }
            CompactMeasure::Slit { center, n } => {
                let c = Self::half_width(n);
                let atom = Self::slit_atom(center, n)
                    .filter(|(p, _)| *p <= x)
                    .map_or(0.0, |(_, w)| w);
                // x - center = -c cos(theta)
                let theta = (-(x - center) / c).clamp(-1.0, 1.0).acos();
                let density = |t: f64| {
                    let s = t.sin();
                    c * c * s * s / (PI * (center * center + c * c * s * s))
                };
                atom + simpson(density, 0.0, theta, 2048)
            }
        }
    }

    /// Cauchy transform `G(z)`; `z` may lie in either half-plane but not on
    /// the support.
    pub fn cauchy_transform(&self, z: Complex64) -> Result<Complex64> {
        check_finite(z)?;
        if let CompactMeasure::Atoms(ref atoms) = *self {
            if z.im == 0.0 && atoms.iter().any(|(p, _)| *p == z.re) {
                return Err(Error::Domain(format!("{z} is an atom")));
            }
            return Ok(atoms.iter().map(|(p, w)| *w / (z - p)).sum());
        }
        if z.im == 0.0 {
            let (a, b) = self.reciprocal_endpoints();
            if z.re >= a && z.re <= b {
                return Err(Error::Domain(format!("{z} lies on the support")));
            }
        }
        let upper = Complex64::new(z.re, z.im.abs());
        let f = self.family_reciprocal(upper);
        if f == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain(format!("{z} is an atom")));
        }
        let g = 1.0 / f;
        Ok(if z.im < 0.0 { g.conj() } else { g })
    }

    fn family_reciprocal(&self, z: Complex64) -> Complex64 {
        match *self {
            CompactMeasure::Arcsine { n, shift } => slit_root(z - shift, Self::half_width(n)),
            CompactMeasure::Slit { center, n } => {
                center + slit_root(z - center, Self::half_width(n))
            }
            CompactMeasure::Atoms(_) => unreachable!(),
        }
    }

    /// Reciprocal Cauchy transform `f = 1/G` on the closed upper half-plane.
    pub fn reciprocal_cauchy(&self, z: Complex64) -> Result<Complex64> {
        check_finite(z)?;
        if z.im < 0.0 {
            return Err(Error::Domain(format!("{z} is below the real axis")));
        }
        match self {
            CompactMeasure::Atoms(_) => Ok(1.0 / self.cauchy_transform(z)?),
            _ => Ok(self.family_reciprocal(z)),
        }
    }

    /// The measure translated by `b`, when the family is closed under
    /// translation.
    pub fn translated(&self, b: f64) -> Option<CompactMeasure> {
        match *self {
            CompactMeasure::Atoms(ref atoms) => Some(CompactMeasure::Atoms(
                atoms.iter().map(|(x, w)| (x + b, *w)).collect(),
            )),
            CompactMeasure::Arcsine { n, shift } => Some(CompactMeasure::Arcsine { n, shift: shift + b }),
            CompactMeasure::Slit { .. } => None,
        }
    }

    fn single_atom(&self) -> Option<f64> {
        match self {
            CompactMeasure::Atoms(atoms) if atoms.len() == 1 => Some(atoms[0].0),
            _ => None,
        }
    }
}

fn check_finite(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite point {z}")));
    }
    Ok(())
}

/// Composite Simpson rule with `intervals` (rounded up to even) pieces.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    if b == a {
        return 0.0;
    }
    let k = intervals.max(2) + intervals % 2;
    let h = (b - a) / k as f64;
    let mut acc = f(a) + f(b);
    for i in 1..k {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

pub fn cauchy_transform(mu: &CompactMeasure, z: Complex64) -> Result<Complex64> {
    mu.cauchy_transform(z)
}

pub fn reciprocal_cauchy(mu: &CompactMeasure, z: Complex64) -> Result<Complex64> {
    mu.reciprocal_cauchy(z)
}

// ---------------------------------------------------------------------------
// Levy metric

/// Largest violation of the band condition at width `eps`:
/// `max_x max(F(x - eps) - G(x), G(x) - F(x + eps))`, exact for atoms.
fn atomic_band_excess(f: &[(f64, f64)], g: &[(f64, f64)], eps: f64) -> f64 {
    // F(x - eps) - G(x) is right-continuous and piecewise constant with
    // jumps at f_i + eps and g_j, so its sup is attained at a jump.
    let one_side = |a: &[(f64, f64)], b: &[(f64, f64)], shift: f64| {
        let mut points: Vec<f64> = a.iter().map(|p| p.0 + shift).collect();
        points.extend(b.iter().map(|p| p.0));
        points.sort_by(f64::total_cmp);
        let (mut i, mut j) = (0, 0);
        let (mut fa, mut fb) = (0.0, 0.0);
        let mut worst = f64::NEG_INFINITY;
        for x in points {
            while i < a.len() && a[i].0 + shift <= x {
                fa += a[i].1;
                i += 1;
            }
            while j < b.len() && b[j].0 <= x {
                fb += b[j].1;
                j += 1;
            }
            worst = worst.max(fa - fb);
        }
        worst
    };
    one_side(f, g, eps).max(one_side(g, f, eps))
}

fn atomic_levy(f: &[(f64, f64)], g: &[(f64, f64)]) -> f64 {
    // Between consecutive distances |x_i - y_j| the ordering of jump points is
    // fixed, so the excess is constant there; feasibility (excess <= eps) is
    // monotone in eps, so bisect over the candidate intervals.
    let mut cands: Vec<f64> = vec![0.0];
    for (x, _) in f {
        for (y, _) in g {
            cands.push((x - y).abs());
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    if atomic_band_excess(f, g, 0.0) <= 0.0 {
        return 0.0;
    }
    let upper = |k: usize| cands.get(k + 1).copied().unwrap_or(f64::INFINITY);
    let mid = |k: usize| {
        let hi = upper(k);
        if hi.is_finite() {
            0.5 * (cands[k] + hi)
        } else {
            cands[k] + 1.0
        }
    };
    let feasible = |k: usize| atomic_band_excess(f, g, mid(k)) < upper(k);
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    while lo < hi {
        let k = (lo + hi) / 2;
        if feasible(k) {
            hi = k;
        } else {
            lo = k + 1;
        }
    }
    cands[lo].max(atomic_band_excess(f, g, mid(lo))).min(1.0)
}

/// Levy distance: the least `eps` with `F(x - eps) - eps <= G(x) <= F(x + eps) + eps`
/// for all `x`. Exact for two atomic measures; otherwise computed by
/// bisection on `eps` with the band checked on a fine grid.
pub fn levy_distance(mu: &CompactMeasure, nu: &CompactMeasure) -> f64 {
    if let (CompactMeasure::Atoms(f), CompactMeasure::Atoms(g)) = (mu, nu) {
        return atomic_levy(f, g);
    }
    const GRID: usize = 8000;
    let (a1, b1) = mu.support();
    let (a2, b2) = nu.support();
    let lo = a1.min(a2) - 1.5;
    let hi = b1.max(b2) + 1.5;
    let mut xs: Vec<f64> = (0..=GRID)
        .map(|k| lo + (hi - lo) * k as f64 / GRID as f64)
        .collect();
    for m in [mu, nu] {
        if let CompactMeasure::Atoms(atoms) = m {
            xs.extend(atoms.iter().map(|a| a.0));
        }
    }
    let excess = |eps: f64| {
        xs.iter()
            .map(|&x| {
                let up = mu.cdf(x - eps) - nu.cdf(x);
                let down = nu.cdf(x) - mu.cdf(x + eps);
                let up2 = nu.cdf(x - eps) - mu.cdf(x);
                let down2 = mu.cdf(x) - nu.cdf(x + eps);
                up.max(down).max(up2).max(down2)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (mut lo_e, mut hi_e) = (0.0, 1.0);
    for _ in 0..50 {
        let e = 0.5 * (lo_e + hi_e);
        if excess(e) <= e + 1e-12 {
            hi_e = e;
        } else {
            lo_e = e;
        }
    }
    hi_e
}

/// `rho = levy + max(|A_mu - A_nu|, |B_mu - B_nu|)`.
pub fn rho_metric(mu: &CompactMeasure, nu: &CompactMeasure) -> f64 {
    let (a1, b1) = mu.support();
    let (a2, b2) = nu.support();
    levy_distance(mu, nu) + (a1 - a2).abs().max((b1 - b2).abs())
}

// ---------------------------------------------------------------------------
// Stieltjes inversion

/// Heights and accuracy for Stieltjes inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionSchedule {
    /// Largest height `y`.
    pub y_start: f64,
    /// Number of heights `y_start / 2^k`.
    pub levels: usize,
    /// Quadrature points per unit of `y` along the real direction.
    pub resolution: f64,
    /// Largest accepted disagreement between the two best extrapolants.
    pub tolerance: f64,
}

impl Default for InversionSchedule {
    fn default() -> Self {
        Self {
            y_start: 1e-2,
            levels: 4,
            resolution: 16.0,
            tolerance: 1e-3,
        }
    }
}

impl InversionSchedule {
    fn heights(&self) -> Vec<f64> {
        (0..self.levels)
            .map(|k| self.y_start / f64::powi(2.0, k as i32))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.levels < 2 || !(self.y_start > 0.0) || !(self.resolution > 0.0) {
            return Err(Error::Config("inversion schedule needs >= 2 levels and positive y".into()));
        }
        Ok(())
    }
}

/// Neville extrapolation to `h = 0` of samples `(h_k, v_k)`, together with
/// the extrapolant that omits the last sample.
fn extrapolate_to_zero(h: &[f64], v: &[f64]) -> (f64, f64) {
    let neville = |len: usize| {
        let mut p: Vec<f64> = v[..len].to_vec();
        for m in 1..len {
            for i in 0..len - m {
                p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
            }
        }
        p[0]
    };
    (neville(h.len()), neville(h.len() - 1))
}

/// Smoothed mass `-(1/pi) int_x0^x1 Im G(a + iy) da` on a fine Simpson grid.
fn smoothed_mass<G: Fn(Complex64) -> Complex64>(g: &G, x0: f64, x1: f64, y: f64, res: f64) -> f64 {
    let steps = (((x1 - x0) / y) * res).ceil().max(2.0) as usize;
    -simpson(|a| g(Complex64::new(a, y)).im, x0, x1, steps) / PI
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Mass and first moment of `(x0, x1)`, plus half of any atoms at the ends,
/// as `-(1/pi) Im` of `int G dz` and `int z G dz` along the half circle over
/// `[x0, x1]`. Analyticity of `G` turns the boundary limit of the inversion
/// formula into this arc integral. The angle is `pi (1 - cos u) / 2`, which
/// absorbs inverse square-root behaviour at the ends.
fn arc_moments<G: Fn(Complex64) -> Complex64>(g: &G, x0: f64, x1: f64, panels: usize) -> (f64, f64) {
    let c = 0.5 * (x0 + x1);
    let r = 0.5 * (x1 - x0);
    let du = PI / panels as f64;
    let (mut m0, mut m1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * du;
        for &(node, weight) in &GAUSS5 {
            let u = mid + 0.5 * du * node;
            let theta = 0.5 * PI * (1.0 - u.cos());
            let e = Complex64::from_polar(1.0, -theta);
            let z = c - r * e;
            // dz = i r e^{-i theta} dtheta, dtheta = (pi/2) sin u du
            let dz = Complex64::new(0.0, r) * e * (0.5 * PI * u.sin()) * (0.5 * du * weight);
            let v = g(z) * dz;
            m0 += v;
            m1 += z * v;
        }
    }
    (-m0.im / PI, -m1.im / PI)
}

/// Stieltjes inversion: estimates `mu((x0, x1)) + (mu{x0} + mu{x1}) / 2` from
/// the Cauchy transform `g`, extrapolating the smoothed masses at heights
/// `y_k` polynomially in `sqrt(y)` (square-root endpoint singularities make
/// the error expand in half powers of `y`).
pub fn stieltjes_invert<G>(g: G, interval: (f64, f64), schedule: &InversionSchedule) -> Result<f64>
where
    G: Fn(Complex64) -> Complex64,
{
    schedule.validate()?;
    let (x0, x1) = interval;
    if !(x0 < x1) {
        return Err(Error::Domain(format!("empty interval ({x0}, {x1})")));
    }
    let ys = schedule.heights();
    let hs: Vec<f64> = ys.iter().map(|y| y.sqrt()).collect();
    let vals: Vec<f64> = ys
        .iter()
        .map(|&y| smoothed_mass(&g, x0, x1, y, schedule.resolution))
        .collect();
    let (best, prev) = extrapolate_to_zero(&hs, &vals);
    if !best.is_finite() || (best - prev).abs() > schedule.tolerance {
        return Err(Error::Numerical(format!(
            "Stieltjes extrapolation did not settle ({best} vs {prev})"
        )));
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Monotone convolution

/// Cells whose inverted mass is below this hold no atom.
const CELL_MASS_FLOOR: f64 = 1e-14;

/// Discretisation used by [`monotone_convolve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionGrid {
    /// Number of cells (output atoms) over the bracket.
    pub cells: usize,
    /// Extra room on each side of `[A_mu + A_nu, B_mu + B_nu]`, as a fraction
    /// of its width.
    pub padding: f64,
    /// Gauss-Legendre panels per cell along the inversion arc.
    pub panels: usize,
    /// Largest accepted deviation of the recovered total mass from one.
    pub mass_tolerance: f64,
}

impl Default for ConvolutionGrid {
    fn default() -> Self {
        Self {
            cells: 400,
            padding: 0.25,
            panels: 16,
            mass_tolerance: 1e-3,
        }
    }
}

/// `f_mu(f_nu(z))`, the reciprocal Cauchy transform of `mu |> nu`.
pub fn composed_reciprocal(mu: &CompactMeasure, nu: &CompactMeasure, z: Complex64) -> Result<Complex64> {
    let w = nu.reciprocal_cauchy(z)?;
    mu.reciprocal_cauchy(Complex64::new(w.re, w.im.max(0.0)))
}

/// Monotone convolution `mu |> nu`, the measure with `f = f_mu o f_nu`.
///
/// A point mass `nu = delta_b` translates `mu` exactly when the family allows
/// it. Otherwise `1 / (f_mu o f_nu)` is Stieltjes-inverted cell by cell (in
/// the arc form of [`arc_moments`]) and the result is an atomic measure with
/// one atom per cell, placed at the barycentre of the cell.
pub fn monotone_convolve(
    mu: &CompactMeasure,
    nu: &CompactMeasure,
    grid: &ConvolutionGrid,
) -> Result<CompactMeasure> {
    if let Some(b) = nu.single_atom() {
        if let Some(t) = mu.translated(b) {
            return Ok(t);
        }
    }
    if grid.cells == 0 || grid.panels == 0 {
        return Err(Error::Config("convolution grid needs at least one cell and panel".into()));
    }
    let (a1, b1) = mu.support();
    let (a2, b2) = nu.support();
    let width = (b1 + b2) - (a1 + a2);
    let pad = grid.padding * width.max(1.0);
    let lo = a1 + a2 - pad;
    let hi = b1 + b2 + pad;
    let k = grid.cells;
    let edges: Vec<f64> = (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect();
    let g = |z: Complex64| {
        composed_reciprocal(mu, nu, z).map_or(Complex64::new(f64::NAN, f64::NAN), |f| 1.0 / f)
    };
    let moments: Vec<(f64, f64)> = (0..k)
        .map(|i| arc_moments(&g, edges[i], edges[i + 1], grid.panels))
        .collect();
    if moments.iter().any(|(m0, m1)| !m0.is_finite() || !m1.is_finite()) {
        return Err(Error::Numerical("composed transform is not finite on the grid".into()));
    }
    let total: f64 = moments.iter().map(|m| m.0).sum();
    if (total - 1.0).abs() > grid.mass_tolerance {
        return Err(Error::Numerical(format!(
            "recovered mass {total} differs from 1 by more than {}",
            grid.mass_tolerance
        )));
    }
    // one atom per cell at the cell barycentre; roundoff-level cells are empty
    let atoms: Vec<(f64, f64)> = (0..k)
        .filter(|&i| moments[i].0 > CELL_MASS_FLOOR)
        .map(|i| {
            let (w, m1) = moments[i];
            ((m1 / w).clamp(edges[i], edges[i + 1]), w)
        })
        .collect();
    let mass: f64 = atoms.iter().map(|a| a.1).sum();
    CompactMeasure::atoms(atoms.into_iter().map(|(x, w)| (x, w / mass)).collect())
}

// ---------------------------------------------------------------------------
// Maps with endpoints

/// A self-map of the upper half-plane together with the interval `[A_f, B_f]`
/// off which it extends univalently.
#[derive(Clone)]
pub struct SigmaMap {
    eval: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
    endpoints: (f64, f64),
}

impl fmt::Debug for SigmaMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SigmaMap").field("endpoints", &self.endpoints).finish()
    }
}

impl SigmaMap {
    pub fn new<F>(f: F, endpoints: (f64, f64)) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            endpoints,
        }
    }

    /// The identity, reciprocal transform of `delta_0`.
    pub fn identity() -> Self {
        Self::new(|z| z, (0.0, 0.0))
    }

    pub fn from_measure(mu: &CompactMeasure) -> Self {
        let m = mu.clone();
        Self::new(
            move |z| m.reciprocal_cauchy(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
            mu.reciprocal_endpoints(),
        )
    }

    pub fn from_slit(p: SlitParams) -> Self {
        let c = p.height();
        Self::new(
            move |z| crate::halfplane::eval_slit(p, z),
            (p.center() - c, p.center() + c),
        )
    }

    /// `D_n(m; .)` with its exact hull endpoints.
    pub fn from_chain(chain: &SlitChain) -> Self {
        let ends = chain.hull_endpoints().unwrap_or((0.0, 0.0));
        let c = chain.clone();
        Self::new(move |z| c.eval(z), ends)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn endpoints(&self) -> (f64, f64) {
        self.endpoints
    }

    /// Numerical estimate of `[A_f, B_f]` as the hull of the real points where
    /// the boundary values leave the real axis, searched inside `bracket`.
    pub fn estimated_endpoints(&self, bracket: (f64, f64), samples: usize) -> Option<(f64, f64)> {
        let lifted = |x: f64| self.eval(Complex64::new(x, 0.0)).im > 1e-14;
        let (lo, hi) = bracket;
        let step = (hi - lo) / samples as f64;
        let xs: Vec<f64> = (0..=samples).map(|k| lo + step * k as f64).collect();
        let first = xs.iter().position(|&x| lifted(x))?;
        let last = xs.iter().rposition(|&x| lifted(x))?;
        let refine = |mut inside: f64, mut outside: f64| {
            for _ in 0..60 {
                let mid = 0.5 * (inside + outside);
                if lifted(mid) {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            0.5 * (inside + outside)
        };
        let a = if first == 0 { lo } else { refine(xs[first], xs[first - 1]) };
        let b = if last == samples { hi } else { refine(xs[last], xs[last + 1]) };
        Some((a, b))
    }
}

/// Evaluation grid on the line `Im z = a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaGrid {
    pub a: f64,
    pub half_width: f64,
    pub points: usize,
}

impl SigmaGrid {
    /// Grid on `{Im z = a, |Re z| <= 10 + 10/a}` with 401 points.
    pub fn new(a: f64) -> Self {
        Self {
            a,
            half_width: 10.0 + 10.0 / a,
            points: 401,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        let k = self.points.max(2) - 1;
        (0..=k).map(move |i| {
            Complex64::new(-self.half_width + 2.0 * self.half_width * i as f64 / k as f64, self.a)
        })
    }
}

/// Sup of `|f - g|` over the grid plus the endpoint gap.
pub fn sigma_distance_on(f: &SigmaMap, g: &SigmaMap, grid: &SigmaGrid) -> f64 {
    let sup = grid
        .points()
        .map(|z| (f.eval(z) - g.eval(z)).norm())
        .fold(0.0, f64::max);
    sup + endpoint_gap(f, g)
}

pub fn endpoint_gap(f: &SigmaMap, g: &SigmaMap) -> f64 {
    let (a1, b1) = f.endpoints;
    let (a2, b2) = g.endpoints;
    (a1 - a2).abs().max((b1 - b2).abs())
}

/// [`sigma_distance_on`] with the default grid at height `a`.
pub fn sigma_distance(f: &SigmaMap, g: &SigmaMap, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("grid height must be positive, got {a}")));
    }
    Ok(sigma_distance_on(f, g, &SigmaGrid::new(a)))
}

/// A map-valued path sampled on a time grid starting at 0.
#[derive(Debug, Clone)]
pub struct SigmaPath {
    times: Vec<f64>,
    maps: Vec<SigmaMap>,
}

impl SigmaPath {
    pub fn new(times: Vec<f64>, maps: Vec<SigmaMap>) -> Result<Self> {
        if times.is_empty() || times.len() != maps.len() {
            return Err(Error::Domain("path needs one map per grid time".into()));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("path times must increase strictly from 0".into()));
        }
        Ok(Self { times, maps })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn maps(&self) -> &[SigmaMap] {
        &self.maps
    }
}

/// Truncation of the series in [`path_distance`]; the tail is below `2^-30`.
pub const PATH_TERMS: u32 = 30;

/// `sum_{k=1..30} 2^-k s_k / (1 + s_k)` with `s_k` the largest sigma distance
/// at grid times `<= k`.
pub fn path_distance(p: &SigmaPath, q: &SigmaPath, grid: &SigmaGrid) -> Result<f64> {
    if p.times != q.times {
        return Err(Error::Domain("paths are sampled on different time grids".into()));
    }
    let d: Vec<f64> = p
        .maps
        .iter()
        .zip(&q.maps)
        .map(|(f, g)| sigma_distance_on(f, g, grid))
        .collect();
    Ok(path_distance_from(&p.times, &d))
}

/// The series of [`path_distance`] from precomputed distances `d[i]` at
/// `times[i]`.
pub fn path_distance_from(times: &[f64], d: &[f64]) -> f64 {
    (1..=PATH_TERMS)
        .map(|k| {
            let s = times
                .iter()
                .zip(d)
                .filter(|(t, _)| **t <= f64::from(k))
                .map(|(_, v)| *v)
                .fold(0.0, f64::max);
            f64::powi(0.5, k as i32) * s / (1.0 + s)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfplane::eval_slit;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_point() -> CompactMeasure {
        CompactMeasure::atoms(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    /// Brute force: scan eps on a grid and check the band on a fine x grid.
    fn levy_oracle(mu: &CompactMeasure, nu: &CompactMeasure) -> f64 {
        let xs: Vec<f64> = (0..=6000).map(|k| -3.0 + 6.0 * k as f64 / 6000.0).collect();
        (0..=1000)
            .map(|k| k as f64 * 1e-3)
            .find(|&e| {
                xs.iter().all(|&x| {
                    mu.cdf(x - e) - e <= nu.cdf(x) + 1e-12 && nu.cdf(x) <= mu.cdf(x + e) + e + 1e-12
                })
            })
            .unwrap()
    }

    /// Cauchy transform of a family by quadrature in `x = center + c cos(theta)`.
    fn quadrature_cauchy(mu: &CompactMeasure, z: Complex64) -> Complex64 {
        let k = 20_000;
        let integrate = |f: &dyn Fn(f64) -> Complex64| {
            (0..k)
                .map(|i| f(PI * (i as f64 + 0.5) / k as f64))
                .sum::<Complex64>()
                * (PI / k as f64)
        };
        match *mu {
            CompactMeasure::Arcsine { n, shift } => {
                let cw = 2.0 / n.sqrt();
                integrate(&|t| 1.0 / (z - shift - cw * t.cos())) / PI
            }
            CompactMeasure::Slit { center, n } => {
                let cw = 2.0 / n.sqrt();
                let cont = integrate(&|t| {
                    let s = t.sin();
                    let dens = cw * cw * s * s / (PI * (center * center + cw * cw * s * s));
                    dens / (z - center + cw * t.cos())
                });
                let atom = CompactMeasure::slit_atom(center, n)
                    .map_or(c(0.0, 0.0), |(p, w)| w / (z - p));
                cont + atom
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn levy_examples() {
        let d0 = CompactMeasure::dirac(0.0);
        assert_eq!(levy_distance(&d0, &d0), 0.0);
        let half = CompactMeasure::dirac(0.5);
        assert_abs_diff_eq!(levy_distance(&d0, &half), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(levy_oracle(&d0, &half), 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(levy_distance(&d0, &two_point()), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(levy_oracle(&d0, &two_point()), 0.5, epsilon = 1e-3);
    }

    #[test]
    fn rho_examples() {
        let d0 = CompactMeasure::dirac(0.0);
        let d1 = CompactMeasure::dirac(1.0);
        assert_eq!(rho_metric(&two_point(), &two_point()), 0.0);
        assert_abs_diff_eq!(rho_metric(&d0, &d1), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(levy_oracle(&d0, &d1), 1.0, epsilon = 1e-3);
        let mix = CompactMeasure::atoms(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_abs_diff_eq!(rho_metric(&mix, &d0), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(levy_oracle(&mix, &d0), 0.5, epsilon = 1e-3);
    }

    #[test]
    fn levy_of_families_matches_oracle() {
        let a = CompactMeasure::arcsine(1.0).unwrap();
        let b = CompactMeasure::shifted_arcsine(0.3, 4.0).unwrap();
        let d = levy_distance(&a, &b);
        assert_abs_diff_eq!(d, levy_oracle(&a, &b), epsilon = 2e-3);
        assert!(levy_distance(&a, &a) < 1e-9);
    }

    #[test]
    fn cauchy_examples() {
        let z = c(0.3, 0.8);
        let g = CompactMeasure::dirac(0.7).cauchy_transform(z).unwrap();
        assert!((g - 1.0 / (z - 0.7)).norm() < 1e-15);
        let g = two_point().cauchy_transform(c(0.0, 1.0)).unwrap();
        assert!((g - c(0.0, -0.5)).norm() < 1e-15);
        let arc = CompactMeasure::arcsine(1.0).unwrap();
        let g = arc.cauchy_transform(c(0.0, 1.0)).unwrap();
        assert!((g - 1.0 / c(0.0, 5f64.sqrt())).norm() < 1e-12);
        assert!((quadrature_cauchy(&arc, c(0.0, 1.0)) - g).norm() < 1e-8);
        assert!(arc.cauchy_transform(c(0.5, 0.0)).is_err());
    }

    #[test]
    fn family_transforms_match_quadrature() {
        let fams = [
            CompactMeasure::shifted_arcsine(0.4, 4.0).unwrap(),
            CompactMeasure::slit(0.0, 1.0).unwrap(),
            CompactMeasure::slit(0.8, 1.0).unwrap(),
            CompactMeasure::slit(-1.5, 4.0).unwrap(),
        ];
        for mu in &fams {
            for z in [c(0.1, 0.5), c(-2.0, 1.0), c(3.0, 2.0), c(0.0, 0.2)] {
                let g = mu.cauchy_transform(z).unwrap();
                let q = quadrature_cauchy(mu, z);
                assert!((g - q).norm() < 1e-6, "{mu:?} at {z}: {g} vs {q}");
            }
        }
    }

    #[test]
    fn reciprocal_examples() {
        let z = c(0.2, 0.9);
        let f = CompactMeasure::dirac(1.3).reciprocal_cauchy(z).unwrap();
        assert!((f - (z - 1.3)).norm() < 1e-14);
        for n in [1u32, 4] {
            let arc = CompactMeasure::arcsine(f64::from(n)).unwrap();
            let p = SlitParams::new(0.0, n).unwrap();
            assert!((arc.reciprocal_cauchy(z).unwrap() - eval_slit(p, z)).norm() < 1e-12);
        }
        // slit law = delta_{-a} |> arcsine |> delta_a
        let a = 0.6;
        let slit = CompactMeasure::slit(a, 4.0).unwrap();
        let arc = CompactMeasure::arcsine(4.0).unwrap();
        let composed = arc.reciprocal_cauchy(z - a).unwrap() + a;
        assert!((slit.reciprocal_cauchy(z).unwrap() - composed).norm() < 1e-12);
        let p = SlitParams::new(a, 4).unwrap();
        assert!((slit.reciprocal_cauchy(z).unwrap() - eval_slit(p, z)).norm() < 1e-12);
    }

    #[test]
    fn slit_law_has_outside_atom() {
        let (a, n) = (0.8, 1.0);
        let mu = CompactMeasure::slit(a, n).unwrap();
        let (p, w) = CompactMeasure::slit_atom(a, n).unwrap();
        assert!(p < a - 2.0);
        // total mass and the jump at the atom
        assert_abs_diff_eq!(mu.cdf(10.0), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(mu.cdf(p) - mu.cdf(p - 1e-12), w, epsilon = 1e-9);
        // support hull is strictly larger than the univalence interval
        let (lo, _) = mu.support();
        let (lo_f, _) = mu.reciprocal_endpoints();
        assert!(lo < lo_f);
    }

    #[test]
    fn reciprocal_endpoints_match_support() {
        let mus = [
            CompactMeasure::arcsine(1.0).unwrap(),
            CompactMeasure::shifted_arcsine(-0.7, 4.0).unwrap(),
            CompactMeasure::shifted_arcsine(2.0, 9.0).unwrap(),
        ];
        for mu in &mus {
            let f = SigmaMap::from_measure(mu);
            let (a, b) = mu.support();
            let (ea, eb) = f.estimated_endpoints((a - 3.0, b + 3.0), 4000).unwrap();
            assert!((ea - a).abs() < 1e-6 && (eb - b).abs() < 1e-6);
        }
    }

    #[test]
    fn stieltjes_examples() {
        let s = InversionSchedule::default();
        let d0 = CompactMeasure::dirac(0.0);
        let m = stieltjes_invert(|z| d0.cauchy_transform(z).unwrap(), (0.5, 1.0), &s).unwrap();
        assert_abs_diff_eq!(m, 0.0, epsilon = 1e-6);
        let arc = CompactMeasure::arcsine(1.0).unwrap();
        let m = stieltjes_invert(|z| arc.cauchy_transform(z).unwrap(), (-2.0, 2.0), &s).unwrap();
        assert_abs_diff_eq!(m, 1.0, epsilon = 1e-4);
        let tp = two_point();
        let m = stieltjes_invert(|z| tp.cauchy_transform(z).unwrap(), (-1.5, 0.0), &s).unwrap();
        assert_abs_diff_eq!(m, 0.5, epsilon = 1e-4);
        // atom on an endpoint counts half
        let m = stieltjes_invert(|z| tp.cauchy_transform(z).unwrap(), (-1.0, 0.0), &s).unwrap();
        assert_abs_diff_eq!(m, 0.25, epsilon = 1e-4);
    }

    #[test]
    fn stieltjes_recovers_atomic_cdf() {
        let mu = CompactMeasure::atoms(vec![(-0.8, 0.2), (0.1, 0.5), (1.2, 0.3)]).unwrap();
        let s = InversionSchedule::default();
        for x in [-0.5, 0.5, 2.0] {
            let m = stieltjes_invert(|z| mu.cauchy_transform(z).unwrap(), (-3.0, x), &s).unwrap();
            assert_abs_diff_eq!(m, mu.cdf(x), epsilon = 1e-3);
        }
    }

    #[test]
    fn convolution_of_point_masses() {
        let g = ConvolutionGrid::default();
        let l = monotone_convolve(&CompactMeasure::dirac(0.4), &CompactMeasure::dirac(-1.1), &g).unwrap();
        assert_eq!(l, CompactMeasure::dirac(0.4 - 1.1));
        let arc = CompactMeasure::arcsine(4.0).unwrap();
        let l = monotone_convolve(&arc, &CompactMeasure::dirac(0.5), &g).unwrap();
        assert_eq!(l, CompactMeasure::shifted_arcsine(0.5, 4.0).unwrap());
        let z = c(0.3, 0.4);
        let direct = composed_reciprocal(&arc, &CompactMeasure::dirac(0.5), z).unwrap();
        assert!((l.reciprocal_cauchy(z).unwrap() - direct).norm() < 1e-14);
        // associativity on point masses
        let (a, b, cc) = (CompactMeasure::dirac(0.3), CompactMeasure::dirac(0.9), CompactMeasure::dirac(-2.0));
        let left = monotone_convolve(&monotone_convolve(&a, &b, &g).unwrap(), &cc, &g).unwrap();
        let right = monotone_convolve(&a, &monotone_convolve(&b, &cc, &g).unwrap(), &g).unwrap();
        assert_eq!(left.support(), right.support());
    }

    #[test]
    fn arcsine_convolution_is_wider_arcsine() {
        let arc = CompactMeasure::arcsine(1.0).unwrap();
        let l = monotone_convolve(&arc, &arc, &ConvolutionGrid::default()).unwrap();
        assert_abs_diff_eq!(l.mean(), 0.0, epsilon = 1e-3);
        assert_abs_diff_eq!(l.variance(), 4.0, epsilon = 2e-2);
        // sqrt(sqrt(z^2 - 4)^2 - 4) = sqrt(z^2 - 8)
        let target = CompactMeasure::arcsine(0.5).unwrap();
        assert!(levy_distance(&l, &target) < 2e-2);
    }

    #[test]
    fn shifted_arcsine_convolution_moments() {
        // f_mu(f_nu(z)) = z - (a + b) + O(1/z), so the means add
        let g = ConvolutionGrid::default();
        for (a, n, b, m) in [(0.3, 1.0, -0.2, 4.0), (-0.5, 4.0, 1.0, 1.0)] {
            let mu = CompactMeasure::shifted_arcsine(a, n).unwrap();
            let nu = CompactMeasure::shifted_arcsine(b, m).unwrap();
            let l = monotone_convolve(&mu, &nu, &g).unwrap();
            assert_abs_diff_eq!(l.mean(), a + b, epsilon = 1e-6);
        }
        // support of arcsine(1) |> arcsine(4) is [-sqrt 5, sqrt 5]
        let l = monotone_convolve(
            &CompactMeasure::arcsine(1.0).unwrap(),
            &CompactMeasure::arcsine(4.0).unwrap(),
            &g,
        )
        .unwrap();
        let (lo, hi) = l.support();
        let cell = 9.0 / 400.0;
        assert!((lo + 5f64.sqrt()).abs() < cell && (hi - 5f64.sqrt()).abs() < cell);
    }

    #[test]
    fn sigma_distance_examples() {
        let id = SigmaMap::identity();
        assert_eq!(sigma_distance(&id, &id, 1.0).unwrap(), 0.0);
        let f = SigmaMap::from_measure(&CompactMeasure::dirac(1.0));
        let g = SigmaMap::from_measure(&CompactMeasure::dirac(-1.0));
        assert_abs_diff_eq!(sigma_distance(&f, &g, 0.5).unwrap(), 4.0, epsilon = 1e-12);
        let r = SigmaMap::from_slit(SlitParams::new(0.0, 1).unwrap());
        let grid = SigmaGrid::new(1.0);
        let sup = grid
            .points()
            .map(|z| {
                let s = (z * z - 4.0).sqrt();
                (if s.im < 0.0 { -s } else { s } - z).norm()
            })
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(sup, 5f64.sqrt() - 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sigma_distance(&r, &id, 1.0).unwrap(), sup + 2.0, epsilon = 1e-12);
        assert!(sigma_distance(&r, &id, 0.0).is_err());
    }

    #[test]
    fn path_distance_examples() {
        let grid = SigmaGrid::new(1.0);
        let times = vec![0.0, 0.5, 1.0];
        let p = SigmaPath::new(times.clone(), vec![SigmaMap::identity(); 3]).unwrap();
        assert_eq!(path_distance(&p, &p, &grid).unwrap(), 0.0);
        let shifted = SigmaMap::new(|z| z + 1.0, (0.0, 0.0));
        let q = SigmaPath::new(times, vec![shifted; 3]).unwrap();
        let d = path_distance(&p, &q, &grid).unwrap();
        assert_abs_diff_eq!(d, 0.5, epsilon = 2f64.powi(-30));
        let r = SigmaPath::new(vec![0.0, 2.0], vec![SigmaMap::identity(); 2]).unwrap();
        assert!(path_distance(&p, &r, &grid).is_err());
        assert!(SigmaPath::new(vec![0.1], vec![SigmaMap::identity()]).is_err());
    }

    #[test]
    fn json_documents() {
        let m: CompactMeasure = serde_json::from_str(r#"{"atoms": [[0, 0.25], [1, 0.75]]}"#).unwrap();
        assert_eq!(m.support(), (0.0, 1.0));
        let m: CompactMeasure = serde_json::from_str(r#"{"family": "arcsine", "n": 4, "shift": 1}"#).unwrap();
        assert_eq!(m, CompactMeasure::shifted_arcsine(1.0, 4.0).unwrap());
        let back: CompactMeasure = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<CompactMeasure>(r#"{"atoms": [[0, 0.5]]}"#).is_err());
        assert!(serde_json::from_str::<CompactMeasure>(r#"{"family": "cauchy", "n": 1}"#).is_err());
    }

    fn atomic() -> impl Strategy<Value = CompactMeasure> {
        prop::collection::vec((-2.0f64..2.0, 0.05f64..1.0), 1..5).prop_map(|v| {
            let total: f64 = v.iter().map(|a| a.1).sum();
            let atoms: Vec<(f64, f64)> = v.into_iter().map(|(x, w)| (x, w / total)).collect();
            let sum: f64 = atoms.iter().map(|a| a.1).sum();
            let mut atoms = atoms;
            atoms[0].1 += 1.0 - sum;
            CompactMeasure::atoms(atoms).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn levy_is_a_metric(a in atomic(), b in atomic(), d in atomic()) {
            let ab = levy_distance(&a, &b);
            prop_assert!((ab - levy_distance(&b, &a)).abs() < 1e-12);
            prop_assert_eq!(levy_distance(&a, &a), 0.0);
            prop_assert!(ab <= levy_distance(&a, &d) + levy_distance(&d, &b) + 1e-12);
            let r = rho_metric(&a, &b);
            prop_assert!(r <= rho_metric(&a, &d) + rho_metric(&d, &b) + 1e-12);
            if a != b { prop_assert!(ab > 0.0); }
        }

        #[test]
        fn levy_matches_brute_force(a in atomic(), b in atomic()) {
            prop_assert!((levy_distance(&a, &b) - levy_oracle(&a, &b)).abs() <= 1.1e-3);
        }

        #[test]
        fn cauchy_symmetry_and_bound(mu in atomic(), x in -4.0f64..4.0, y in 0.01f64..5.0) {
            let z = c(x, y);
            let g = mu.cauchy_transform(z).unwrap();
            prop_assert!((mu.cauchy_transform(z.conj()).unwrap() - g.conj()).norm() < 1e-12);
            prop_assert!(g.norm() <= 1.0 / y + 1e-12);
            let f = mu.reciprocal_cauchy(z).unwrap();
            prop_assert!(f.im / y >= 1.0 - 1e-9);
        }

        #[test]
        fn family_reciprocal_ratio(center in -2.0f64..2.0, x in -4.0f64..4.0, y in 0.01f64..5.0) {
            let mu = CompactMeasure::slit(center, 2.0).unwrap();
            let f = mu.reciprocal_cauchy(c(x, y)).unwrap();
            prop_assert!(f.im / y >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn reciprocal_ratio_tends_to_one() {
        let mu = CompactMeasure::arcsine(1.0).unwrap();
        let ratio = |y: f64| mu.reciprocal_cauchy(c(0.0, y)).unwrap().im / y;
        assert!(ratio(1.0) > ratio(10.0) && ratio(10.0) > ratio(100.0));
        assert_abs_diff_eq!(ratio(1e4), 1.0, epsilon = 1e-7);
    }
}
