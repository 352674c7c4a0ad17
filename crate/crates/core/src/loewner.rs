//! Numerical chordal Loewner flows.
//!
//! Forward equation: `dg/dt = 2 / (g - psi(t))`, `g(0) = z`.
//! Reverse equation: `dh/ds = -2 / (h - psi(t - s))`, `h(0) = z`, whose value
//! at `s = t` is the inverse map `f(t, psi; z)`.
//!
//! Both are integrated with an embedded Dormand-Prince 5(4) pair. The right-hand
//! side has Lipschitz constant `2/|y - psi|^2`, so on top of the usual error
//! control every step is capped at `0.05 |y - psi|^2`. With that cap the
//! integrator can march straight into a swallowing singularity: `|g - psi|^2`
//! shrinks by a fixed factor per step, which costs a few hundred steps to go
//! from order one down to `1e-9`.
//!
//! Driver breakpoints (knots of a walk) are never stepped across, and stage
//! evaluations are kept inside the current segment so step drivers are read on
//! the correct piece.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::halfplane::slit_flow;
use crate::walk::WalkPath;

/// Separation `|g - psi|` below which a point counts as swallowed.
pub const SWALLOW_EPS: f64 = 1e-9;

const SINGULAR_STEP: f64 = 0.05;
const RANGE_SAMPLES: usize = 2048;

/// A real driving function on `[0, horizon]`.
#[derive(Clone)]
pub struct DriverFunction {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    horizon: f64,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for DriverFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriverFunction")
            .field("horizon", &self.horizon)
            .field("breakpoints", &self.breakpoints.len())
            .finish()
    }
}

impl DriverFunction {
    /// Driver given by an arbitrary function. `breakpoints` lists the times
    /// where it has kinks or jumps.
    pub fn from_fn<F>(f: F, horizon: f64, mut breakpoints: Vec<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        breakpoints.retain(|b| *b > 0.0 && *b < horizon);
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Self {
            eval: Arc::new(f),
            horizon,
            breakpoints,
        }
    }

    pub fn constant(value: f64, horizon: f64) -> Self {
        Self::from_fn(move |_| value, horizon, Vec::new())
    }

    /// `S_n(t)` read by linear interpolation.
    pub fn interpolated(walk: &WalkPath) -> Self {
        let w = walk.clone();
        let h = walk.horizon();
        Self::from_fn(
            move |t| w.interpolate(t.clamp(0.0, h)).expect("clamped"),
            h,
            knot_times(walk),
        )
    }

    /// `S_n` read as a left-continuous step function.
    pub fn piecewise_constant(walk: &WalkPath) -> Self {
        let w = walk.clone();
        let h = walk.horizon();
        Self::from_fn(
            move |t| w.piecewise_constant(t.clamp(0.0, h)).expect("clamped"),
            h,
            knot_times(walk),
        )
    }

    /// `psi + delta`, keeping the breakpoints of `psi`.
    pub fn perturbed<F>(&self, delta: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let base = self.eval.clone();
        Self::from_fn(
            move |t| base(t) + delta(t),
            self.horizon,
            self.breakpoints.clone(),
        )
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn sample_times(&self, t: f64) -> Vec<f64> {
        let mut times: Vec<f64> = (0..=RANGE_SAMPLES)
            .map(|k| t * k as f64 / RANGE_SAMPLES as f64)
            .collect();
        times.extend(self.breakpoints.iter().copied().filter(|b| *b <= t));
        times
    }

    /// `(min, max)` of the driver on `[0, t]`, exact for piecewise-linear
    /// drivers and sampled otherwise.
    pub fn range(&self, t: f64) -> (f64, f64) {
        self.sample_times(t)
            .into_iter()
            .map(|s| self.value(s))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// `sup |psi - phi|` over `[0, t]`, sampled at both drivers' breakpoints
    /// and a uniform grid.
    pub fn sup_distance(&self, other: &DriverFunction, t: f64) -> f64 {
        let mut times = self.sample_times(t);
        times.extend(other.breakpoints.iter().copied().filter(|b| *b <= t));
        times
            .into_iter()
            .map(|s| (self.value(s) - other.value(s)).abs())
            .fold(0.0, f64::max)
    }
}

fn knot_times(walk: &WalkPath) -> Vec<f64> {
    let n = f64::from(walk.n());
    (1..walk.len()).map(|k| k as f64 / n).collect()
}

/// Whether a forward trajectory is still in the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowStatus {
    Alive,
    Swallowed,
}

/// Outcome of [`solve_forward`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowResult {
    /// `g(t; z)` when alive, the collision value otherwise.
    pub value: Complex64,
    pub status: FlowStatus,
    pub swallow_time: Option<f64>,
}

enum March {
    Done(Complex64),
    Hit { time: f64, value: Complex64, sep: f64 },
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrate `y' = sign * 2 / (y - drive(s))` from `s = 0` to `s_end`.
/// `stops` are interior times where the driver may be non-smooth or where the
/// caller wants the state reported through `on_stop`.
fn march(
    mut y: Complex64,
    s_end: f64,
    sign: f64,
    drive: &dyn Fn(f64) -> f64,
    stops: &[f64],
    tol: f64,
    hit_eps: f64,
    mut on_stop: impl FnMut(f64, Complex64),
) -> March {
    let mut s = 0.0;
    let mut h = (s_end * 0.01).max(1e-4);
    let mut lo = 0.0;
    let ends = stops
        .iter()
        .copied()
        .filter(|b| *b > 0.0 && *b < s_end)
        .chain(std::iter::once(s_end));
    for hi in ends {
        let pad = (hi - lo) * 1e-12;
        let inside = |t: f64| t.clamp(lo + pad, hi - pad);
        while s < hi {
            let d0 = drive(inside(s));
            let gap = y - d0;
            let sep = gap.norm();
            if sep < hit_eps {
                return March::Hit { time: s, value: y, sep };
            }
            let step = h.min(SINGULAR_STEP * sep * sep).min(hi - s);
            if step <= 1e-17 * (1.0 + s) {
                return March::Hit { time: s, value: y, sep };
            }
            let last = step >= hi - s;
            let mut k = [Complex64::new(0.0, 0.0); 7];
            let mut finite = true;
            for i in 0..7 {
                let mut yi = y;
                for j in 0..i {
                    yi += k[j] * (A[i][j] * step);
                }
                let d = drive(inside(s + C[i] * step));
                k[i] = sign * 2.0 / (yi - d);
                if !(k[i].re.is_finite() && k[i].im.is_finite()) {
                    finite = false;
                    break;
                }
            }
            if !finite {
                h = step * 0.25;
                continue;
            }
            let y_new = y + k
                .iter()
                .zip(A[6].iter())
                .map(|(ki, &b)| ki * (b * step))
                .sum::<Complex64>();
            let err = k
                .iter()
                .zip(E.iter())
                .map(|(ki, &e)| ki * e)
                .sum::<Complex64>()
                .norm()
                * step;
            let scale = tol * (1.0 + y.norm());
            if err <= scale {
                let s_new = if last { hi } else { s + step };
                // a real trajectory that jumped across the driver has collided
                if y.im == 0.0 && y_new.im == 0.0 {
                    let d1 = drive(inside(s_new));
                    if (y_new.re - d1) * gap.re <= 0.0 {
                        return March::Hit {
                            time: s_new,
                            value: y_new,
                            sep: 0.0,
                        };
                    }
                }
                s = s_new;
                y = y_new;
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * (scale / err).powf(0.2)).clamp(0.2, 5.0)
                };
                h = step * fac;
            } else {
                h = step * (0.9 * (scale / err).powf(0.2)).max(0.1);
            }
        }
        on_stop(hi, y);
        lo = hi;
    }
    March::Done(y)
}

fn check_time(d: &DriverFunction, t: f64) -> Result<()> {
    if !(t >= 0.0) || t > d.horizon() * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::Domain(format!(
            "time {t} outside driver horizon [0, {}]",
            d.horizon()
        )));
    }
    Ok(())
}

fn check_point(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.im < 0.0 {
        return Err(Error::Domain(format!(
            "{z} is not a point of the closed upper half-plane"
        )));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Forward Loewner flow `g(t, psi; z)` with swallow detection.
///
/// A trajectory is declared swallowed once `|g - psi| < SWALLOW_EPS`, or once
/// the capped step drops below the resolution of the time variable (around
/// `|g - psi| ~ 1e-8` for times of order one). The swallow time is then
/// completed with the local square-root law `(g - psi)^2 ~ 4 (tau - t)`.
pub fn solve_forward(d: &DriverFunction, z: Complex64, t: f64, tol: f64) -> Result<FlowResult> {
    check_time(d, t)?;
    check_point(z)?;
    check_tol(tol)?;
    if z.im == 0.0 && z.re == d.value(0.0) {
        return Ok(FlowResult {
            value: z,
            status: FlowStatus::Swallowed,
            swallow_time: Some(0.0),
        });
    }
    let drive = |s: f64| d.value(s);
    match march(z, t, 1.0, &drive, d.breakpoints(), tol, SWALLOW_EPS, |_, _| {}) {
        March::Done(value) => Ok(FlowResult {
            value,
            status: FlowStatus::Alive,
            swallow_time: None,
        }),
        March::Hit { time, value, sep } => Ok(FlowResult {
            value,
            status: FlowStatus::Swallowed,
            swallow_time: Some((time + 0.25 * sep * sep).min(t)),
        }),
    }
}

fn reverse_stops(d: &DriverFunction, t: f64, extra: &[f64]) -> Vec<f64> {
    let mut stops: Vec<f64> = d
        .breakpoints()
        .iter()
        .filter(|b| **b < t)
        .map(|b| t - b)
        .chain(extra.iter().copied())
        .filter(|s| *s > 0.0 && *s < t)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops
}

/// Reverse flow `h(t, psi; z) = f(t, psi; z)`.
///
/// For interior `z` the imaginary part only grows, so the flow is global. A
/// real `z` whose trajectory meets the driver yields
/// [`Error::BoundaryCollision`].
pub fn solve_reverse(d: &DriverFunction, z: Complex64, t: f64, tol: f64) -> Result<Complex64> {
    let values = solve_reverse_path(d, z, t, &[t], tol)?;
    Ok(values[0])
}

/// Reverse flow with horizon `t`, reported at each `s` of `s_grid` (sorted,
/// inside `[0, t]`).
pub fn solve_reverse_path(
    d: &DriverFunction,
    z: Complex64,
    t: f64,
    s_grid: &[f64],
    tol: f64,
) -> Result<Vec<Complex64>> {
    check_time(d, t)?;
    check_point(z)?;
    check_tol(tol)?;
    if s_grid.windows(2).any(|w| w[1] < w[0]) || s_grid.iter().any(|s| *s < 0.0 || *s > t) {
        return Err(Error::Domain("output times must be sorted inside [0, t]".into()));
    }
    let mut out = Vec::with_capacity(s_grid.len());
    let mut next = 0;
    while next < s_grid.len() && s_grid[next] == 0.0 {
        out.push(z);
        next += 1;
    }
    if t == 0.0 {
        return Ok(out);
    }
    let stops = reverse_stops(d, t, s_grid);
    let drive = |s: f64| d.value(t - s);
    let hit_eps = if z.im > 0.0 { 0.0 } else { SWALLOW_EPS };
    let record = |s: f64, y: Complex64| {
        while next < s_grid.len() && s_grid[next] <= s {
            out.push(y);
            next += 1;
        }
    };
    match march(z, t, -1.0, &drive, &stops, tol, hit_eps, record) {
        March::Done(_) => Ok(out),
        March::Hit { time, .. } => Err(Error::BoundaryCollision { time }),
    }
}

/// Whether the reverse flow from the real point `x` meets the driver before
/// time `t`.
fn collides(d: &DriverFunction, x: f64, t: f64, tol: f64) -> bool {
    if x == d.value(t) {
        return true;
    }
    let drive = |s: f64| d.value(t - s);
    let stops = reverse_stops(d, t, &[]);
    matches!(
        march(Complex64::new(x, 0.0), t, -1.0, &drive, &stops, tol, SWALLOW_EPS, |_, _| {}),
        March::Hit { .. }
    )
}

/// Piecewise-constant reverse flow `h_n(s, psi; z)` with horizon `t`, where
/// `psi = S_n` is read at the left knot. Solved exactly by composing slit
/// flows over the constant pieces.
pub fn piecewise_reverse_at(walk: &WalkPath, z: Complex64, t: f64, s: f64) -> Result<Complex64> {
    let horizon = walk.horizon();
    if !(t >= 0.0) || t > horizon * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::Domain(format!(
            "time {t} outside walk horizon [0, {horizon}]"
        )));
    }
    if !(s >= 0.0 && s <= t) {
        return Err(Error::Domain(format!("flow time {s} outside [0, {t}]")));
    }
    check_point(z)?;
    let n = f64::from(walk.n());
    let stop = t - s;
    let mut u = t.min(horizon);
    let mut w = z;
    while u > stop {
        let nu = u * n;
        let k = nu.round();
        let piece = if (nu - k).abs() <= 1e-9 {
            if k < 1.0 {
                break;
            }
            k as usize - 1
        } else {
            nu.floor() as usize
        };
        let start = (piece as f64 / n).max(stop);
        w = slit_flow(walk.knot(piece), u - start, w);
        u = start;
    }
    Ok(w)
}

/// `h_n(t, psi; z) = f_n(t, psi; z)`; at `t = m/n` this is the chain
/// `D_n(m; z)` over the walk's knots.
pub fn solve_reverse_piecewise(walk: &WalkPath, z: Complex64, t: f64) -> Result<Complex64> {
    piecewise_reverse_at(walk, z, t, t)
}

/// Hull interval `A(t, psi) = [A_f, B_f]`: the convex closure of the real
/// points whose reverse trajectory meets the driver, located by bisection to
/// within `tol`.
pub fn hull_interval(d: &DriverFunction, t: f64, tol: f64) -> Result<(f64, f64)> {
    check_time(d, t)?;
    check_tol(tol)?;
    let anchor = d.value(t);
    if t == 0.0 {
        let a = d.value(0.0);
        return Ok((a, a));
    }
    let ode_tol = (tol * 0.1).clamp(1e-13, 1e-9);
    let (lo_psi, hi_psi) = d.range(t);
    let reach = 2.0 * t.sqrt() + 1.0;
    let edge = |mut inside: f64, mut outside: f64| -> Result<f64> {
        let mut guard = 0;
        while collides(d, outside, t, ode_tol) {
            let span = outside - inside;
            inside = outside;
            outside += 2.0 * span;
            guard += 1;
            if guard > 60 {
                return Err(Error::Numerical("hull interval bracket did not close".into()));
            }
        }
        while (outside - inside).abs() > tol {
            let mid = 0.5 * (inside + outside);
            if collides(d, mid, t, ode_tol) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(0.5 * (inside + outside))
    };
    let right = edge(anchor, hi_psi.max(anchor) + reach)?;
    let left = edge(anchor, lo_psi.min(anchor) - reach)?;
    Ok((left, right))
}

/// Hausdorff distance between two real intervals.
pub fn interval_hausdorff(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// Half-plane capacity `t` read off `w(z) = z + b0 - 2t/z + ...` by a least
/// squares fit on the upper half of the circle `|z| = radius`.
pub fn capacity_estimate<F>(map: F, radius: f64) -> f64
where
    F: Fn(Complex64) -> Complex64,
{
    const POINTS: usize = 32;
    const TERMS: usize = 4;
    // basis (R/z)^j, j = 0..TERMS
    let mut gram = [[Complex64::new(0.0, 0.0); TERMS]; TERMS];
    let mut rhs = [Complex64::new(0.0, 0.0); TERMS];
    for k in 0..POINTS {
        let theta = std::f64::consts::PI * (k as f64 + 0.5) / POINTS as f64;
        let z = Complex64::from_polar(radius, theta);
        let y = map(z) - z;
        let basis: Vec<Complex64> = (0..TERMS)
            .map(|j| Complex64::from_polar(1.0, -(j as f64) * theta))
            .collect();
        for i in 0..TERMS {
            for j in 0..TERMS {
                gram[i][j] += basis[i].conj() * basis[j];
            }
            rhs[i] += basis[i].conj() * y;
        }
    }
    let coeffs = solve_dense(gram, rhs);
    -0.5 * coeffs[1].re * radius
}

fn solve_dense<const N: usize>(
    mut a: [[Complex64; N]; N],
    mut b: [Complex64; N],
) -> [Complex64; N] {
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            for k in col..N {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); N];
    for row in (0..N).rev() {
        let mut acc = b[row];
        for k in row + 1..N {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfplane::{eval_slit, SlitChain, SlitParams};
    use crate::walk::{sample_walk, sample_walk_stream, IncrementLaw};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn forward_constant_driver() {
        let zero = DriverFunction::constant(0.0, 3.0);
        // g = i sqrt(y^2 - 4t)
        let r = solve_forward(&zero, c(0.0, 2.0), 0.75, 1e-11).unwrap();
        assert_eq!(r.status, FlowStatus::Alive);
        assert!((r.value - c(0.0, 1.0)).norm() < 1e-8);

        let r = solve_forward(&zero, c(0.0, 2.0), 1.5, 1e-11).unwrap();
        assert_eq!(r.status, FlowStatus::Swallowed);
        assert_abs_diff_eq!(r.swallow_time.unwrap(), 1.0, epsilon = 1e-8);
        assert!(r.value.im < 1e-7, "{r:?}");

        // g = sqrt(x^2 + 4t)
        let r = solve_forward(&zero, c(1.0, 0.0), 2.0, 1e-11).unwrap();
        assert_eq!(r.status, FlowStatus::Alive);
        assert!((r.value - c(3.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn forward_immediate_swallow() {
        let d = DriverFunction::constant(0.4, 1.0);
        let r = solve_forward(&d, c(0.4, 0.0), 1.0, 1e-9).unwrap();
        assert_eq!(r.swallow_time, Some(0.0));
    }

    #[test]
    fn forward_rejects_bad_input() {
        let d = DriverFunction::constant(0.0, 1.0);
        assert!(solve_forward(&d, c(0.0, 1.0), 2.0, 1e-9).is_err());
        assert!(solve_forward(&d, c(0.0, -1.0), 0.5, 1e-9).is_err());
        assert!(solve_forward(&d, c(0.0, 1.0), 0.5, 0.0).is_err());
    }

    #[test]
    fn reverse_constant_driver() {
        let zero = DriverFunction::constant(0.0, 2.0);
        let h = solve_reverse(&zero, c(0.0, 1.0), 1.0, 1e-12).unwrap();
        assert!((h - c(0.0, 5f64.sqrt())).norm() < 1e-9);
        let z = c(0.3, 0.2);
        assert_eq!(solve_reverse(&zero, z, 0.0, 1e-12).unwrap(), z);
        for (a, n) in [(0.5, 1u32), (-1.2, 4), (2.0, 9)] {
            let d = DriverFunction::constant(a, 1.0);
            let t = 1.0 / f64::from(n);
            for z in [c(0.1, 0.5), c(a, 1.0), c(-3.0, 2.0)] {
                let h = solve_reverse(&d, z, t, 1e-12).unwrap();
                let exact = eval_slit(SlitParams::new(a, n).unwrap(), z);
                assert!((h - exact).norm() < 1e-9, "{h} vs {exact}");
            }
        }
    }

    #[test]
    fn reverse_real_collision() {
        let zero = DriverFunction::constant(0.0, 1.0);
        // (h)^2 = x^2 - 4s hits zero at s = x^2/4
        match solve_reverse(&zero, c(1.0, 0.0), 1.0, 1e-11) {
            Err(Error::BoundaryCollision { time }) => assert_abs_diff_eq!(time, 0.25, epsilon = 1e-6),
            other => panic!("expected collision, got {other:?}"),
        }
        let h = solve_reverse(&zero, c(3.0, 0.0), 1.0, 1e-12).unwrap();
        assert!((h - c(5f64.sqrt(), 0.0)).norm() < 1e-9);
    }

    #[test]
    fn piecewise_matches_chain() {
        let one = WalkPath::from_increments(1, vec![2.0]).unwrap();
        let h = solve_reverse_piecewise(&one, c(0.0, 1.0), 1.0).unwrap();
        assert!((h - c(0.0, 5f64.sqrt())).norm() < 1e-14);

        let two = WalkPath::from_increments(1, vec![2.0, -2.0]).unwrap();
        let h = solve_reverse_piecewise(&two, c(0.0, 1.0), 2.0).unwrap();
        let chain = SlitChain::new(1, vec![0.0, 2.0]).unwrap();
        assert!((h - chain.eval(c(0.0, 1.0))).norm() < 1e-14);
        assert_eq!(solve_reverse_piecewise(&two, c(0.5, 0.5), 0.0).unwrap(), c(0.5, 0.5));

        let law = IncrementLaw::gaussian(2.0).unwrap();
        let w = sample_walk(&law, 5, 23, 17).unwrap();
        let chain = w.to_chain();
        for m in 0..=w.len() {
            let t = m as f64 / 5.0;
            let z = c(0.2, 0.7);
            let h = solve_reverse_piecewise(&w, z, t).unwrap();
            assert!((h - chain.prefix(m).eval(z)).norm() < 1e-12 * (1.0 + h.norm()));
        }
    }

    #[test]
    fn piecewise_exact_agrees_with_ode() {
        let law = IncrementLaw::bernoulli(3.0).unwrap();
        let w = sample_walk(&law, 4, 8, 3).unwrap();
        let d = DriverFunction::piecewise_constant(&w);
        for t in [0.25, 0.6, 1.3, 2.0] {
            for z in [c(0.0, 0.5), c(1.5, 1.0), c(-2.0, 0.3)] {
                let exact = solve_reverse_piecewise(&w, z, t).unwrap();
                let ode = solve_reverse(&d, z, t, 1e-12).unwrap();
                assert!((exact - ode).norm() < 1e-8, "t={t}: {exact} vs {ode}");
            }
        }
    }

    #[test]
    fn hull_interval_constant_driver() {
        let zero = DriverFunction::constant(0.0, 5.0);
        let (a, b) = hull_interval(&zero, 1.0, 1e-9).unwrap();
        assert_abs_diff_eq!(a, -2.0, epsilon = 1e-7);
        assert_abs_diff_eq!(b, 2.0, epsilon = 1e-7);
        let (a, b) = hull_interval(&zero, 4.0, 1e-9).unwrap();
        assert_abs_diff_eq!(a, -4.0, epsilon = 1e-7);
        assert_abs_diff_eq!(b, 4.0, epsilon = 1e-7);
        let d = DriverFunction::constant(0.7, 1.0);
        assert_eq!(hull_interval(&d, 0.0, 1e-9).unwrap(), (0.7, 0.7));
    }

    #[test]
    fn hull_interval_of_step_driver_matches_chain() {
        let law = IncrementLaw::uniform(2.0).unwrap();
        for seed in 0..3 {
            let w = sample_walk(&law, 2, 6, seed).unwrap();
            let d = DriverFunction::piecewise_constant(&w);
            let (a, b) = hull_interval(&d, w.horizon(), 1e-8).unwrap();
            let (ea, eb) = w.to_chain().hull_endpoints().unwrap();
            assert!((a - ea).abs() < 1e-6, "{a} vs {ea}");
            assert!((b - eb).abs() < 1e-6, "{b} vs {eb}");
        }
    }

    #[test]
    fn capacity_values() {
        assert_abs_diff_eq!(capacity_estimate(|z| z, 1e3), 0.0, epsilon = 1e-12);
        let r = SlitParams::new(0.0, 1).unwrap();
        assert_abs_diff_eq!(capacity_estimate(|z| eval_slit(r, z), 1e3), 1.0, epsilon = 1e-3);
        let chain = SlitChain::new(1, vec![0.0, 1.0, 0.0, -1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(capacity_estimate(|z| chain.eval(z), 1e3), 5.0, epsilon = 1e-2);
        let zero = DriverFunction::constant(0.0, 1.0);
        let t = capacity_estimate(|z| solve_reverse(&zero, z, 0.5, 1e-12).unwrap(), 1e3);
        assert_abs_diff_eq!(t, 0.5, epsilon = 1e-3);
    }

    #[test]
    fn forward_then_reverse_is_identity() {
        let law = IncrementLaw::gaussian(1.0).unwrap();
        let tol = 1e-10;
        for seed in 0..4 {
            let w = sample_walk_stream(&law, 4, 8, 99, seed).unwrap();
            let d = DriverFunction::interpolated(&w);
            for z in [c(0.3, 1.5), c(-1.0, 2.0), c(2.5, 0.8)] {
                let fwd = solve_forward(&d, z, 1.5, tol).unwrap();
                if fwd.status == FlowStatus::Alive {
                    let back = solve_reverse(&d, fwd.value, 1.5, tol).unwrap();
                    assert!((back - z).norm() < 10.0 * tol * (1.0 + z.norm()) * 10.0, "{back} vs {z}");
                }
            }
        }
    }

    #[test]
    fn tolerance_controls_error() {
        let law = IncrementLaw::bernoulli(4.0).unwrap();
        let w = sample_walk(&law, 16, 16, 5).unwrap();
        let d = DriverFunction::interpolated(&w);
        for z in [c(0.0, 0.5), c(1.0, 0.25)] {
            for tol in [1e-6, 1e-8, 1e-10] {
                let coarse = solve_reverse(&d, z, 1.0, tol).unwrap();
                let fine = solve_reverse(&d, z, 1.0, tol * 1e-3).unwrap();
                assert!((coarse - fine).norm() < 10.0 * tol, "tol {tol}");
            }
        }
    }

    #[test]
    fn reverse_path_reports_requested_times() {
        let zero = DriverFunction::constant(0.0, 1.0);
        let grid = [0.0, 0.25, 0.5, 1.0];
        let z = c(0.0, 1.0);
        let path = solve_reverse_path(&zero, z, 1.0, &grid, 1e-12).unwrap();
        assert_eq!(path.len(), 4);
        for (s, h) in grid.iter().zip(&path) {
            assert!((h - c(0.0, (1.0 + 4.0 * s).sqrt())).norm() < 1e-9);
        }
        assert!(solve_reverse_path(&zero, z, 1.0, &[0.5, 0.2], 1e-9).is_err());
    }

    #[test]
    fn hausdorff_of_intervals() {
        assert_eq!(interval_hausdorff((0.0, 1.0), (0.5, 1.2)), 0.5);
    }
}
