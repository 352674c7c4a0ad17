//! Elementary slit maps of the upper half-plane and their compositions.
//!
//! The basic building block is
//!
//! ```text
//! r_n(a; z) = a + sqrt((z - a)^2 - 4/n)
//! ```
//!
//! which maps the closed upper half-plane onto itself minus the vertical slit
//! `{Re = a, 0 <= Im <= 2/sqrt(n)}`. The square root is evaluated as the product
//! `sqrt(z - a - c) * sqrt(z - a + c)` (with `c = 2/sqrt(n)`), each factor
//! taken with argument in `[0, pi/2]`. That product is continuous up to the
//! real axis, so the same formula gives the boundary extension used for hull
//! geometry.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the closed upper half-plane.
pub type ComplexPoint = Complex64;

/// Square root with argument in `[0, pi/2]`, treating the input as lying in
/// the closed upper half-plane (the sign of a zero imaginary part is ignored).
pub(crate) fn upper_sqrt(w: Complex64) -> Complex64 {
    let im = w.im.abs();
    let r = w.re.hypot(im);
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if w.re >= 0.0 {
        let s = ((r + w.re) * 0.5).sqrt();
        Complex64::new(s, im / (2.0 * s))
    } else {
        let t = ((r - w.re) * 0.5).sqrt();
        Complex64::new(im / (2.0 * t), t)
    }
}

/// `sqrt(u^2 - c^2)` on the closed upper half-plane, the branch that behaves
/// like `u` at infinity.
pub(crate) fn slit_root(u: Complex64, half_width: f64) -> Complex64 {
    upper_sqrt(u - half_width) * upper_sqrt(u + half_width)
}

/// Inverse of [`slit_root`]: the `u` in the closed upper half-plane with
/// `u^2 = v^2 + c^2`. Points on the slit itself go to the right edge of the
/// base interval.
pub(crate) fn unslit_root(v: Complex64, half_width: f64) -> Complex64 {
    let c2 = half_width * half_width;
    if v.im == 0.0 {
        let r = (v.re * v.re + c2).sqrt();
        return Complex64::new(if v.re < 0.0 { -r } else { r }, 0.0);
    }
    if v.re == 0.0 {
        let y = v.im.abs();
        let d = c2 - y * y;
        return if d >= 0.0 {
            Complex64::new(d.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-d).sqrt())
        };
    }
    let u = (v * v + c2).sqrt();
    if u.im < 0.0 {
        -u
    } else {
        u
    }
}

/// Slit map of a constant driver `a` run for `duration`: the reverse Loewner
/// flow with constant forcing, `a + sqrt((z - a)^2 - 4 * duration)`.
pub fn slit_flow(center: f64, duration: f64, z: Complex64) -> Complex64 {
    center + slit_root(z - center, 2.0 * duration.sqrt())
}

/// Parameters of a single slit map `r_n(a; .)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitParams {
    center: f64,
    n: u32,
}

impl SlitParams {
    pub fn new(center: f64, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("slit scale n must be at least 1".into()));
        }
        if !center.is_finite() {
            return Err(Error::Config(format!("slit center {center} is not finite")));
        }
        Ok(Self { center, n })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Height `2/sqrt(n)` of the slit, which is also the half-width of its
    /// base interval.
    pub fn height(&self) -> f64 {
        2.0 / f64::from(self.n).sqrt()
    }
}

/// `r_n(a; z)`.
pub fn eval_slit(p: SlitParams, z: Complex64) -> Complex64 {
    p.center + slit_root(z - p.center, p.height())
}

/// `r_n(a; .)^{-1}(w) = a + sqrt((w - a)^2 + 4/n)`, branch into the closed
/// upper half-plane.
pub fn eval_slit_inverse(p: SlitParams, w: Complex64) -> Complex64 {
    p.center + unslit_root(w - p.center, p.height())
}

/// State of a discrete Loewner evolution: scale `n` and the driver values
/// `S(0), ..., S(m-1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlitChain {
    n: u32,
    drivers: Vec<f64>,
}

impl SlitChain {
    pub fn new(n: u32, drivers: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("chain scale n must be at least 1".into()));
        }
        if let Some(bad) = drivers.iter().find(|a| !a.is_finite()) {
            return Err(Error::Config(format!("driver value {bad} is not finite")));
        }
        Ok(Self { n, drivers })
    }

    /// The empty chain `D_n(0; z) = z`.
    pub fn identity(n: u32) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn drivers(&self) -> &[f64] {
        &self.drivers
    }

    /// Step count `m`.
    pub fn len(&self) -> usize {
        self.drivers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drivers.is_empty()
    }

    /// Slit height `2/sqrt(n)`.
    pub fn height(&self) -> f64 {
        2.0 / f64::from(self.n).sqrt()
    }

    /// Half-plane capacity `m/n` of the hull (the `2t/z` coefficient of the
    /// inverse map is `2m/n`).
    pub fn capacity(&self) -> f64 {
        self.len() as f64 / f64::from(self.n)
    }

    pub fn push(&mut self, driver: f64) -> Result<()> {
        if !driver.is_finite() {
            return Err(Error::Config(format!("driver value {driver} is not finite")));
        }
        self.drivers.push(driver);
        Ok(())
    }

    /// The chain made of the first `m` drivers.
    pub fn prefix(&self, m: usize) -> SlitChain {
        SlitChain {
            n: self.n,
            drivers: self.drivers[..m.min(self.len())].to_vec(),
        }
    }

    /// `D_n(m; z) = r(S(0); r(S(1); ... r(S(m-1); z)))`: the newest slit map is
    /// applied first.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let c = self.height();
        self.drivers
            .iter()
            .rev()
            .fold(z, |w, &a| a + slit_root(w - a, c))
    }

    /// Continuous extension of `D_n(m; .)` at a real point.
    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.eval(Complex64::new(x, 0.0))
    }

    /// `g_n(m) = D_n(m)^{-1}`, applying `r(S(0))^{-1}` first.
    pub fn eval_inverse(&self, w: Complex64) -> Complex64 {
        let c = self.height();
        self.drivers
            .iter()
            .fold(w, |u, &a| a + unslit_root(u - a, c))
    }

    /// Base of the branch created at step `j`, i.e. `D(j)` evaluated at the real
    /// point `S(j)`. Real (up to rounding) when the branch starts a new root.
    pub fn base(&self, j: usize) -> Complex64 {
        self.prefix(j).eval_real(self.drivers[j])
    }

    /// Tip of the branch created at step `j`: `D(j)(S(j) + i 2/sqrt(n))`.
    pub fn tip(&self, j: usize) -> Complex64 {
        self.prefix(j)
            .eval(Complex64::new(self.drivers[j], self.height()))
    }

    /// Sample the branch created at step `j` as the image of its slit under
    /// `D(j)`, from base to tip.
    pub fn boundary_trace(&self, j: usize, points: usize) -> Vec<Complex64> {
        let head = self.prefix(j);
        let a = self.drivers[j];
        let h = self.height();
        let points = points.max(2);
        (0..points)
            .map(|k| {
                let y = h * k as f64 / (points - 1) as f64;
                head.eval(Complex64::new(a, y))
            })
            .collect()
    }

    /// Convex closure `[A, B]` of the real points sent off the real axis, i.e.
    /// the interval outside which the chain map extends univalently. `None` for
    /// the empty chain.
    pub fn hull_endpoints(&self) -> Option<(f64, f64)> {
        let c = self.height();
        let mut iter = self.drivers.iter();
        let &first = iter.next()?;
        let mut lo = first - c;
        let mut hi = first + c;
        for &s in iter {
            hi = if hi > s { s + (hi - s).hypot(c) } else { s + c };
            lo = if lo < s { s - (s - lo).hypot(c) } else { s - c };
        }
        Some((lo, hi))
    }

    /// Shifted increment `H~(m, m+k)`: the chain over `S(j) - S(m)` for
    /// `j = m, ..., m+k-1`.
    pub fn increment(&self, m: usize, k: usize) -> Result<SlitChain> {
        if m + k > self.len() {
            return Err(Error::Domain(format!(
                "increment ({m}, {}) exceeds chain length {}",
                m + k,
                self.len()
            )));
        }
        if k == 0 {
            return SlitChain::identity(self.n);
        }
        let base = self.drivers[m];
        Ok(SlitChain {
            n: self.n,
            drivers: self.drivers[m..m + k].iter().map(|s| s - base).collect(),
        })
    }

    /// Chain driven by `-S`, which equals `chi o D o chi` with
    /// `chi(x + iy) = -x + iy`.
    pub fn reflected(&self) -> SlitChain {
        SlitChain {
            n: self.n,
            drivers: self.drivers.iter().map(|s| -s).collect(),
        }
    }

    /// The unit-scale chain `D_1` with drivers `sqrt(n) S`, so that
    /// `D_n(m; z/sqrt(n)) = D_1(m; z)/sqrt(n)`.
    pub fn to_unit_scale(&self) -> SlitChain {
        let k = f64::from(self.n).sqrt();
        SlitChain {
            n: 1,
            drivers: self.drivers.iter().map(|s| s * k).collect(),
        }
    }
}

/// `D_n(m; z)` for the chain `c`.
pub fn eval_chain(c: &SlitChain, z: Complex64) -> Complex64 {
    c.eval(z)
}

/// Boundary value of the chain map at the real point `x`; non-real exactly
/// when `x` lies under an existing branch.
pub fn chain_inverse_real(c: &SlitChain, x: f64) -> Complex64 {
    c.eval_real(x)
}
