//! Chordal Loewner flow: closed form agreement, swallowing and hull intervals.

use dle::halfplane::{eval_slit, SlitParams};
use dle::loewner::{hull_interval, solve_forward, solve_reverse, DriverFunction};
use dle::Complex64;

fn main() -> dle::Result<()> {
    let (a, n) = (0.25, 4u32);
    let t = 1.0 / f64::from(n);
    let driver = DriverFunction::constant(a, t);
    let mut worst = 0.0f64;
    for k in 0..10 {
        let z = Complex64::new(-1.0 + 0.2 * f64::from(k), 0.5);
        let flow = solve_reverse(&driver, z, t, 1e-12)?;
        worst = worst.max((flow - eval_slit(SlitParams::new(a, n)?, z)).norm());
    }
    println!("max |reverse flow - slit map| = {worst:.3e}");

    // the hull is the segment from a to a + 2i sqrt(t); a + iy is swallowed at y^2/4
    for z in [Complex64::new(a, 0.5), Complex64::new(a + 0.1, 0.5)] {
        let r = solve_forward(&driver, z, t, 1e-10)?;
        println!("forward flow from {z}: {:?}, swallow time {:?}", r.status, r.swallow_time);
    }

    let bm = DriverFunction::from_fn(|s: f64| (3.0 * s).sin(), 1.0, Vec::new());
    let (lo, hi) = hull_interval(&bm, 1.0, 1e-9)?;
    println!("hull interval of sin(3t) at t=1: [{lo:.6}, {hi:.6}]");
    Ok(())
}
