//! Hull-interval continuity and flow perturbation bounds on random driver pairs.

use dle::experiments::{continuity_bound_sweep, continuity_threshold, perturbation_sweep, random_driver_pairs};

fn main() -> dle::Result<()> {
    let t = 0.1;
    for delta in [0.25, 0.5, 1.0] {
        let threshold = continuity_threshold(t, delta);
        let pairs = random_driver_pairs(50, t, threshold, 7)?;
        let r = continuity_bound_sweep(&pairs, t, delta, 1e-9)?;
        println!("delta {delta}: threshold {threshold:.3e}, checked {}, violations {}, max distance {:.3e}",
            r.checked, r.violations, r.max_distance);
    }
    let pairs = random_driver_pairs(50, 0.2, 0.05, 8)?;
    let r = perturbation_sweep(&pairs, 0.2, 1.0, 9, 1e-10)?;
    println!("perturbation: {} points, violations {}, max ratio {:.3}", r.points_checked, r.violations, r.max_ratio);
    Ok(())
}
