//! One-step moments and return frequencies of the Bessel-type chain.

use dle::bessel::{drift_estimate, recurrence_experiment, ChainConfig};
use dle::walk::IncrementLaw;

fn main() -> dle::Result<()> {
    let law = IncrementLaw::gaussian(1.0)?;
    for kappa in [1.0, 2.0, 4.0, 8.0] {
        let d = drift_estimate(100.0, kappa, &law, 200_000, 11)?;
        println!(
            "kappa {kappa}: 2y E[dY] = {:.4} +- {:.4} (4/kappa = {:.4}), E[dY^2] = {:.4} +- {:.4}",
            d.scaled_drift, d.scaled_drift_se, 4.0 / kappa, d.second_moment, d.second_moment_se
        );
    }
    for kappa in [2.0, 8.0] {
        let cfg = ChainConfig { kappa, law: IncrementLaw::bernoulli(1.0)?, y0: 5.0, steps: 10_000, seed: 3 };
        let r = recurrence_experiment(&cfg, 5.0, 200)?;
        println!("kappa {kappa}: returned {}/{} ({:.3}, 95% CI [{:.3}, {:.3}])",
            r.returned, r.replicas, r.fraction, r.ci_low, r.ci_high);
    }
    Ok(())
}
