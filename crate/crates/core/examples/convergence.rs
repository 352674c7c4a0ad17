//! Distance between step-driven and interpolated-driver flows as n grows.

use dle::experiments::{convergence_sweep, ConvergenceConfig};
use dle::walk::IncrementLaw;

fn main() -> dle::Result<()> {
    let mut cfg = ConvergenceConfig::new(IncrementLaw::bernoulli(2.0)?, 1.0, vec![4, 16, 64], 1);
    cfg.replicas = 5;
    let report = convergence_sweep(&cfg)?;
    print!("{}", report.to_csv());
    if let Some(trend) = report.trend {
        println!("spearman rho = {:.3}, one-sided p = {:.4}", trend.rho, trend.p_negative);
    }
    println!("bound violations: {}", report.bound_violations);
    Ok(())
}
