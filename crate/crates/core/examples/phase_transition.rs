//! Connectivity of Bernoulli-driven hulls across kappa = 4.

use dle::forest::{build_forest, forest_stats, EPS_ROOT};
use dle::walk::{sample_walk, IncrementLaw};

fn main() -> dle::Result<()> {
    let (walks, m) = (200u64, 50usize);
    for kappa in [2.0, 3.0, 4.0, 4.41, 6.0, 8.0] {
        let law = IncrementLaw::bernoulli(kappa)?;
        let mut counts = Vec::new();
        for seed in 0..walks {
            let chain = sample_walk(&law, 1, m, seed)?.to_chain();
            counts.push(build_forest(&chain, EPS_ROOT)?.tree_count());
        }
        let min = counts.iter().min().unwrap();
        let max = counts.iter().max().unwrap();
        let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
        println!("kappa {kappa:>4}: trees min {min:>2} mean {mean:>6.2} max {max:>2}");
    }
    for kappa in [0.5, 2.0, 3.5] {
        let chain = dle::SlitChain::new(1, vec![0.0, f64::sqrt(kappa)])?;
        let stats = forest_stats(&build_forest(&chain, EPS_ROOT)?);
        println!("two-step branch height at kappa {kappa}: {:.12} (sqrt(4-kappa) = {:.12})",
            stats.branch_heights[1], (4.0 - kappa).sqrt());
    }
    Ok(())
}
