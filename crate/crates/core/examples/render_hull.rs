//! Render a sampled hull forest to SVG.

use dle::forest::{build_forest, EPS_ROOT};
use dle::svg::render_forest;
use dle::walk::{sample_walk, IncrementLaw};

fn main() -> dle::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "hull.svg".into());
    let chain = sample_walk(&IncrementLaw::bernoulli(8.0)?, 1, 40, 1)?.to_chain();
    let forest = build_forest(&chain, EPS_ROOT)?;
    std::fs::write(&path, render_forest(&chain, &forest)).map_err(|e| dle::Error::Config(e.to_string()))?;
    println!("wrote {path} with {} trees", forest.tree_count());
    Ok(())
}
