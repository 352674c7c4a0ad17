//! Slit maps, their inverses and chain compositions.

use dle::halfplane::{eval_slit, eval_slit_inverse, SlitChain, SlitParams};
use dle::Complex64;

fn main() -> dle::Result<()> {
    let p = SlitParams::new(0.5, 4)?;
    let z = Complex64::new(0.3, 0.2);
    let w = eval_slit(p, z);
    println!("r_4(0.5; {z}) = {w}");
    println!("inverse round trip error = {:.2e}", (eval_slit_inverse(p, w) - z).norm());

    let chain = SlitChain::new(1, vec![0.0, 1.0, -0.5, 0.7])?;
    println!("D(4)(2i) = {}", chain.eval(Complex64::new(0.0, 2.0)));
    println!("capacity = {}", chain.capacity());
    if let Some((a, b)) = chain.hull_endpoints() {
        println!("hull interval = [{a:.6}, {b:.6}]");
    }
    for j in 0..chain.len() {
        println!("branch {j}: base {:.6}  tip {:.6}", chain.base(j), chain.tip(j));
    }
    Ok(())
}
