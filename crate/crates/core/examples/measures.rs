//! Cauchy transforms, Stieltjes inversion and monotone convolution.

use dle::halfplane::{eval_slit, SlitParams};
use dle::measure::{levy_distance, monotone_convolve, stieltjes_invert, CompactMeasure, ConvolutionGrid, InversionSchedule};
use dle::Complex64;

fn main() -> dle::Result<()> {
    let mu = CompactMeasure::arcsine(4.0)?;
    let z = Complex64::new(0.2, 0.7);
    println!("f_mu(z) = {}", mu.reciprocal_cauchy(z)?);
    println!("r_4(0; z) = {}", eval_slit(SlitParams::new(0.0, 4)?, z));

    let mass = stieltjes_invert(|w| mu.cauchy_transform(w).unwrap(), (-2.0, 2.0), &InversionSchedule::default())?;
    println!("recovered total mass = {mass:.6}");

    let shifted = monotone_convolve(&mu, &CompactMeasure::dirac(0.5), &ConvolutionGrid::default())?;
    println!("arcsine |> delta_0.5: mean {:.6}", shifted.mean());
    let nu = CompactMeasure::shifted_arcsine(0.3, 1.0)?;
    let conv = monotone_convolve(&mu, &nu, &ConvolutionGrid::default())?;
    println!("arcsine |> arcsine: mean {:.6} (sum of means {:.6})", conv.mean(), mu.mean() + nu.mean());

    let a = CompactMeasure::atoms(vec![(0.0, 0.5), (1.0, 0.5)])?;
    let b = CompactMeasure::atoms(vec![(0.1, 0.5), (1.2, 0.5)])?;
    println!("Levy distance between two-point laws = {}", levy_distance(&a, &b));
    Ok(())
}
