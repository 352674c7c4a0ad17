//! Discrete Loewner evolution (DLE) driven by random walks.
//!
//! The crate is organised around a handful of modules:
//!
//! * [`halfplane`]: closed-form slit maps `r_n(a; z) = a + sqrt((z - a)^2 - 4/n)`,
//!   their inverses and the chains `D_n(m; .)` obtained by composing them.
//! * [`walk`]: random-walk drivers and their piecewise-linear / piecewise-constant
//!   readings.
//! * [`loewner`]: numerical chordal Loewner flows (forward and reverse), swallow
//!   times, hull intervals and half-plane capacity.
//! * [`measure`]: compactly supported probability measures, Levy metric,
//!   Cauchy transforms, Stieltjes inversion and monotone convolution.
//! * [`forest`]: the trees and roots making up the complement of a chain image.
//! * [`bessel`]: the scalar Markov chain `Y_m` attached to the inverse maps.
//! * [`experiments`]: Monte Carlo harnesses tying the pieces together.
//! * [`cli`]: the `dle` command-line front end.

pub mod bessel;
pub mod cli;
mod error;
pub mod experiments;
pub mod forest;
pub mod halfplane;
pub mod loewner;
pub mod measure;
pub mod parallel;
pub mod stats;
pub mod svg;
pub mod walk;

pub use error::{Error, Result};
pub use halfplane::{ComplexPoint, SlitChain, SlitParams};
pub use num_complex::Complex64;
