//! Analysis kernel for non-coherent joint transmission (NC-JT) base-station
//! cooperation in a Poisson cellular network.
//!
//! The crate is `no_std` (it needs `alloc`) and contains everything that is
//! pure computation:
//!
//! - [`specfun`]: incomplete gamma, the `2F1(a, b; b+1; -z)` family and
//!   log-domain Bell polynomials.
//! - [`quad`]: adaptive Gauss–Kronrod quadrature, scalar and vector valued.
//! - [`fading`]: unit-mean power fading laws and their clipped moments.
//! - [`gamma_fit`]: moment-matched Gamma law for interference plus noise.
//! - [`laplace`]: Laplace transform of the useful power and its derivatives.
//! - [`sinr`]: SINR CDF bounds, interpolation, tail form and rate metrics.
//! - [`csi`]: pilot-based channel estimation and the cluster-size study.
//! - [`scheduling`]: frequency reuse versus coordinated scheduling.
//! - [`mc_sim`]: the Monte Carlo trial kernel used as ground truth.
//!
//! All quantities are linear (powers, densities per m², distances in
//! metres). Decibel conversion belongs to the front end.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod csi;
mod error;
pub mod fading;
pub mod gamma_fit;
pub mod laplace;
pub mod mc_sim;
pub mod quad;
pub mod scenario;
pub mod scheduling;
pub mod sinr;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use fading::FadingModel;
pub use gamma_fit::GammaFit;
pub use laplace::DerivativeStack;
pub use scenario::{ClusterMode, CsiMode, Scenario, Scheduling};
pub use sinr::{CdfCurve, Provenance};
