//! Truncated Fock-space simulation of measurement-induced Kerr-type gates.
//!
//! The crate is `no_std` and needs only `alloc`. It covers:
//!
//! * [`fock`]: single-mode states, ladder operators, density matrices and fidelity.
//! * [`gate`]: diagonal operators f(n̂), the addition/subtraction superposition
//!   `A·â↠+ B·â†â`, the Kerr phase, noiseless gain and attenuation.
//! * [`klm`]: multimode linear-optics simulation of the heralded nonlinear sign gate.
//! * [`channels`]: photon loss and its adjoint on measurement operators.
//! * [`homodyne`]: quadrature distributions and seeded inverse-CDF sampling.
//! * [`tomography`]: binned homodyne data and diluted RρR maximum likelihood.
//!
//! Quadratures use the convention `x = (â + â†)/√2`, so the vacuum variance is 1/2.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channels;
pub mod error;
pub mod fock;
pub mod gate;
pub mod homodyne;
pub mod klm;
pub mod linalg;
pub mod tolerances;
pub mod tomography;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use tolerances::Tolerances;

/// Double-precision complex scalar used throughout.
pub type C64 = num_complex::Complex64;
