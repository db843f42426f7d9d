//! Polynomials that simultaneously approximate and interpolate functions on
//! planar continua.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] – the continuum `E`, its boundary and membership tests.
//! * [`conformal`] – the exterior map `Φ`, its inverse `Ψ`, level curves and
//!   the distance `ρ_δ(z)` to them.
//! * [`polynomial`] – complex polynomials in a centred/scaled coordinate.
//! * [`approx`] – near-best uniform approximation and moduli of continuity.
//! * [`kernels`] – polynomial approximants of the Cauchy kernel and the
//!   interior damping factor.
//! * [`extension`] – primitives, the Whitney extension and the area-integral
//!   approximant.
//! * [`constructions`] – the interpolating pipelines.
//! * [`fekete`] – Fekete nodes and their diagnostics.

pub mod approx;
pub mod conformal;
pub mod constructions;
mod error;
pub mod extension;
pub mod fekete;
pub mod fit;
pub mod functions;
pub mod geometry;
pub mod kernels;
pub mod polynomial;
pub mod quadrature;
pub mod serde_c64;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Shorthand for building complex numbers.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
