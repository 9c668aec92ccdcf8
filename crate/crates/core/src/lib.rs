//! Numerical laboratory for one-dimensional Klein-Gordon equations with
//! localized quadratic and cubic coefficients.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod coefficients;
pub mod error;
pub mod evolution;
pub mod localdecay;
pub mod normalform;
pub mod oscillatory;
pub mod pipeline;
pub mod real;
pub mod spectral;

pub use error::{Error, Result};
pub use real::Real;

/// Double-precision grid.
pub type Grid = spectral::Grid<f64>;
/// Double-precision field.
pub type Field = spectral::Field<f64>;
/// Double-precision spectrum.
pub type Spectrum = spectral::Spectrum<f64>;
/// Double-precision multiplier.
pub type Multiplier = spectral::Multiplier<f64>;
/// Single-precision grid.
pub type Grid32 = spectral::Grid<f32>;
/// Single-precision field.
pub type Field32 = spectral::Field<f32>;
/// Single-precision spectrum.
pub type Spectrum32 = spectral::Spectrum<f32>;

pub use num_complex::Complex64 as C64;

/// Version stamp embedded in every report.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
