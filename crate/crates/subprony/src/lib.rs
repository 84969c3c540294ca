//! Parametric multi-exponential spectral analysis from sub-Nyquist,
//! uniformly decimated samples.
//!
//! A signal `phi(t) = sum_i alpha_i exp(phi_i t)` is sampled on a coarse
//! grid `t = j r Delta` plus a second batch shifted by multiples of
//! `rho Delta`, with `gcd(r, rho) = 1`. Aliasing on the coarse grid is
//! exploited rather than avoided: the shift pairs each aliased eigenvalue
//! with its coefficient, a Bezout recombination (or its noise-robust
//! nearest-candidate variant) recovers the true frequencies, and a
//! per-group inner exponential analysis disentangles terms that collided
//! or cancelled under decimation.
//!
//! The crate is generic over the real scalar type (`f32`/`f64`) through
//! [`scalar::Real`]; concrete `f64` aliases are exported at the root.

pub mod collision;
pub mod error;
pub mod linalg;
pub mod matching;
pub mod model;
pub mod presets;
pub mod prony;
pub mod scalar;
pub mod sequence;
pub mod subnyquist;

pub use error::{Error, Result};
pub use scalar::Real;

/// Complex scalar over `f64`.
pub type C64 = num_complex::Complex<f64>;
/// Complex scalar over `f32`.
pub type C32 = num_complex::Complex<f32>;

/// `f64` aliases for the main domain types.
pub type SignalModel64 = model::SignalModel<f64>;
pub type SamplingScheme64 = model::SamplingScheme<f64>;
pub type SampleSource64 = model::SampleSource<f64>;
pub type RecoveryReport64 = collision::RecoveryReport<f64>;
