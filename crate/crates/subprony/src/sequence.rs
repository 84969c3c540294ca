//! Indexed complex sample sequences.
//!
//! Structured-matrix builders and the analysis pipelines draw samples through
//! this trait, so they work identically against a live generator, a recorded
//! trace, or a plain slice in tests.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// An indexed sequence of complex samples `f_j`.
///
/// Implementations may be lazy and may record which indices were drawn;
/// hence `&mut self`.
pub trait Samples<T: Real> {
    fn sample(&mut self, index: i64) -> Result<Complex<T>>;
}

/// A finite slice viewed as the sequence `f_0, f_1, ...`.
pub struct SliceSamples<'a, T>(pub &'a [Complex<T>]);

impl<T: Real> Samples<T> for SliceSamples<'_, T> {
    fn sample(&mut self, index: i64) -> Result<Complex<T>> {
        usize::try_from(index)
            .ok()
            .and_then(|i| self.0.get(i).copied())
            .ok_or(Error::SampleUnavailable { index })
    }
}

/// A closure viewed as an unbounded sequence.
pub struct FnSamples<F>(pub F);

impl<T: Real, F: FnMut(i64) -> Complex<T>> Samples<T> for FnSamples<F> {
    fn sample(&mut self, index: i64) -> Result<Complex<T>> {
        if index < 0 {
            return Err(Error::SampleUnavailable { index });
        }
        Ok((self.0)(index))
    }
}

impl<T: Real, S: Samples<T> + ?Sized> Samples<T> for &mut S {
    fn sample(&mut self, index: i64) -> Result<Complex<T>> {
        (**self).sample(index)
    }
}
