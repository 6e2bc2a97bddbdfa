//! Floating-point abstraction shared by every numerical module.
//!
//! All model code is written against [`Real`], which bundles what nalgebra
//! (decompositions), rustfft (fast basis transforms) and num-traits
//! (constant conversion) each require. `f64` is the reference precision; `f32`
//! is supported for memory-light channel generation.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use rustfft::FftNum;

pub use nalgebra::Complex;

pub trait Real: RealField + Copy + Default + FromPrimitive + ToPrimitive + FftNum {
    /// Converts an `f64` literal into this precision.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("finite value")
    }

    /// Machine epsilon.
    fn eps() -> Self;
}

impl Real for f64 {
    #[inline]
    fn eps() -> Self {
        f64::EPSILON
    }
}

impl Real for f32 {
    #[inline]
    fn eps() -> Self {
        f32::EPSILON
    }
}

/// `log2(x)` expressed through the natural logarithm.
#[inline]
pub fn log2<T: Real>(x: T) -> T {
    x.ln() / T::ln_2()
}
