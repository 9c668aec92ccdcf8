use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Scalar type usable by the spectral layer.
pub trait Real: Float + FloatConst + FftNum + Default + std::fmt::Display + std::iter::Sum {
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
