//! Scalar abstraction for the geometry and image kernels.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the geometric kernels are generic over.
///
/// Implemented by `f32` and `f64`. The bound collects what the kernels
/// actually use: arithmetic with assignment operators, conversions to and
/// from primitives for counts and pixel values, and `Float` for square
/// roots and trigonometry.
pub trait Real: Float + FromPrimitive + ToPrimitive + NumAssign + Debug + 'static {
    /// Conversion from `f64`, for literal constants in generic code.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant converts to any Real")
    }

    /// Conversion from `usize`, for counts entering arithmetic.
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize converts to any Real")
    }

    /// Conversion to `f64`, for serialization and reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("any Real widens to f64")
    }
}

impl<T> Real for T where T: Float + FromPrimitive + ToPrimitive + NumAssign + Debug + 'static {}
