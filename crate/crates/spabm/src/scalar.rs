use num_traits::{Float, FromPrimitive, NumAssignOps};

/// Floating-point scalar the numeric core is generic over.
///
/// Implemented for `f32` and `f64`. The bounds cover the arithmetic the
/// crate needs: float math, conversions from counts, in-place operators,
/// iterator sums, formatting, and thread safety for parallel solvers.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssignOps
    + std::iter::Sum<Self>
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Lossless-for-practical-sizes conversion from a count.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as scalar")
    }

    /// Conversion from a double-precision literal.
    fn real(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal representable as scalar")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + NumAssignOps
        + std::iter::Sum<Self>
        + std::fmt::Debug
        + std::fmt::Display
        + Send
        + Sync
        + 'static
{
}
