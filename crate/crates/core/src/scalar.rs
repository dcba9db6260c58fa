//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type the library is generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for types that cannot hold finite `f64` values.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Relative factor used for the `D_N` zero-sum check.
    ///
    /// `1e-12` for `f64`; widened to a small multiple of machine epsilon for
    /// narrower types so that centred vectors still validate.
    fn dn_tolerance() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(64.0))
    }

    /// Pairwise distances below this value are treated as an exact collision.
    fn collision_distance() -> Self {
        Self::lit(1e-300).max(Self::min_positive_value())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerances_per_precision() {
        assert_eq!(f64::dn_tolerance(), 1e-12);
        assert!(f32::dn_tolerance() > 1e-6);
        assert_eq!(f64::collision_distance(), 1e-300);
        assert!(f32::collision_distance() > 0.0);
    }
}
