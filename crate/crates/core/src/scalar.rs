use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar used throughout the crate.
///
/// Implemented for `f32`, `f64` and, with the `quad` feature, the 113-bit
/// `f128` type. Everything numerical in the crate is generic over it.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant. Exact for dyadic literals.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant must be representable")
    }

    #[inline]
    fn int(i: i64) -> Self {
        Self::from_i64(i).expect("integer must be representable")
    }

    #[inline]
    fn half() -> Self {
        Self::c(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::c(2.0)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(feature = "quad")]
impl Scalar for f128::f128 {}

/// Neumann factor: 1 for index zero, 2 otherwise.
#[inline]
pub fn neumann<T: Scalar>(k: usize) -> T {
    if k == 0 {
        T::one()
    } else {
        T::two()
    }
}

/// `x` reduced into `[0, 2π)`.
pub fn wrap_two_pi<T: Scalar>(x: T) -> T {
    let tau = T::TAU();
    let r = x - tau * (x / tau).floor();
    if r >= tau || r < T::zero() {
        T::zero()
    } else {
        r
    }
}

/// `x` reduced into `(-π, π]`.
pub fn wrap_pi<T: Scalar>(x: T) -> T {
    let r = wrap_two_pi(x + T::PI()) - T::PI();
    if r <= -T::PI() {
        T::PI()
    } else {
        r
    }
}

pub(crate) fn norm3<T: Scalar>(v: &[T; 3]) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub(crate) fn dot3<T: Scalar>(u: &[T; 3], v: &[T; 3]) -> T {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

pub(crate) fn cross3<T: Scalar>(u: &[T; 3], v: &[T; 3]) -> [T; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrapping_lands_in_range() {
        for &x in &[-7.0_f64, -3.2, -0.0, 0.0, 1.0, 3.5, 6.3, 100.0] {
            let w = wrap_two_pi(x);
            assert!((0.0..std::f64::consts::TAU).contains(&w), "{x} -> {w}");
            let v = wrap_pi(x);
            assert!(v > -std::f64::consts::PI && v <= std::f64::consts::PI);
        }
        assert_eq!(wrap_pi(std::f64::consts::PI), std::f64::consts::PI);
        assert_eq!(wrap_pi(-std::f64::consts::PI), std::f64::consts::PI);
    }

    #[cfg(feature = "quad")]
    #[test]
    fn quad_pi_is_extended() {
        use f128::f128;
        use num_traits::{Float, FloatConst};
        let pi = <f128 as FloatConst>::PI();
        // sin(pi) in quad is about 1e-34, far below the f64 residue of 1.2e-16
        assert!(pi.sin().abs() < f128::c(1e-32));
        assert!((pi - f128::c(std::f64::consts::PI)).abs() > f128::c(1e-17));
    }
}
