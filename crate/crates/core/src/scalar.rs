//! Scalar abstractions shared by every numerical routine in the crate.
//!
//! [`Real`] is the floating-point type that carries geometry, potentials and
//! norms (`f32` or `f64`). [`Field`] is the scalar a linear system is solved
//! over: a real type or its complex counterpart.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, One, ToPrimitive, Zero};

/// Real floating-point scalar.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Default
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in target float")
}

#[inline]
pub(crate) fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in target float")
}

/// Scalar a linear system can be solved over.
pub trait Field:
    Copy + NumAssign + Neg<Output = Self> + Zero + One + Sum + Debug + Send + Sync + 'static
{
    type Real: RealScalar;

    fn from_real(r: Self::Real) -> Self;
    fn modulus(self) -> Self::Real;
    fn modulus_sqr(self) -> Self::Real;
    fn conj(self) -> Self;
    fn finite(self) -> bool;
}

macro_rules! real_field {
    ($t:ty) => {
        impl Field for $t {
            type Real = $t;
            #[inline]
            fn from_real(r: $t) -> Self {
                r
            }
            #[inline]
            fn modulus(self) -> $t {
                self.abs()
            }
            #[inline]
            fn modulus_sqr(self) -> $t {
                self * self
            }
            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn finite(self) -> bool {
                <$t>::is_finite(self)
            }
        }
    };
}

macro_rules! complex_field {
    ($t:ty) => {
        impl Field for Complex<$t> {
            type Real = $t;
            #[inline]
            fn from_real(r: $t) -> Self {
                Complex::new(r, 0.0)
            }
            #[inline]
            fn modulus(self) -> $t {
                self.norm()
            }
            #[inline]
            fn modulus_sqr(self) -> $t {
                self.norm_sqr()
            }
            #[inline]
            fn conj(self) -> Self {
                Complex::conj(&self)
            }
            #[inline]
            fn finite(self) -> bool {
                self.re.is_finite() && self.im.is_finite()
            }
        }
    };
}

real_field!(f32);
real_field!(f64);
complex_field!(f32);
complex_field!(f64);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_modulus() {
        let z = Complex::new(3.0_f64, -4.0);
        assert_eq!(z.modulus(), 5.0);
        assert_eq!(z.modulus_sqr(), 25.0);
        assert_eq!(Field::conj(z), Complex::new(3.0, 4.0));
        assert_eq!(<f32 as Field>::from_real(2.5), 2.5);
    }
}

/// Real scalar that can also be stored in a [`GridFunction`](crate::GridFunction).
pub trait RealScalar: Real + Field<Real = Self> {}

impl RealScalar for f32 {}
impl RealScalar for f64 {}
