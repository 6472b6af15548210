//! Scalar abstraction so the simplex runs in `f64` or exact rationals.

use crate::rational::Rational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt::Debug;

pub trait Field: Clone + PartialOrd + Debug {
    /// True when arithmetic is exact and tolerances are zero.
    const EXACT: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn over(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    fn magnitude(&self) -> Self;
    fn is_zero_exact(&self) -> bool;
    fn from_rational(r: &Rational) -> Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// `self -= a * b`
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self = self.minus(&a.times(b));
    }
}

impl Field for f64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    #[inline]
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    #[inline]
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    #[inline]
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    #[inline]
    fn negate(&self) -> Self {
        -self
    }
    #[inline]
    fn magnitude(&self) -> Self {
        self.abs()
    }
    #[inline]
    fn is_zero_exact(&self) -> bool {
        *self == 0.0
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    #[inline]
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
}

impl Field for Rational {
    const EXACT: bool = true;
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn is_zero_exact(&self) -> bool {
        self.is_zero()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_f64(v: f64) -> Self {
        Rational::from_float(v).unwrap_or_else(Zero::zero)
    }
    fn to_f64(&self) -> f64 {
        crate::rational::to_f64(self)
    }
}
