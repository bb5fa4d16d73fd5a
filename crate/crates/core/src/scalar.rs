//! Floating-point scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};
use serde::Serialize;

/// Real scalar the statistical pipeline is generic over.
///
/// Implemented for `f32` and `f64`. The special functions converge to the
/// type's own epsilon, so `f32` trades accuracy for speed.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Serialize
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(k: u64) -> Self {
        Self::from_u64(k).expect("count representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `p(p-1)` computed in wide integer arithmetic.
#[inline]
pub(crate) fn ordered_pairs(p: usize) -> u64 {
    let p = p as u64;
    p * (p - 1)
}

/// Number of off-diagonal pairs `p(p-1)/2`.
#[inline]
pub fn pair_count(p: usize) -> usize {
    (ordered_pairs(p) / 2) as usize
}

/// Exact-or-floating field used by the closed-form moment formulas, which are
/// rational functions of `n`. Covers `f32`, `f64` and `num_rational::Ratio`.
pub trait Field: Num + FromPrimitive + Clone {
    #[inline]
    fn int(k: i64) -> Self {
        Self::from_i64(k).expect("integer representable")
    }
}

impl<T: Num + FromPrimitive + Clone> Field for T {}
