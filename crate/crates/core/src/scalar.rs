//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point scalar the simulator can run on (`f32` or `f64`).
///
/// Both `Float` and `Signed` (through `FftNum`) provide `abs`; call it as
/// `Float::abs(x)` inside generic code.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count into this scalar.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Lossy conversion back to `f64`, used for reporting and statistics.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon scaled tolerance helper: `k * eps`.
    #[inline]
    fn eps_times(k: f64) -> Self {
        Self::epsilon() * Self::lit(k)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the crate scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// Rounds half away from zero. Values within `1e-9` relative of a tie count
/// as the tie, so `4.5` computed as `4.4999999999` still rounds to 5.
#[inline]
pub fn round_half_away<T: Real>(x: T) -> i64 {
    let tol = T::lit(1e-9) * T::one().max(Float::abs(x));
    let r = if x >= T::zero() {
        (x + T::lit(0.5) + tol).floor()
    } else {
        -((-x) + T::lit(0.5) + tol).floor()
    };
    r.to_i64().expect("rounded value fits in i64")
}

/// Ceiling that forgives floating-point noise just above an integer.
#[inline]
pub fn ceil_tol<T: Real>(x: T) -> i64 {
    let tol = T::lit(1e-9) * T::one().max(Float::abs(x));
    (x - tol).ceil().to_i64().expect("ceil fits in i64")
}

/// Floor that forgives floating-point noise just below an integer.
#[inline]
pub fn floor_tol<T: Real>(x: T) -> i64 {
    let tol = T::lit(1e-9) * T::one().max(Float::abs(x));
    (x + tol).floor().to_i64().expect("floor fits in i64")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_ties_go_away_from_zero() {
        assert_eq!(round_half_away(-3.5_f64), -4);
        assert_eq!(round_half_away(3.5_f64), 4);
        assert_eq!(round_half_away(2.4999_f64), 2);
        assert_eq!(round_half_away(-0.5_f32), -1);
        assert_eq!(round_half_away(0.0_f64), 0);
        assert_eq!(round_half_away(1.8_f64 / 0.4), 5);
        assert_eq!(round_half_away(-(1.8_f64 / 0.4)), -5);
    }

    #[test]
    fn tolerant_ceil_and_floor() {
        assert_eq!(ceil_tol(10.1_f64 / 0.1), 101);
        assert_eq!(ceil_tol(1.000_000_000_000_000_2_f64), 1);
        assert_eq!(ceil_tol(1.2_f64), 2);
        assert_eq!(floor_tol(2.0_f64 / 0.1), 20);
        assert_eq!(floor_tol(0.299_999_999_999_999_9_f64 / 0.1), 3);
    }
}
