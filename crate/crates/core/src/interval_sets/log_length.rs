use std::f64::consts::LN_2;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::rational::Rational;
use crate::error::{Error, Result};

/// A length in `(0, 1]` stored by its natural logarithm.
///
/// Radii such as `exp(-n^1.5)` at `n = 10^4` are far below the smallest
/// positive double, so every length in this crate lives in log form and is
/// only exponentiated when the result is known to be representable.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LogLength(f64);

impl LogLength {
    pub const UNIT: LogLength = LogLength(0.0);

    pub fn from_log(log_value: f64) -> Result<Self> {
        if !log_value.is_finite() {
            return Err(Error::InvalidLength(format!("log length must be finite, got {log_value}")));
        }
        if log_value > 0.0 {
            return Err(Error::InvalidLength(format!("log length must be <= 0 (length <= 1), got {log_value}")));
        }
        Ok(LogLength(log_value))
    }

    pub fn from_length(length: f64) -> Result<Self> {
        if !(length > 0.0 && length <= 1.0) {
            return Err(Error::InvalidLength(format!("length must lie in (0, 1], got {length}")));
        }
        Self::from_log(length.ln())
    }

    #[inline]
    pub fn log(self) -> f64 {
        self.0
    }

    /// `|log r|`.
    #[inline]
    pub fn abs_log(self) -> f64 {
        -self.0
    }

    /// The plain length; underflows to zero below the subnormal range.
    #[inline]
    pub fn length(self) -> f64 {
        self.0.exp()
    }

    pub fn half(self) -> LogLength {
        LogLength(self.0 - LN_2)
    }

    /// Doubles the length. Fails when the result would exceed 1.
    pub fn double(self) -> Result<LogLength> {
        Self::from_log(self.0 + LN_2)
    }

    /// Dyadic rational approximation `M * 2^e` of the length, accurate to a
    /// relative error of a few ulps of `log / ln 2`. Never underflows.
    pub fn to_dyadic(self) -> Rational {
        let x = self.0 / LN_2;
        let e = x.floor();
        let mantissa = (x - e).exp2();
        // mantissa in [1, 2): exactly M * 2^-52 for integer M.
        let m = (mantissa * (1u64 << 52) as f64).round() as u64;
        let exp = e as i64 - 52;
        let num = BigInt::from(m);
        if exp >= 0 {
            Rational::from_integer(num << exp as u64)
        } else {
            Rational::new(num, BigInt::one() << (-exp) as u64)
        }
    }
}

impl TryFrom<f64> for LogLength {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        LogLength::from_log(v)
    }
}

impl From<LogLength> for f64 {
    fn from(v: LogLength) -> f64 {
        v.0
    }
}

/// `log(exp(a) + exp(b))` without overflow or underflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(sum exp(v))` over an iterator; `-inf` for an empty or all-zero input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    if hi == f64::INFINITY {
        return hi;
    }
    let sum: f64 = values.iter().map(|v| (v - hi).exp()).sum();
    hi + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_sets::rational::{ln_rational, to_f64};
    use proptest::prelude::*;

    #[test]
    fn rejects_non_finite_and_positive() {
        assert!(LogLength::from_log(f64::NAN).is_err());
        assert!(LogLength::from_log(f64::NEG_INFINITY).is_err());
        assert!(LogLength::from_log(0.5).is_err());
        assert!(LogLength::from_length(1.5).is_err());
        assert!(LogLength::from_length(0.0).is_err());
    }

    #[test]
    fn tiny_lengths_stay_finite() {
        let r = LogLength::from_log(-1000.0).unwrap();
        assert_eq!(r.length(), 0.0);
        assert_eq!(r.abs_log(), 1000.0);
        let q = r.to_dyadic();
        assert!((ln_rational(&q) + 1000.0).abs() < 1e-12);
    }

    #[test]
    fn dyadic_matches_length() {
        for &l in &[1.0, 0.5, 0.1, 1e-7, 3.3e-200] {
            let q = LogLength::from_length(l).unwrap().to_dyadic();
            assert!((to_f64(&q) / l - 1.0).abs() < 1e-13, "{l}");
        }
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp([f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        let v = log_sum_exp([-40000.0, -40000.0]);
        assert!((v - (-40000.0 + LN_2)).abs() < 1e-9);
        assert!((log_add_exp(0.0, 0.0) - LN_2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn round_trip_relative_error(exp in -299.0f64..0.0, frac in 1.0f64..10.0) {
            let l = (frac * 10f64.powf(exp)).min(1.0);
            prop_assume!(l > 1e-300);
            let back = LogLength::from_length(l).unwrap().length();
            prop_assert!(((back - l) / l).abs() <= 1e-12);
        }
    }
}
