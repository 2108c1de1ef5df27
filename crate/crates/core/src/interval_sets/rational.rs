//! Helpers around arbitrary-precision rationals.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number with a positive, reduced denominator.
pub type Rational = BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `2^(-k)` as an exact rational.
pub fn pow2_neg(k: u64) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

/// Exact rational value of a finite double.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::InvalidArgument(format!("non-finite value {x}")))
}

/// Natural logarithm of a positive big integer, safe for values far beyond `f64` range.
pub fn ln_bigint(n: &BigInt) -> f64 {
    debug_assert!(n.sign() == Sign::Plus);
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().map_or(f64::NAN, f64::ln);
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of a positive rational.
pub fn ln_rational(q: &Rational) -> f64 {
    if !q.is_positive() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

/// Nearest double. Values below the subnormal range round to zero.
pub fn to_f64(q: &Rational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    if q.is_zero() {
        return 0.0;
    }
    let sign = if q.is_negative() { -1.0 } else { 1.0 };
    sign * ln_rational(&q.abs()).exp()
}

/// Decimal rendering: exact when the expansion terminates within `max_digits`
/// fractional digits, otherwise rounded to that many digits.
pub fn to_decimal_string(q: &Rational, max_digits: usize) -> String {
    let neg = q.is_negative();
    let q = q.abs();
    let (int_part, mut rem) = q.numer().div_rem(q.denom());
    let den = q.denom().clone();
    let ten = BigInt::from(10);
    let mut digits = String::new();
    while !rem.is_zero() && digits.len() < max_digits {
        rem *= &ten;
        let (d, r) = rem.div_rem(&den);
        digits.push(char::from(b'0' + d.to_u8().unwrap_or(0)));
        rem = r;
    }
    let mut int_part = int_part;
    if !rem.is_zero() && rem.clone() * 2 >= den {
        // Round half up on the last digit.
        let mut bytes: Vec<u8> = digits.into_bytes();
        let mut carry = true;
        for b in bytes.iter_mut().rev() {
            if !carry {
                break;
            }
            if *b == b'9' {
                *b = b'0';
            } else {
                *b += 1;
                carry = false;
            }
        }
        if carry {
            int_part += 1;
        }
        digits = String::from_utf8(bytes).expect("ascii digits");
    }
    let trimmed = digits.trim_end_matches('0');
    let mut out = String::new();
    if neg && !(int_part.is_zero() && trimmed.is_empty()) {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if !trimmed.is_empty() {
        out.push('.');
        out.push_str(trimmed);
    }
    out
}

pub fn parse_bigint(s: &str) -> Result<BigInt> {
    s.trim().parse::<BigInt>().map_err(|e| Error::InvalidInput(format!("bad integer {s:?}: {e}")))
}

pub fn rational_from_parts(num: &str, den: &str) -> Result<Rational> {
    let num = parse_bigint(num)?;
    let den = parse_bigint(den)?;
    if den.is_zero() {
        return Err(Error::InvalidInput("zero denominator".into()));
    }
    Ok(Rational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_of_huge_power_of_two() {
        let q = pow2_neg(5000);
        let expected = -5000.0 * std::f64::consts::LN_2;
        assert!((ln_rational(&q) - expected).abs() < 1e-9);
        assert_eq!(to_f64(&q), 0.0);
    }

    #[test]
    fn decimal_strings() {
        assert_eq!(to_decimal_string(&ratio(1, 1024), 60), "0.0009765625");
        assert_eq!(to_decimal_string(&ratio(1, 3), 5), "0.33333");
        assert_eq!(to_decimal_string(&ratio(2, 3), 5), "0.66667");
        assert_eq!(to_decimal_string(&ratio(-3, 2), 5), "-1.5");
        assert_eq!(to_decimal_string(&ratio(999_999, 1_000_000), 3), "1");
    }
}
