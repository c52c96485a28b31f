//! Exact rational helpers shared by every module.

use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"num/den"`, a bare integer, or a finite decimal such as `"-0.125"`.
/// Decimals convert exactly to a power-of-ten denominator.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parameter(format!("not a rational number: {text:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parameter(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let (neg, whole) = match whole.strip_prefix('-') {
            Some(w) => (true, w),
            None => (false, whole.strip_prefix('+').unwrap_or(whole)),
        };
        if frac.is_empty() && whole.is_empty() {
            return Err(bad());
        }
        if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{}{}", if whole.is_empty() { "0" } else { whole }, frac);
        let mut n: BigInt = digits.parse().map_err(|_| bad())?;
        if neg {
            n = -n;
        }
        let d = num::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(n, d));
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Always `"num/den"`, with a positive denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // ToPrimitive fails only on enormous operands; fall back to a
        // shifted quotient.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact conversion of a finite float.
pub fn from_f64_exact(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

/// Simplest fraction within `1e-9` of `x` (continued-fraction convergents),
/// used to turn floating-point mixed strategies into readable distributions.
pub fn approximate(x: f64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        let ab = BigInt::from(a as i64);
        let h2 = &ab * &h1 + &h0;
        let k2 = &ab * &k1 + &k0;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let cand = Rational::new(h1.clone(), k1.clone());
        let frac = rest - a;
        if (to_f64(&cand) - x).abs() <= 1e-9 || frac.abs() < 1e-15 {
            return cand;
        }
        rest = 1.0 / frac;
    }
    from_f64_exact(x)
}

/// Decimal rendering with `digits` fractional digits, rounded half away
/// from zero. Presentation only.
pub fn format_decimal(r: &Rational, digits: usize) -> String {
    let scale = num::pow(BigInt::from(10), digits);
    let scaled = r * Rational::from_integer(scale.clone());
    let rounded = scaled.abs().round().to_integer();
    let neg = r.is_negative() && !rounded.is_zero();
    let int_part = &rounded / &scale;
    let frac_part = &rounded % &scale;
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = digits)
    }
}

/// Checks `0 <= x < 1` for a discount factor.
pub fn check_discount(name: &str, x: &Rational) -> Result<()> {
    if x.is_negative() || *x >= Rational::one() {
        return Err(Error::Parameter(format!(
            "{name} must satisfy 0 <= {name} < 1, got {}",
            format_rational(x)
        )));
    }
    Ok(())
}

pub fn pow(base: &Rational, exp: usize) -> Rational {
    num::pow(base.clone(), exp)
}
