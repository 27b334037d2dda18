//! Exact numbers used throughout the crate.
//!
//! Rationals are `num_rational::BigRational` (always stored reduced with a
//! positive denominator) and naturals are `num_bigint::BigUint`. On the wire
//! rationals are always written as `"num/den"` and naturals as plain decimal
//! strings.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number.
pub type Rat = BigRational;

/// Arbitrary-precision natural number.
pub type Nat = BigUint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseNumberError {
    #[error("malformed rational {0:?}: expected \"num/den\" or an integer")]
    Rational(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("malformed natural number {0:?}")]
    Natural(String),
}

/// Shorthand for building small rationals in code and tests.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_from_nat(n: &Nat) -> Rat {
    Rat::from_integer(BigInt::from(n.clone()))
}

/// Ratio of two naturals. Panics on a zero denominator.
pub fn nat_ratio(num: &Nat, den: &Nat) -> Rat {
    Rat::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

/// Parses `"num/den"`, `"-num/den"` or a bare integer.
pub fn parse_rat(s: &str) -> Result<Rat, ParseNumberError> {
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = n
        .parse()
        .map_err(|_| ParseNumberError::Rational(s.to_string()))?;
    let den: BigInt = d
        .parse()
        .map_err(|_| ParseNumberError::Rational(s.to_string()))?;
    if den.is_zero() {
        return Err(ParseNumberError::ZeroDenominator(s.to_string()));
    }
    Ok(Rat::new(num, den))
}

/// Always `"num/den"`, even for integers.
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_nat(s: &str) -> Result<Nat, ParseNumberError> {
    s.trim()
        .parse()
        .map_err(|_| ParseNumberError::Natural(s.to_string()))
}

/// `base^exp` for a rational base and integer exponent (negative allowed).
pub fn rat_pow(base: &Rat, exp: &BigInt) -> Rat {
    let e = exp
        .abs()
        .to_u64()
        .expect("exponent does not fit in 64 bits");
    let mut acc = Rat::one();
    let mut b = base.clone();
    let mut k = e;
    while k > 0 {
        if k & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        k >>= 1;
    }
    if exp.is_negative() {
        acc.recip()
    } else {
        acc
    }
}

/// Smallest natural `n` with `n * step >= target` (`step > 0`).
pub fn ceil_div(target: &Nat, step: &Nat) -> Nat {
    let (q, r) = target.div_rem(step);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

pub fn floor_rat(r: &Rat) -> BigInt {
    r.floor().to_integer()
}
