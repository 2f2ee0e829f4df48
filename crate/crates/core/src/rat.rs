//! The exact scalar type: arbitrary-precision rationals, always stored
//! reduced with a positive denominator.

use crate::error::Error;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

/// Scalar of the whole crate. `BigRational` keeps the invariants we need:
/// reduced fraction, positive denominator.
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `p/q`. Panics on `q == 0`.
pub fn ratq(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Parses either a plain integer or a `p/q` string.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let mk_err = || Error::Parse(format!("invalid rational literal: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| mk_err())?;
        let q: BigInt = q.trim().parse().map_err(|_| mk_err())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        Ok(Rat::new(p, q))
    } else {
        let p: BigInt = s.parse().map_err(|_| mk_err())?;
        Ok(Rat::from_integer(p))
    }
}

/// Renders a rational as `p` or `p/q`, matching the wire format.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True if `r` is a non-negative integer power of two, returning the exponent.
pub fn log2_exact(r: &Rat) -> Option<u32> {
    if !r.denom().is_one() || !r.numer().is_positive() {
        return None;
    }
    let mut n = r.numer().clone();
    let two = BigInt::from(2);
    let mut k = 0u32;
    while n > BigInt::one() {
        if (&n % &two).is_zero() {
            n /= &two;
            k += 1;
        } else {
            return None;
        }
    }
    Some(k)
}
