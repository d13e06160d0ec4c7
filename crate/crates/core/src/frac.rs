//! Exact rational helpers and the `"p/q"` string form used in every report.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn from_biguint(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Always `numerator/denominator`, in lowest terms, e.g. `"3/1"`.
pub fn fraction_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Accepts `"p/q"` or a bare integer `"p"`.
pub fn parse_fraction(s: &str) -> Result<BigRational> {
    let bad = || Error::OutOfRange(format!("`{s}` is not a fraction"));
    let (n, d) = match s.trim().split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

pub fn pow(q: &BigRational, t: u32) -> BigRational {
    num_traits::pow(q.clone(), t as usize)
}

pub fn one() -> BigRational {
    BigRational::one()
}

pub fn is_proper_probability(q: &BigRational) -> bool {
    !q.is_negative() && q < &BigRational::one()
}
