//! Exact rational helpers shared by statistics, bounds and the oracle.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// `num / den`; panics on a zero denominator, callers check cells first.
pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    Rational::new(num.into(), den.into())
}

/// The exact binary value of a finite float.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Correctly rounded conversion.
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact value of a finite, nonnegative violation magnitude.
pub(crate) fn nonneg_delta(delta: f64) -> Result<Rational> {
    match from_f64(delta) {
        Some(r) if r >= Rational::zero() => Ok(r),
        _ => Err(Error::NegativeDelta(delta)),
    }
}

/// `"p/q"`, or `"p"` for integers.
pub fn render(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub(crate) mod serde_rational {
    use super::{render, Rational};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&render(x))
    }
}
