//! Exact rational helpers shared by every module.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn from_bigint(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse {
        position: 0,
        message: format!("`{text}` is not a rational of the form p/q"),
    };
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn sign_of(k: &BigInt) -> Rational {
    if k.is_positive() {
        Rational::one()
    } else if k.is_negative() {
        -Rational::one()
    } else {
        Rational::zero()
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn max_abs<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> Rational {
    values
        .into_iter()
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// A real quantity that is exact when it can be.
#[derive(Debug, Clone, PartialEq)]
pub enum Real {
    Exact(Rational),
    Approx(f64),
}

impl Real {
    pub fn zero() -> Self {
        Real::Exact(Rational::zero())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(r) => to_f64(r),
            Real::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Real::Exact(r) => Some(r),
            Real::Approx(_) => None,
        }
    }

    /// The larger value; exact comparison when both sides are exact.
    pub fn max(self, other: Real) -> Real {
        match (&self, &other) {
            (Real::Exact(a), Real::Exact(b)) => {
                if b > a {
                    other
                } else {
                    self
                }
            }
            _ => {
                if other.to_f64() > self.to_f64() {
                    other
                } else {
                    self
                }
            }
        }
    }
}

impl std::fmt::Display for Real {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Real::Exact(r) => write!(f, "{}", format_rational(r)),
            Real::Approx(x) => write!(f, "{x:.12}"),
        }
    }
}

/// Rescales values to integers over a common denominator when every
/// scaled value fits comfortably in `i64`; sums of three then cannot overflow.
pub fn common_scale(values: &[Rational]) -> Option<(Vec<i64>, BigInt)> {
    let mut den = BigInt::one();
    for v in values {
        den = num::integer::lcm(den, v.denom().clone());
    }
    let limit = BigInt::from(i64::MAX / 4);
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        let scaled = v.numer() * (&den / v.denom());
        if scaled.abs() > limit {
            return None;
        }
        out.push(scaled.to_i64()?);
    }
    Some((out, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(" -7 ").unwrap(), int(-7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(-4, 6)), "-2/3");
        assert_eq!(format_rational(&int(5)), "5");
    }
}
