//! Exact rational helpers shared by the finite-chain code.
//!
//! Rationals travel through JSON as `"p/q"` strings (or bare integers like
//! `"0"`), which is what [`to_string`] produces and [`parse`] accepts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn to_f64(r: &Rational) -> f64 {
    // Numerator and denominator can each overflow f64 for high matrix powers
    // while the ratio is perfectly representable, so scale them down first.
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    let shift = r.denom().bits().max(r.numer().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

pub fn to_string(r: &Rational) -> String {
    r.to_string()
}

pub fn parse(s: &str) -> Result<Rational> {
    let err = || Error::ParseRational(s.to_string());
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| err())?;
            Ok(Rational::from_integer(p))
        }
    }
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse("9/80").unwrap(), ratio(9, 80));
        assert_eq!(parse(" 2/4 ").unwrap(), ratio(1, 2));
        assert_eq!(parse("0").unwrap(), zero());
        assert_eq!(to_string(&ratio(4, 33)), "4/33");
        assert_eq!(to_string(&int(1)), "1");
        assert!(parse("1/0").is_err());
        assert!(parse("0.25").is_err());
    }

    #[test]
    fn huge_ratio_to_f64() {
        let big = BigInt::from(3u32).pow(2000);
        let r = Rational::new(big.clone(), big * BigInt::from(4));
        assert_eq!(to_f64(&r), 0.25);
    }
}
