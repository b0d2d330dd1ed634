//! Arbitrary-precision rationals.
//!
//! `BigRational` already keeps every value reduced with a positive
//! denominator after each operation, which is exactly the invariant we need.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::Error;

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse(s: &str) -> Result<Rational, Error> {
    let bad = || Error::Parse(format!("invalid rational literal {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        None => s.parse::<BigInt>().map(Rational::from_integer).map_err(|_| bad()),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Integer power, negative exponents allowed for nonzero bases.
pub fn pow(r: &Rational, e: i32) -> Rational {
    if e >= 0 {
        num_traits::pow(r.clone(), e as usize)
    } else {
        num_traits::pow(r.recip(), (-e) as usize)
    }
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_on_construction() {
        let r = frac(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(to_string(&r), "-3/2");
    }

    #[test]
    fn parse_round_trip() {
        for s in ["0", "-7", "3/2", "-12345678901234567890/7"] {
            assert_eq!(to_string(&parse(s).unwrap()), s);
        }
        assert_eq!(parse("4/2").unwrap(), int(2));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(3, 4), BigInt::zero());
        assert_eq!(pow(&frac(1, 2), -3), int(8));
    }
}
