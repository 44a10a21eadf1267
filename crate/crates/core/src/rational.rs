//! Exact rational helpers shared by the LP solver, the entropy oracle and the
//! report formats.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Default denominator used when rounding floating-point entropies.
pub const DEFAULT_DENOMINATOR_BITS: u32 = 40;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"` or a plain integer.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Always renders as `p/q`, including integers (`2/1`).
pub fn to_pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Rounds `x` to the nearest multiple of `2^-bits`. The flag is true when the
/// conversion was exact.
pub fn round_f64(x: f64, bits: u32) -> (Rational, bool) {
    let scale = 2f64.powi(bits as i32);
    let scaled = x * scale;
    let rounded = scaled.round();
    let den = BigInt::one() << bits;
    let num = BigInt::from(rounded as i128);
    (Rational::new(num, den), rounded == scaled)
}

/// `-log2 p` when `p` is exactly `1/2^k`.
pub fn neg_log2_dyadic(p: &Rational) -> Option<u64> {
    if !p.numer().is_one() || p.is_negative() {
        return None;
    }
    let d = p.denom();
    let bits = d.bits();
    if bits == 0 {
        return None;
    }
    let k = bits - 1;
    if *d == (BigInt::one() << k) {
        Some(k)
    } else {
        None
    }
}

/// Number type entropies are accumulated in: `f64` for the floating oracle,
/// [`Rational`] for the rank backend and the exact oracle.
pub trait Bits:
    Clone
    + std::fmt::Debug
    + PartialOrd
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
{
    fn zero() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn from_count(c: usize) -> Self;
    fn to_f64(&self) -> f64;
    fn abs_value(&self) -> Self;
}

impl Bits for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_rational(r: &Rational) -> Self {
        to_f64(r)
    }
    fn from_count(c: usize) -> Self {
        c as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs_value(&self) -> Self {
        self.abs()
    }
}

impl Bits for Rational {
    fn zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_count(c: usize) -> Self {
        Rational::from_integer(BigInt::from(c))
    }
    fn to_f64(&self) -> f64 {
        to_f64(self)
    }
    fn abs_value(&self) -> Self {
        self.abs()
    }
}

pub mod serde_pq {
    //! Serde adapter rendering a [`Rational`](super::Rational) as a `"p/q"` string.
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&to_pq(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::super::*;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(
            r: &Option<Rational>,
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_some(&to_pq(r)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|s| parse(&s).map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        assert_eq!(parse("5/2").unwrap(), ratio(5, 2));
        assert_eq!(parse("4/2").unwrap(), int(2));
        assert_eq!(parse(" 3 ").unwrap(), int(3));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
        assert_eq!(to_pq(&int(2)), "2/1");
        assert_eq!(to_pq(&ratio(15, 2)), "15/2");
    }

    #[test]
    fn rounding() {
        let (r, exact) = round_f64(1.5, 40);
        assert_eq!(r, ratio(3, 2));
        assert!(exact);
        let (r, exact) = round_f64(1.0 / 3.0, 40);
        assert!(!exact);
        assert!((to_f64(&r) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn dyadic_logs() {
        assert_eq!(neg_log2_dyadic(&int(1)), Some(0));
        assert_eq!(neg_log2_dyadic(&ratio(1, 8)), Some(3));
        assert_eq!(neg_log2_dyadic(&ratio(3, 8)), None);
        assert_eq!(neg_log2_dyadic(&ratio(1, 6)), None);
    }
}
