//! Scalars that stay exact while their inputs are rational.
//!
//! Regime boundaries such as `q = q^e` are exact rational numbers, so a
//! parameter given as `8/3` or `0.1` must compare exactly against them. Values
//! that enter as binary floats (or whose rational form overflows) fall back to
//! `f64` with an absolute comparison tolerance of [`FLOAT_TOLERANCE`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub type Rational = Ratio<i128>;

/// Absolute tolerance used whenever one side of a comparison is inexact.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub enum Num {
    Exact(Rational),
    Float(f64),
}

impl Num {
    pub const ZERO: Num = Num::Exact(Ratio::new_raw(0, 1));
    pub const ONE: Num = Num::Exact(Ratio::new_raw(1, 1));

    pub fn int(n: i64) -> Num {
        Num::Exact(Rational::from_integer(n as i128))
    }

    /// Exact fraction `num/den`. Panics on a zero denominator.
    pub fn frac(num: i64, den: i64) -> Num {
        Num::Exact(Rational::new(num as i128, den as i128))
    }

    pub fn float(x: f64) -> Num {
        Num::Float(x)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Num::Exact(_))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Num::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Num::Float(x) => x,
        }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            Num::Exact(r) => Some(*r),
            Num::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cmp_num(&Num::ZERO) == Ordering::Equal
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Num::Exact(_) => true,
            Num::Float(x) => x.is_finite(),
        }
    }

    pub fn abs(self) -> Num {
        match self {
            Num::Exact(r) => Num::Exact(r.abs()),
            Num::Float(x) => Num::Float(x.abs()),
        }
    }

    pub fn recip(self) -> Num {
        Num::ONE / self
    }

    /// Three-way comparison: exact when both sides are exact, otherwise equal
    /// within [`FLOAT_TOLERANCE`].
    pub fn cmp_num(&self, other: &Num) -> Ordering {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => a.cmp(b),
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                if (a - b).abs() <= FLOAT_TOLERANCE {
                    Ordering::Equal
                } else if a < b {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn max(self, other: Num) -> Num {
        if self.cmp_num(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    fn combine(
        self,
        rhs: Num,
        exact: impl Fn(&Rational, &Rational) -> Option<Rational>,
        float: impl Fn(f64, f64) -> f64,
    ) -> Num {
        if let (Num::Exact(a), Num::Exact(b)) = (self, rhs) {
            if let Some(r) = exact(&a, &b) {
                return Num::Exact(r);
            }
        }
        Num::Float(float(self.to_f64(), rhs.to_f64()))
    }
}

impl Add for Num {
    type Output = Num;
    fn add(self, rhs: Num) -> Num {
        self.combine(rhs, |a, b| a.checked_add(b), |a, b| a + b)
    }
}

impl Sub for Num {
    type Output = Num;
    fn sub(self, rhs: Num) -> Num {
        self.combine(rhs, |a, b| a.checked_sub(b), |a, b| a - b)
    }
}

impl Mul for Num {
    type Output = Num;
    fn mul(self, rhs: Num) -> Num {
        self.combine(rhs, |a, b| a.checked_mul(b), |a, b| a * b)
    }
}

/// Division by an exact zero degrades to float division (`±inf` or `NaN`).
impl Div for Num {
    type Output = Num;
    fn div(self, rhs: Num) -> Num {
        self.combine(
            rhs,
            |a, b| if b.is_zero() { None } else { a.checked_div(b) },
            |a, b| a / b,
        )
    }
}

impl Neg for Num {
    type Output = Num;
    fn neg(self) -> Num {
        match self {
            Num::Exact(r) => Num::Exact(-r),
            Num::Float(x) => Num::Float(-x),
        }
    }
}

macro_rules! int_ops {
    ($($trait:ident $method:ident),*) => {$(
        impl $trait<i64> for Num {
            type Output = Num;
            fn $method(self, rhs: i64) -> Num {
                $trait::$method(self, Num::int(rhs))
            }
        }
        impl $trait<Num> for i64 {
            type Output = Num;
            fn $method(self, rhs: Num) -> Num {
                $trait::$method(Num::int(self), rhs)
            }
        }
    )*};
}
int_ops!(Add add, Sub sub, Mul mul, Div div);

impl PartialEq for Num {
    fn eq(&self, other: &Num) -> bool {
        self.cmp_num(other) == Ordering::Equal
    }
}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Num) -> Option<Ordering> {
        Some(self.cmp_num(other))
    }
}

impl From<i64> for Num {
    fn from(n: i64) -> Num {
        Num::int(n)
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Num {
        Num::Float(x)
    }
}

impl From<Rational> for Num {
    fn from(r: Rational) -> Num {
        Num::Exact(r)
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Num::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Num::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Parses `7`, `-2/9`, `0.125` and `1.5e-3` exactly; anything that overflows
/// the rational representation is kept as a float.
impl FromStr for Num {
    type Err = Error;

    fn from_str(s: &str) -> Result<Num, Error> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse number {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Num::Exact(Rational::new(n, d)));
        }
        let float: f64 = s.parse().map_err(|_| bad())?;
        if !float.is_finite() {
            return Err(bad());
        }
        Ok(parse_decimal(s).map(Num::Exact).unwrap_or(Num::Float(float)))
    }
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut value: i128 = digits.parse().ok()?;
    if negative {
        value = -value;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = |k: u32| 10i128.checked_pow(k);
    if scale >= 0 {
        Some(Rational::from_integer(value.checked_mul(ten(scale as u32)?)?))
    } else {
        Some(Rational::new(value, ten(scale.unsigned_abs())?))
    }
}

/// Exact values round-trip: integers and terminating decimals become JSON
/// numbers, any other rational a `"n/d"` string.
impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Num::Float(x) => serializer.serialize_f64(*x),
            Num::Exact(r) if r.is_integer() && i64::try_from(*r.numer()).is_ok() => {
                serializer.serialize_i64(*r.numer() as i64)
            }
            Num::Exact(r) => {
                let x = self.to_f64();
                if parse_decimal(&format!("{x}")) == Some(*r) {
                    serializer.serialize_f64(x)
                } else {
                    serializer.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
                }
            }
        }
    }
}

/// JSON numbers are read through their shortest decimal representation, so
/// `0.1` in a config file is the exact rational 1/10. Strings such as `"8/3"`
/// are accepted as well.
impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Num, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let text = match Raw::deserialize(deserializer)? {
            Raw::Int(n) => return Ok(Num::int(n)),
            Raw::Float(x) => format!("{x}"),
            Raw::Text(s) => s,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Extended reals: the convention `c/0 = +∞` for upper bounds of the form
/// `c/(N-k)` keeps dimension branches uniform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(Num),
    Infinity,
}

impl ExtReal {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    pub fn finite(&self) -> Option<Num> {
        match self {
            ExtReal::Finite(x) => Some(*x),
            ExtReal::Infinity => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x.to_f64(),
            ExtReal::Infinity => f64::INFINITY,
        }
    }

    /// `num/den` with a non-positive denominator mapped to `+∞`.
    pub fn upper_ratio(num: Num, den: Num) -> ExtReal {
        if den.cmp_num(&Num::ZERO) != Ordering::Greater {
            ExtReal::Infinity
        } else {
            ExtReal::Finite(num / den)
        }
    }

    pub fn cmp_ext(&self, other: &ExtReal) -> Ordering {
        match (self, other) {
            (ExtReal::Infinity, ExtReal::Infinity) => Ordering::Equal,
            (ExtReal::Infinity, _) => Ordering::Greater,
            (_, ExtReal::Infinity) => Ordering::Less,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.cmp_num(b),
        }
    }
}

impl From<Num> for ExtReal {
    fn from(x: Num) -> ExtReal {
        ExtReal::Finite(x)
    }
}

impl Add<Num> for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: Num) -> ExtReal {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x + rhs),
            ExtReal::Infinity => ExtReal::Infinity,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<Ordering> {
        Some(self.cmp_ext(other))
    }
}

impl PartialEq<Num> for ExtReal {
    fn eq(&self, other: &Num) -> bool {
        self.cmp_ext(&ExtReal::Finite(*other)) == Ordering::Equal
    }
}

impl PartialOrd<Num> for ExtReal {
    fn partial_cmp(&self, other: &Num) -> Option<Ordering> {
        Some(self.cmp_ext(&ExtReal::Finite(*other)))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => x.fmt(f),
            ExtReal::Infinity => f.write_str("inf"),
        }
    }
}

/// Finite values serialize as JSON numbers, `+∞` as the string `"inf"`.
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => x.serialize(serializer),
            ExtReal::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<ExtReal, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Value(Num),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) if matches!(s.trim(), "inf" | "+inf" | "infinity") => Ok(ExtReal::Infinity),
            Raw::Text(s) => s.parse().map(ExtReal::Finite).map_err(serde::de::Error::custom),
            Raw::Value(x) => Ok(ExtReal::Finite(x)),
        }
    }
}
