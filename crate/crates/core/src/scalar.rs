//! Scalar backends.
//!
//! Every matrix, lattice and decision routine in the crate is generic over
//! [`Scalar`]. Two families implement it: IEEE floats (`f32`, `f64`) for
//! experiment sweeps and [`Rational`] (arbitrary precision) for the exact
//! decision procedures. Mixing backends inside one computation is ruled out
//! by the type system; the only place it can happen at runtime is when
//! parsing JSON, which reports [`Error::BackendMismatch`].

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Arbitrary precision rational number used by the exact backend.
pub type Rational = BigRational;

/// Which arithmetic a scalar type lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Exact => write!(f, "exact"),
            Backend::Float => write!(f, "float"),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(Error::Parse(format!("unknown backend `{other}`"))),
        }
    }
}

pub trait Scalar:
    Num + Signed + PartialOrd + Clone + Debug + Display + Send + Sync + 'static
{
    const BACKEND: Backend;

    fn from_i64(v: i64) -> Self;

    fn from_rational(r: &Rational) -> Self;

    /// Conversion from a float; exact on the rational backend, `None` for
    /// non-finite input.
    fn from_float(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Absolute threshold under which a value counts as zero. Exactly zero
    /// on the exact backend.
    fn tolerance() -> Self;

    /// `floor(self)` as an integer, `None` when it does not fit.
    fn floor_i64(&self) -> Option<i64>;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self>;

    fn is_exact() -> bool {
        Self::BACKEND == Backend::Exact
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Nearest integer, ties rounded up.
    fn round_i64(&self) -> Option<i64> {
        (self.clone() + Self::ratio(1, 2)).floor_i64()
    }
}

macro_rules! impl_float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            const BACKEND: Backend = Backend::Float;

            fn from_i64(v: i64) -> Self {
                v as $t
            }

            fn from_rational(r: &Rational) -> Self {
                rational_to_f64(r) as $t
            }

            fn from_float(x: f64) -> Option<Self> {
                x.is_finite().then_some(x as $t)
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn tolerance() -> Self {
                $tol
            }

            fn floor_i64(&self) -> Option<i64> {
                let f = self.floor();
                if f.is_finite() && f >= i64::MIN as $t && f <= i64::MAX as $t {
                    Some(f as i64)
                } else {
                    None
                }
            }

            fn to_json(&self) -> Value {
                serde_json::Number::from_f64(*self as f64)
                    .map(Value::Number)
                    .unwrap_or(Value::Null)
            }

            fn from_json(v: &Value) -> Result<Self> {
                match v {
                    Value::Number(n) => n
                        .as_f64()
                        .map(|x| x as $t)
                        .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
                    Value::String(_) => Err(Error::BackendMismatch(
                        "exact rational string given to the float backend".into(),
                    )),
                    other => Err(Error::Parse(format!("expected a number, got {other}"))),
                }
            }
        }
    };
}

impl_float_scalar!(f64, 1e-9);
impl_float_scalar!(f32, 1e-5);

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_float(x: f64) -> Option<Self> {
        <Rational as FromPrimitive>::from_f64(x)
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn tolerance() -> Self {
        Rational::zero()
    }

    fn floor_i64(&self) -> Option<i64> {
        self.floor().to_integer().to_i64()
    }

    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) if n.is_i64() => Ok(<Rational as Scalar>::from_i64(n.as_i64().unwrap())),
            Value::Number(_) => Err(Error::BackendMismatch(
                "float literal given to the exact backend".into(),
            )),
            other => Err(Error::Parse(format!("expected \"num/den\", got {other}"))),
        }
    }
}

/// Converts through the integer parts so that huge numerators and
/// denominators do not overflow to infinity.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = (nb - db - 60).max(0) as usize;
    let back = (db - nb + 60).max(0) as usize;
    let scaled = (r.numer() << back) / (r.denom() << shift);
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32 - back as i32)
}

/// Exact conversion of a finite float.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    <Rational as FromPrimitive>::from_f64(x).ok_or_else(|| Error::Parse(format!("non-finite float {x}")))
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"`, `"p"` or a terminating decimal such as `"0.95"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse rational `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str_radix(n.trim(), 10).map_err(|_| bad())?;
        let d = BigInt::from_str_radix(d.trim(), 10).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_part = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str_radix(int, 10).map_err(|_| bad())?.abs()
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let frac_part = BigInt::from_str_radix(frac, 10).map_err(|_| bad())?;
        let v = Rational::new(int_part * &den + frac_part, den);
        return Ok(if neg { -v } else { v });
    }
    BigInt::from_str_radix(s, 10)
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Product of a slice of scalars.
pub fn product<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::one(), |acc, x| acc * x.clone())
}

/// Greatest common divisor of two machine integers, used by the test
/// oracles and the curve sampling code.
pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Serde adapters writing rationals as `"num/den"` strings.
pub mod rational_serde {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&format_rational(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| parse_rational(s).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod nested {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for row in v {
                let row: Vec<String> = row.iter().map(format_rational).collect();
                seq.serialize_element(&row)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
            let v = Vec::<Vec<String>>::deserialize(d)?;
            v.iter()
                .map(|row| {
                    row.iter()
                        .map(|s| parse_rational(s).map_err(D::Error::custom))
                        .collect()
                })
                .collect()
        }
    }
}
