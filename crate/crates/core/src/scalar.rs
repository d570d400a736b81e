//! Arithmetic modes.
//!
//! Every formula in [`crate::collector`] is written once against [`Scalar`]
//! and instantiated for exact rationals ([`Rational`]) and for `f64`. Exact
//! mode never rounds. Float mode sums alternating series with Neumaier
//! compensation and flags results whose intermediate magnitude dwarfs the
//! final value.

use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Intermediate magnitude, relative to the result, above which a float sum is
/// reported as having lost precision.
pub const CANCELLATION_WARNING_RATIO: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArithmeticMode {
    #[default]
    Exact,
    Float,
}

impl ArithmeticMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ArithmeticMode::Exact => "exact",
            ArithmeticMode::Float => "float",
        }
    }
}

impl fmt::Display for ArithmeticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ArithmeticMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "exact-rational" | "rational" => Ok(ArithmeticMode::Exact),
            "float" | "float64" | "f64" => Ok(ArithmeticMode::Float),
            other => Err(Error::Parse {
                input: other.to_string(),
                position: 0,
                reason: "expected `exact` or `float`".into(),
            }),
        }
    }
}

/// Result of a (possibly compensated) summation.
#[derive(Debug, Clone)]
pub struct Summed<S> {
    pub value: S,
    /// Largest absolute term or partial sum seen, as `f64`.
    pub magnitude: f64,
}

impl<S: Scalar> Summed<S> {
    /// True when float cancellation may have eaten the significant digits.
    pub fn lost_precision(&self) -> bool {
        if S::MODE == ArithmeticMode::Exact {
            return false;
        }
        let v = self.value.to_float().abs();
        self.magnitude > CANCELLATION_WARNING_RATIO * v && self.magnitude > f64::EPSILON
    }
}

pub trait Accumulator<S>: Default {
    fn add(&mut self, term: S);
    fn finish(self) -> Summed<S>;
}

#[derive(Default)]
pub struct ExactAccumulator {
    sum: Rational,
}

impl Accumulator<Rational> for ExactAccumulator {
    fn add(&mut self, term: Rational) {
        self.sum += term;
    }

    fn finish(self) -> Summed<Rational> {
        let magnitude = ToPrimitive::to_f64(&self.sum).unwrap_or(f64::INFINITY).abs();
        Summed { value: self.sum, magnitude }
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Default)]
pub struct CompensatedAccumulator {
    sum: f64,
    compensation: f64,
    magnitude: f64,
}

impl Accumulator<f64> for CompensatedAccumulator {
    fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
        self.magnitude = self.magnitude.max(term.abs()).max(t.abs());
    }

    fn finish(self) -> Summed<f64> {
        Summed {
            value: self.sum + self.compensation,
            magnitude: self.magnitude,
        }
    }
}

/// Number type shared by the exact and float evaluation paths.
pub trait Scalar:
    Clone + fmt::Debug + Send + Sync + PartialOrd + Num + Neg<Output = Self> + 'static
{
    const MODE: ArithmeticMode;
    type Acc: Accumulator<Self>;

    fn from_rational(r: &Rational) -> Self;
    fn from_bigint(i: &BigInt) -> Self;
    fn to_float(&self) -> f64;
    fn into_value(self) -> Value;
    /// Float mode clamps probabilities into `[0, 1]`; exact mode never does.
    fn clamp_probability(self) -> Self;

    fn from_u64(v: u64) -> Self {
        Self::from_bigint(&BigInt::from(v))
    }

    fn powu(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    fn sum_all<I: IntoIterator<Item = Self>>(terms: I) -> Summed<Self> {
        let mut acc = Self::Acc::default();
        for t in terms {
            acc.add(t);
        }
        acc.finish()
    }
}

impl Scalar for Rational {
    const MODE: ArithmeticMode = ArithmeticMode::Exact;
    type Acc = ExactAccumulator;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_bigint(i: &BigInt) -> Self {
        Rational::from_integer(i.clone())
    }

    fn to_float(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn into_value(self) -> Value {
        Value::Exact(self)
    }

    fn clamp_probability(self) -> Self {
        self
    }
}

impl Scalar for f64 {
    const MODE: ArithmeticMode = ArithmeticMode::Float;
    type Acc = CompensatedAccumulator;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_bigint(i: &BigInt) -> Self {
        ToPrimitive::to_f64(i).unwrap_or(f64::NAN)
    }

    fn to_float(&self) -> f64 {
        *self
    }

    fn into_value(self) -> Value {
        Value::Float(self)
    }

    fn clamp_probability(self) -> Self {
        self.clamp(0.0, 1.0)
    }

    fn powu(&self, exp: u32) -> Self {
        self.powi(exp as i32)
    }
}

/// A number produced in one of the two arithmetic modes.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Float(f64),
}

impl Value {
    pub fn mode(&self) -> ArithmeticMode {
        match self {
            Value::Exact(_) => ArithmeticMode::Exact,
            Value::Float(_) => ArithmeticMode::Float,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => Scalar::to_float(r),
            Value::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => f.write_str(&format_rational(r)),
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Exact(r) => rational_serde::serialize(r, serializer),
            Value::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Float(f64),
            Exact { numerator: String, denominator: String },
        }
        match Repr::deserialize(deserializer)? {
            Repr::Float(x) => Ok(Value::Float(x)),
            Repr::Exact { numerator, denominator } => {
                let r = parse_rational(&format!("{numerator}/{denominator}"))
                    .map_err(de::Error::custom)?;
                Ok(Value::Exact(r))
            }
        }
    }
}

/// `{numerator, denominator}` JSON encoding for exact values. Both parts are
/// decimal strings so that no consumer routes them through a double.
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Rational", 2)?;
        st.serialize_field("numerator", &r.numer().to_string())?;
        st.serialize_field("denominator", &r.denom().to_string())?;
        st.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Rational, D::Error> {
        match Value::deserialize(deserializer)? {
            Value::Exact(r) => Ok(r),
            Value::Float(x) => Rational::from_float(x).ok_or_else(|| de::Error::custom("non-finite")),
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], serializer: S) -> std::result::Result<S::Ok, S::Error> {
            let mut seq = serializer.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&Value::Exact(r.clone()))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Vec<Rational>, D::Error> {
            let values = Vec::<Value>::deserialize(deserializer)?;
            values
                .into_iter()
                .map(|v| match v {
                    Value::Exact(r) => Ok(r),
                    Value::Float(x) => Rational::from_float(x).ok_or_else(|| de::Error::custom("non-finite")),
                })
                .collect()
        }
    }
}

/// Renders `r` as `a/b`, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `a/b`, an integer, or a decimal literal (optionally with an
/// exponent) into an exact rational. Decimal literals are read exactly, so
/// `0.1` is `1/10`.
pub fn parse_rational(input: &str) -> Result<Rational> {
    let err = |position: usize, reason: &str| Error::Parse {
        input: input.to_string(),
        position,
        reason: reason.to_string(),
    };
    let lead = input.len() - input.trim_start().len();
    let s = input.trim();
    if s.is_empty() {
        return Err(err(0, "empty number"));
    }
    if let Some(slash) = s.find('/') {
        let num = parse_integer(&s[..slash]).map_err(|(p, why)| err(lead + p, why))?;
        let den = parse_integer(&s[slash + 1..]).map_err(|(p, why)| err(lead + slash + 1 + p, why))?;
        if den.is_zero() {
            return Err(err(lead + slash + 1, "zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }
    parse_decimal(s).map_err(|(p, why)| err(lead + p, why))
}

fn parse_integer(s: &str) -> std::result::Result<BigInt, (usize, &'static str)> {
    let bytes = s.as_bytes();
    let (neg, start) = match bytes.first() {
        Some(b'-') => (true, 1),
        Some(b'+') => (false, 1),
        Some(_) => (false, 0),
        None => return Err((0, "missing digits")),
    };
    if start == bytes.len() {
        return Err((start, "missing digits"));
    }
    if let Some(p) = bytes[start..].iter().position(|b| !b.is_ascii_digit()) {
        return Err((start + p, "unexpected character"));
    }
    let mag = BigInt::from_str_radix(&s[start..], 10).map_err(|_| (start, "invalid integer"))?;
    Ok(if neg { -mag } else { mag })
}

fn parse_decimal(s: &str) -> std::result::Result<Rational, (usize, &'static str)> {
    let bytes = s.as_bytes();
    let mut i = 0;
    let mut neg = false;
    if let Some(&b) = bytes.first() {
        if b == b'-' || b == b'+' {
            neg = b == b'-';
            i = 1;
        }
    }
    let mut digits = String::new();
    let mut frac_len: i64 = 0;
    let mut seen_dot = false;
    let mut seen_digit = false;
    while i < bytes.len() {
        match bytes[i] {
            b'0'..=b'9' => {
                digits.push(bytes[i] as char);
                seen_digit = true;
                if seen_dot {
                    frac_len += 1;
                }
            }
            b'.' if !seen_dot => seen_dot = true,
            b'e' | b'E' => break,
            _ => return Err((i, "unexpected character")),
        }
        i += 1;
    }
    if !seen_digit {
        return Err((i.min(bytes.len()), "missing digits"));
    }
    let mut exp: i64 = 0;
    if i < bytes.len() {
        let exp_start = i + 1;
        let e = parse_integer(&s[exp_start..]).map_err(|(p, why)| (exp_start + p, why))?;
        exp = e.to_i64().filter(|e| e.abs() <= 10_000).ok_or((exp_start, "exponent out of range"))?;
    }
    let mut value = Rational::from_integer(BigInt::from_str_radix(&digits, 10).map_err(|_| (0, "invalid digits"))?);
    let shift = exp - frac_len;
    let ten = Rational::from_integer(BigInt::from(10));
    if shift >= 0 {
        value *= num_traits::pow(ten, shift as usize);
    } else {
        value /= num_traits::pow(ten, (-shift) as usize);
    }
    Ok(if neg { -value } else { value })
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}
