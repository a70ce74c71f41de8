//! Exact scalars and the [`Scalar`] abstraction shared by concrete and formal ratios.
//!
//! A concrete contraction ratio is a [`ParamScalar`] (an arbitrary precision
//! rational). Every construction in this crate is written once against
//! [`Scalar`] so it can run either on such a number or on the formal
//! parameter `r` (see [`crate::ParamRational`]).

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always reduced with a positive denominator.
pub type ParamScalar = BigRational;

/// Field operations needed by the Cantor-measure formulas.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Rejects values that cannot serve as a contraction ratio.
    fn check_ratio(&self) -> Result<()>;

    fn powi(&self, k: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc * self.clone();
        }
        acc
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(num.into(), den.into())
    }

    fn check_ratio(&self) -> Result<()> {
        if self.is_positive() && *self < Self::half() {
            Ok(())
        } else {
            Err(Error::InvalidRatio(fraction_string(self)))
        }
    }

    fn powi(&self, k: usize) -> Self {
        num_traits::pow(self.clone(), k)
    }
}

/// Float mode, used by the oracles for speed. Not exact.
impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn check_ratio(&self) -> Result<()> {
        if *self > 0.0 && *self < 0.5 {
            Ok(())
        } else {
            Err(Error::InvalidRatio(self.to_string()))
        }
    }

    fn powi(&self, k: usize) -> Self {
        f64::powi(*self, k as i32)
    }
}

pub fn ratio(num: i64, den: i64) -> ParamScalar {
    ParamScalar::from_ratio(num, den)
}

/// Parses `"4/9"`, `"-3"`, `"0.45"` or `"1e-12"` into an exact rational.
pub fn parse_scalar(text: &str) -> Result<ParamScalar> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32 - 1;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(digits);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// `"num/den"`, the canonical text form used in every report.
pub fn fraction_string(x: &ParamScalar) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Decimal expansion with `places` digits after the point, rounded half away from zero.
pub fn fixed_decimal(x: &ParamScalar, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = x.abs() * BigRational::from_integer(scale.clone());
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let rounded = if rem * 2 >= *scaled.denom() { q + 1 } else { q };
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let sign = if x.is_negative() && !rounded_is_zero(&int_part, &frac_part) { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{int_part}");
    }
    format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = places)
}

fn rounded_is_zero(a: &BigInt, b: &BigInt) -> bool {
    a.is_zero() && b.is_zero()
}

/// Decimal rendering with `digits` significant digits (presentation only).
pub fn sig_decimal(x: &ParamScalar, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut magnitude = x.abs();
    let mut exponent: i64 = 0;
    while magnitude >= ten {
        magnitude /= ten.clone();
        exponent += 1;
    }
    while magnitude < BigRational::one() {
        magnitude *= ten.clone();
        exponent -= 1;
    }
    let places = (digits as i64 - 1 - exponent).max(0) as usize;
    fixed_decimal(x, places)
}

/// Sign of a rational as an [`Ordering`] against zero.
pub fn sign(x: &ParamScalar) -> Ordering {
    x.cmp(&ParamScalar::zero())
}

/// `serialize_with` helpers that write exact values as `"num/den"` strings.
pub mod serde_fraction {
    use super::{fraction_string, ParamScalar};
    use serde::Serializer;

    pub fn one<S: Serializer>(x: &ParamScalar, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&fraction_string(x))
    }

    pub fn option<S: Serializer>(x: &Option<ParamScalar>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&fraction_string(v)),
            None => s.serialize_none(),
        }
    }

    pub fn vec<S: Serializer>(xs: &[ParamScalar], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(fraction_string))
    }

    pub fn vec_option<S: Serializer>(xs: &[Option<ParamScalar>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(|x| x.as_ref().map(fraction_string)))
    }
}
