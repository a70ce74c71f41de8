//! Rational functions of the formal contraction ratio `r`, and exact root isolation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::IntPoly;
use crate::scalar::{fraction_string, ParamScalar, Scalar};

/// `num(r) / den(r)` with integer coefficients.
///
/// Normal form: no common polynomial factor, the joint content of all
/// coefficients is 1 and the leading coefficient of `den` is positive. Two
/// equal functions therefore have identical coefficient vectors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ParamRational {
    num: IntPoly,
    den: IntPoly,
}

impl ParamRational {
    pub fn new(num: IntPoly, den: IntPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: IntPoly, den: IntPoly) -> Self {
        if num.is_zero() {
            return ParamRational { num, den: IntPoly::one() };
        }
        let (mut num, mut den) = if den.is_constant() || num.is_constant() {
            (num, den)
        } else {
            let g = num.gcd(&den);
            if g.is_constant() {
                (num, den)
            } else {
                (num.div_exact(&g).expect("gcd divides numerator"), den.div_exact(&g).expect("gcd divides denominator"))
            }
        };
        let mut c = num.content().gcd(&den.content());
        if den.leading().is_negative() {
            c = -c;
        }
        if !c.is_one() {
            num = num.div_scalar_exact(&c);
            den = den.div_scalar_exact(&c);
        }
        ParamRational { num, den }
    }

    pub fn from_poly(p: IntPoly) -> Self {
        Self::normalized(p, IntPoly::one())
    }

    pub fn constant(c: &ParamScalar) -> Self {
        Self::normalized(IntPoly::constant(c.numer().clone()), IntPoly::constant(c.denom().clone()))
    }

    /// The formal parameter `r`.
    pub fn r() -> Self {
        Self::from_poly(IntPoly::var())
    }

    pub fn num(&self) -> &IntPoly {
        &self.num
    }

    pub fn den(&self) -> &IntPoly {
        &self.den
    }

    /// Constant value, if the function does not depend on `r`.
    pub fn as_constant(&self) -> Option<ParamScalar> {
        (self.num.is_constant() && self.den.is_constant()).then(|| {
            ParamScalar::new(self.num.coeffs().first().cloned().unwrap_or_else(BigInt::zero), self.den.leading())
        })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.num.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalized(&self.num * &rhs.den, &self.den * &rhs.num))
    }

    pub fn evaluate(&self, r: &ParamScalar) -> Result<ParamScalar> {
        let d = self.den.eval(r);
        if d.is_zero() {
            return Err(Error::PoleAtPoint(fraction_string(r)));
        }
        Ok(self.num.eval(r) / d)
    }

    /// Sign of the function at `r`, computed without forming the quotient.
    pub fn sign_at(&self, r: &ParamScalar) -> Result<Ordering> {
        let d = self.den.eval(r);
        if d.is_zero() {
            return Err(Error::PoleAtPoint(fraction_string(r)));
        }
        let s = self.num.eval(r).cmp(&ParamScalar::zero());
        Ok(if d.is_negative() { s.reverse() } else { s })
    }
}

/// Bracket `[lo, hi]` around a sign change of a rational function.
#[derive(Clone, Debug, PartialEq)]
pub struct RootBracket {
    pub lo: ParamScalar,
    pub hi: ParamScalar,
    /// Set when a bisection midpoint hit the root exactly.
    pub exact: Option<ParamScalar>,
}

impl RootBracket {
    /// Point returned to callers: the exact root if found, else the midpoint.
    pub fn value(&self) -> ParamScalar {
        match &self.exact {
            Some(x) => x.clone(),
            None => (&self.lo + &self.hi) / ParamScalar::from_integer(2.into()),
        }
    }
}

/// Bisects on exact rational midpoints until the bracket is at most `2 * tol` wide.
pub fn bisect(f: &ParamRational, lo: &ParamScalar, hi: &ParamScalar, tol: &ParamScalar) -> Result<RootBracket> {
    if !tol.is_positive() {
        return Err(Error::NonPositiveTolerance);
    }
    let (mut lo, mut hi) = if lo <= hi { (lo.clone(), hi.clone()) } else { (hi.clone(), lo.clone()) };
    let interval_err =
        |lo: &ParamScalar, hi: &ParamScalar| Error::PoleInInterval { lo: fraction_string(lo), hi: fraction_string(hi) };
    if f.den.eval(&lo).is_zero() || f.den.count_roots(&lo, &hi) > 0 {
        return Err(interval_err(&lo, &hi));
    }
    let s_lo = f.sign_at(&lo)?;
    let s_hi = f.sign_at(&hi)?;
    if s_lo == Ordering::Equal {
        return Ok(RootBracket { exact: Some(lo.clone()), lo: lo.clone(), hi: lo });
    }
    if s_hi == Ordering::Equal {
        return Ok(RootBracket { exact: Some(hi.clone()), lo: hi.clone(), hi });
    }
    if s_lo == s_hi {
        return Err(Error::NoSignChange { lo: fraction_string(&lo), hi: fraction_string(&hi) });
    }
    let two = ParamScalar::from_integer(2.into());
    let width_limit = tol * &two;
    while &hi - &lo > width_limit {
        let mid = (&lo + &hi) / &two;
        match f.sign_at(&mid)? {
            Ordering::Equal => return Ok(RootBracket { exact: Some(mid.clone()), lo: mid.clone(), hi: mid }),
            s if s == s_lo => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(RootBracket { lo, hi, exact: None })
}

/// Root of `f` in `[lo, hi]` to within `tol`; requires a strict sign change.
pub fn isolate_root(f: &ParamRational, lo: &ParamScalar, hi: &ParamScalar, tol: &ParamScalar) -> Result<ParamScalar> {
    bisect(f, lo, hi, tol).map(|b| b.value())
}

impl Scalar for ParamRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::constant(&ParamScalar::new(num.into(), den.into()))
    }

    fn check_ratio(&self) -> Result<()> {
        match self.as_constant() {
            Some(c) => c.check_ratio(),
            None => Ok(()),
        }
    }
}

impl Zero for ParamRational {
    fn zero() -> Self {
        ParamRational { num: IntPoly::zero(), den: IntPoly::one() }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for ParamRational {
    fn one() -> Self {
        Self::from_poly(IntPoly::one())
    }
}

impl Add for &ParamRational {
    type Output = ParamRational;
    fn add(self, rhs: &ParamRational) -> ParamRational {
        if self.den == rhs.den {
            return ParamRational::normalized(&self.num + &rhs.num, self.den.clone());
        }
        ParamRational::normalized(&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
    }
}

impl Sub for &ParamRational {
    type Output = ParamRational;
    fn sub(self, rhs: &ParamRational) -> ParamRational {
        self + &(-rhs)
    }
}

impl Mul for &ParamRational {
    type Output = ParamRational;
    fn mul(self, rhs: &ParamRational) -> ParamRational {
        ParamRational::normalized(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for &ParamRational {
    type Output = ParamRational;
    /// Panics on an identically zero divisor; use [`ParamRational::checked_div`] otherwise.
    fn div(self, rhs: &ParamRational) -> ParamRational {
        self.checked_div(rhs).expect("division by the zero rational function")
    }
}

impl Neg for &ParamRational {
    type Output = ParamRational;
    fn neg(self) -> ParamRational {
        ParamRational { num: -&self.num, den: self.den.clone() }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for ParamRational {
            type Output = ParamRational;
            fn $method(self, rhs: ParamRational) -> ParamRational {
                (&self).$method(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for ParamRational {
    type Output = ParamRational;
    fn neg(self) -> ParamRational {
        -&self
    }
}

impl fmt::Display for ParamRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num_needs_parens = self.num.coeffs().iter().filter(|c| !c.is_zero()).count() > 1;
        if self.den == IntPoly::one() {
            return write!(f, "{}", self.num);
        }
        let den_needs_parens = self.den.coeffs().iter().filter(|c| !c.is_zero()).count() > 1
            || self.den.degree() > Some(0) && !self.den.leading().is_one();
        match (num_needs_parens, den_needs_parens) {
            (true, true) => write!(f, "({})/({})", self.num, self.den),
            (true, false) => write!(f, "({})/{}", self.num, self.den),
            (false, true) => write!(f, "{}/({})", self.num, self.den),
            (false, false) => write!(f, "{}/{}", self.num, self.den),
        }
    }
}

impl fmt::Debug for ParamRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: Vec<String>,
    den: Vec<String>,
}

fn coeff_strings(p: &IntPoly) -> Vec<String> {
    if p.is_zero() {
        return vec!["0".into()];
    }
    p.coeffs().iter().map(|c| c.to_string()).collect()
}

impl Serialize for ParamRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalRepr { num: coeff_strings(&self.num), den: coeff_strings(&self.den) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ParamRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = RationalRepr::deserialize(d)?;
        let parse = |v: &[String]| -> std::result::Result<IntPoly, D::Error> {
            v.iter()
                .map(|c| c.parse::<BigInt>().map_err(D::Error::custom))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(IntPoly::new)
        };
        ParamRational::new(parse(&repr.num)?, parse(&repr.den)?).map_err(D::Error::custom)
    }
}
