//! The alpha, beta and delta codebook families, their CVT counts and enumeration.
//!
//! Every family codebook is described by a [`Construction`]: the family, `n`,
//! an index set `I` of words and one variant bit per three-point group. The
//! construction fixes the *cells*, i.e. for every generator the prefix-free
//! list of words whose cylinders it is meant to quantize; the generator
//! itself is the conditional mean of those cylinders.
//!
//! Variant bit 0 selects the left-heavy group written first,
//! `{a(s11, s121, s1221), a(s1222, s21), a(s22)}` for alpha and
//! `{a(s11, s1211, s12121), a(s12122, s122, s211), a(s212, s22)}` for delta;
//! bit 1 selects the mirror image. Bits are listed in lexicographic order of
//! the words that carry a group.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::CantorMeasure;
use crate::scalar::{fraction_string, parse_scalar, ParamScalar, Scalar};
use crate::word::Word;
use crate::ParamRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Alpha,
    Beta,
    Delta,
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Alpha => "alpha",
            Family::Beta => "beta",
            Family::Delta => "delta",
            Family::Custom => "custom",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" => Ok(Family::Alpha),
            "beta" => Ok(Family::Beta),
            "delta" => Ok(Family::Delta),
            "custom" => Ok(Family::Custom),
            _ => Err(Error::Parse(format!("unknown family {s:?}"))),
        }
    }
}

/// `ℓ(n)` with `2^ℓ <= n < 2^(ℓ+1)`.
pub fn level(n: usize) -> usize {
    assert!(n >= 1);
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// Which of the three construction regimes `n` falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `n = 2^ℓ`.
    PowerOfTwo,
    /// `n = 2^ℓ + k` with `1 <= k <= 2^(ℓ-1)`; `I` carries the three-point groups.
    Lower { k: usize },
    /// `n = 3·2^(ℓ-1) + k` with `1 <= k < 2^(ℓ-1)`; `I` carries the four-point groups.
    Upper { k: usize },
}

pub fn regime(n: usize) -> Regime {
    let l = level(n);
    if n == 1 << l {
        Regime::PowerOfTwo
    } else if n <= 3 << (l - 1) {
        Regime::Lower { k: n - (1 << l) }
    } else {
        Regime::Upper { k: n - (3 << (l - 1)) }
    }
}

/// Parameters that determine a family codebook.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Construction {
    pub family: Family,
    pub n: usize,
    /// Sorted, duplicate-free.
    pub index_set: Vec<Word>,
    pub variants: Vec<u8>,
}

impl Construction {
    pub fn new(family: Family, n: usize, mut index_set: Vec<Word>, variants: Vec<u8>) -> Self {
        index_set.sort();
        Construction { family, n, index_set, variants }
    }

    /// The canonical choice: smallest index set, all variant bits 0.
    pub fn canonical(family: Family, n: usize) -> Result<Self> {
        constructions(n, family)?.next().ok_or(Error::UnsupportedFamily(family.to_string()))
    }

    pub fn level(&self) -> usize {
        level(self.n)
    }

    /// Cells of the codebook, left to right.
    pub fn cells(&self) -> Result<Vec<Vec<Word>>> {
        if self.n < 2 {
            return Err(Error::BadCount { n: self.n, min: 2 });
        }
        if self.index_set.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadCardinality("index set contains duplicates".into()));
        }
        if let Some(&bad) = self.variants.iter().find(|&&v| v > 1) {
            return Err(Error::BadVariants(format!("variant bit {bad} is not 0 or 1")));
        }
        match self.family {
            Family::Alpha | Family::Delta => self.triple_family_cells(),
            Family::Beta => self.beta_cells(),
            Family::Custom => Err(Error::UnsupportedFamily("custom".into())),
        }
    }

    fn check_lengths(&self, expected: usize) -> Result<()> {
        for w in &self.index_set {
            if w.len() != expected {
                return Err(Error::BadWordLength { word: w.to_string(), len: w.len(), expected });
            }
        }
        Ok(())
    }

    fn check_cardinality(&self, expected: usize) -> Result<()> {
        if self.index_set.len() != expected {
            return Err(Error::BadCardinality(format!(
                "n = {} needs card(I) = {expected}, got {}",
                self.n,
                self.index_set.len()
            )));
        }
        Ok(())
    }

    fn check_variant_count(&self, expected: usize) -> Result<()> {
        if self.variants.len() != expected {
            return Err(Error::BadVariants(format!("expected {expected} variant bits, got {}", self.variants.len())));
        }
        Ok(())
    }

    fn triple_family_cells(&self) -> Result<Vec<Vec<Word>>> {
        let l = self.level();
        let group = |sigma: &Word, bit: u8| match self.family {
            Family::Delta => delta_group(sigma, bit),
            _ => alpha_group(sigma, bit),
        };
        let mut cells = Vec::with_capacity(self.n);
        match regime(self.n) {
            Regime::PowerOfTwo => {
                self.check_cardinality(0)?;
                self.check_variant_count(0)?;
                cells.extend(Word::all_of_length(l).into_iter().map(|w| vec![w]));
            }
            Regime::Lower { k } => {
                self.check_lengths(l - 1)?;
                self.check_cardinality(k)?;
                self.check_variant_count(k)?;
                let mut bits = self.variants.iter();
                for sigma in Word::all_of_length(l - 1) {
                    if self.index_set.contains(&sigma) {
                        cells.extend(group(&sigma, *bits.next().expect("counted")));
                    } else {
                        cells.push(vec![sigma.child(1)]);
                        cells.push(vec![sigma.child(2)]);
                    }
                }
            }
            Regime::Upper { k } => {
                self.check_lengths(l - 1)?;
                self.check_cardinality(k)?;
                self.check_variant_count((1 << (l - 1)) - k)?;
                let mut bits = self.variants.iter();
                for sigma in Word::all_of_length(l - 1) {
                    if self.index_set.contains(&sigma) {
                        cells.extend(Word::all_of_length(2).iter().map(|t| vec![sigma.concat(t)]));
                    } else {
                        cells.extend(group(&sigma, *bits.next().expect("counted")));
                    }
                }
            }
        }
        debug_assert_eq!(cells.len(), self.n);
        Ok(cells)
    }

    fn beta_cells(&self) -> Result<Vec<Vec<Word>>> {
        let l = self.level();
        self.check_lengths(l)?;
        self.check_cardinality(self.n - (1 << l))?;
        self.check_variant_count(0)?;
        let mut cells = Vec::with_capacity(self.n);
        for sigma in Word::all_of_length(l) {
            if self.index_set.contains(&sigma) {
                cells.push(vec![sigma.child(1)]);
                cells.push(vec![sigma.child(2)]);
            } else {
                cells.push(vec![sigma]);
            }
        }
        Ok(cells)
    }

    /// Image under `x -> 1 - x`: mirrored index words, reversed and flipped variant bits.
    pub fn mirror(&self) -> Construction {
        Construction::new(
            self.family,
            self.n,
            self.index_set.iter().map(Word::mirror).collect(),
            self.variants.iter().rev().map(|b| 1 - b).collect(),
        )
    }

    pub fn build<T: Scalar>(&self, measure: &CantorMeasure<T>) -> Result<Codebook<T>> {
        let cells = self.cells()?;
        let points = cells.iter().map(|cell| measure.cond_expectation(cell)).collect::<Result<Vec<T>>>()?;
        Ok(Codebook { construction: Some(self.clone()), points, cells: Some(cells) })
    }
}

fn words(sigma: &Word, suffixes: &[&str]) -> Vec<Word> {
    suffixes.iter().map(|s| sigma.extend(s)).collect()
}

/// The three cells of `A_σ`.
pub fn alpha_group(sigma: &Word, variant: u8) -> Vec<Vec<Word>> {
    if variant == 0 {
        vec![words(sigma, &["11", "121", "1221"]), words(sigma, &["1222", "21"]), words(sigma, &["22"])]
    } else {
        vec![words(sigma, &["11"]), words(sigma, &["12", "2111"]), words(sigma, &["2112", "212", "22"])]
    }
}

/// The three cells of `C_σ`.
pub fn delta_group(sigma: &Word, variant: u8) -> Vec<Vec<Word>> {
    if variant == 0 {
        vec![
            words(sigma, &["11", "1211", "12121"]),
            words(sigma, &["12122", "122", "211"]),
            words(sigma, &["212", "22"]),
        ]
    } else {
        vec![
            words(sigma, &["11", "121"]),
            words(sigma, &["122", "211", "21211"]),
            words(sigma, &["21212", "2122", "22"]),
        ]
    }
}

/// An ordered list of generators, optionally tagged with the construction it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook<T> {
    pub construction: Option<Construction>,
    pub points: Vec<T>,
    /// Intended cell of each generator, when known.
    pub cells: Option<Vec<Vec<Word>>>,
}

impl<T: Scalar> Codebook<T> {
    pub fn custom(points: Vec<T>) -> Self {
        Codebook { construction: None, points, cells: None }
    }

    pub fn family(&self) -> Family {
        self.construction.as_ref().map_or(Family::Custom, |c| c.family)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// `x -> 1 - x` applied to every generator (order reversed so points stay increasing).
    pub fn reflect(&self) -> Codebook<T> {
        Codebook {
            construction: self.construction.as_ref().map(Construction::mirror),
            points: self.points.iter().rev().map(|p| T::one() - p.clone()).collect(),
            cells: self.cells.as_ref().map(|cells| {
                cells
                    .iter()
                    .rev()
                    .map(|cell| {
                        let mut m: Vec<Word> = cell.iter().map(Word::mirror).collect();
                        m.sort();
                        m
                    })
                    .collect()
            }),
        }
    }
}

impl Codebook<ParamRational> {
    /// Specializes a formal codebook to a concrete ratio.
    pub fn evaluate(&self, r: &ParamScalar) -> Result<Codebook<ParamScalar>> {
        Ok(Codebook {
            construction: self.construction.clone(),
            points: self.points.iter().map(|p| p.evaluate(r)).collect::<Result<_>>()?,
            cells: self.cells.clone(),
        })
    }
}

pub fn alpha<T: Scalar>(
    measure: &CantorMeasure<T>,
    n: usize,
    index_set: Vec<Word>,
    variants: Vec<u8>,
) -> Result<Codebook<T>> {
    Construction::new(Family::Alpha, n, index_set, variants).build(measure)
}

pub fn beta<T: Scalar>(measure: &CantorMeasure<T>, n: usize, index_set: Vec<Word>) -> Result<Codebook<T>> {
    Construction::new(Family::Beta, n, index_set, Vec::new()).build(measure)
}

pub fn delta<T: Scalar>(
    measure: &CantorMeasure<T>,
    n: usize,
    index_set: Vec<Word>,
    variants: Vec<u8>,
) -> Result<Codebook<T>> {
    Construction::new(Family::Delta, n, index_set, variants).build(measure)
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u8);
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

fn pow2(e: usize) -> BigUint {
    BigUint::one() << e
}

/// Number of distinct `(I, variants)` constructions for `n`.
///
/// For alpha and delta this is the CVT count of the construction; for beta it
/// is the number of admissible index sets.
pub fn count_cvts(n: usize, family: Family) -> Result<BigUint> {
    if n < 2 {
        return Err(Error::BadCount { n, min: 2 });
    }
    let l = level(n);
    let half = 1usize << (l - 1);
    match family {
        Family::Alpha | Family::Delta => Ok(match regime(n) {
            Regime::PowerOfTwo => BigUint::one(),
            Regime::Lower { k } if k < half => pow2(k) * binomial(half, k),
            Regime::Lower { .. } => pow2(half),
            Regime::Upper { k } => pow2((2 << l) - n) * binomial(half, k),
        }),
        Family::Beta => Ok(binomial(1 << l, n - (1 << l))),
        Family::Custom => Err(Error::UnsupportedFamily("custom".into())),
    }
}

/// Every admissible construction for `n`, in lexicographic order of `I`, then of the variant bits.
pub fn constructions(n: usize, family: Family) -> Result<impl Iterator<Item = Construction>> {
    if n < 2 {
        return Err(Error::BadCount { n, min: 2 });
    }
    let l = level(n);
    // (candidate index words, card(I), number of variant bits)
    let (candidates, card, bits) = match family {
        Family::Alpha | Family::Delta => match regime(n) {
            Regime::PowerOfTwo => (Vec::new(), 0, 0),
            Regime::Lower { k } => (Word::all_of_length(l - 1), k, k),
            Regime::Upper { k } => (Word::all_of_length(l - 1), k, (1 << (l - 1)) - k),
        },
        Family::Beta => (Word::all_of_length(l), n - (1 << l), 0),
        Family::Custom => return Err(Error::UnsupportedFamily("custom".into())),
    };
    Ok(candidates
        .into_iter()
        .combinations(card)
        .flat_map(move |set| BitVectors::new(bits).map(move |v| Construction::new(family, n, set.clone(), v))))
}

/// Builds every codebook of the family for `n` over the given measure.
pub fn enumerate<'a, T: Scalar + 'a>(
    n: usize,
    family: Family,
    measure: &'a CantorMeasure<T>,
) -> Result<impl Iterator<Item = Result<Codebook<T>>> + 'a> {
    Ok(constructions(n, family)?.map(move |c| c.build(measure)))
}

/// All 0/1 vectors of a fixed length, in lexicographic order.
struct BitVectors {
    next: Option<Vec<u8>>,
}

impl BitVectors {
    fn new(len: usize) -> Self {
        BitVectors { next: Some(vec![0; len]) }
    }
}

impl Iterator for BitVectors {
    type Item = Vec<u8>;
    fn next(&mut self) -> Option<Vec<u8>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        while i > 0 {
            i -= 1;
            if succ[i] == 0 {
                succ[i] = 1;
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(current)
    }
}

/// JSON form of a concrete codebook.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodebookRecord {
    pub family: Family,
    pub n: usize,
    #[serde(rename = "I")]
    pub index_set: Vec<Word>,
    pub variants: Vec<u8>,
    pub points: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<String>,
}

impl CodebookRecord {
    pub fn from_codebook(cb: &Codebook<ParamScalar>, r: Option<&ParamScalar>) -> Self {
        let (index_set, variants) =
            cb.construction.as_ref().map(|c| (c.index_set.clone(), c.variants.clone())).unwrap_or_default();
        CodebookRecord {
            family: cb.family(),
            n: cb.n(),
            index_set,
            variants,
            points: cb.points.iter().map(fraction_string).collect(),
            r: r.map(fraction_string),
        }
    }

    /// Re-ingests a record; family records are rebuilt and checked against the listed points.
    pub fn to_codebook(&self) -> Result<Codebook<ParamScalar>> {
        let points = self.points.iter().map(|p| parse_scalar(p)).collect::<Result<Vec<_>>>()?;
        if points.len() != self.n {
            return Err(Error::Parse(format!("n = {} but {} points", self.n, points.len())));
        }
        if self.family == Family::Custom {
            return Ok(Codebook::custom(points));
        }
        let construction = Construction::new(self.family, self.n, self.index_set.clone(), self.variants.clone());
        let cells = construction.cells()?;
        if let Some(r) = &self.r {
            let measure = CantorMeasure::new(parse_scalar(r)?)?;
            let rebuilt = construction.build(&measure)?;
            if rebuilt.points != points {
                return Err(Error::Parse("points do not match the construction at r".into()));
            }
        }
        Ok(Codebook { construction: Some(construction), points, cells: Some(cells) })
    }
}
