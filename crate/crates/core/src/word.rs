//! Words over `{1, 2}`, the composed similarities `S_w` and the cylinders `J_w = S_w([0, 1])`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default cap on word length.
pub const DEFAULT_MAX_LEN: usize = 64;

/// A finite word over the alphabet `{1, 2}`.
///
/// Ordering is lexicographic on symbols. For words that are not prefixes of
/// one another this is also the left-to-right order of their cylinders.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        Self::with_limit(symbols, DEFAULT_MAX_LEN)
    }

    pub fn with_limit(symbols: Vec<u8>, limit: usize) -> Result<Self> {
        if let Some(&bad) = symbols.iter().find(|&&s| s != 1 && s != 2) {
            return Err(Error::InvalidSymbol(char::from_digit(bad as u32 % 36, 36).unwrap_or('?')));
        }
        if symbols.len() > limit {
            return Err(Error::WordTooLong { len: symbols.len(), limit });
        }
        Ok(Word(symbols))
    }

    /// Parses `"1221"`; `"e"` and `""` both denote the empty word.
    pub fn parse_with_limit(text: &str, limit: usize) -> Result<Self> {
        let text = text.trim();
        if text == "e" || text.is_empty() {
            return Ok(Word::empty());
        }
        let symbols = text
            .chars()
            .map(|c| match c {
                '1' => Ok(1),
                '2' => Ok(2),
                other => Err(Error::InvalidSymbol(other)),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::with_limit(symbols, limit)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut symbols = self.0.clone();
        symbols.extend_from_slice(&other.0);
        Word(symbols)
    }

    /// `self` followed by the symbols of `suffix` (a string over "12").
    pub fn extend(&self, suffix: &str) -> Word {
        self.concat(&suffix.parse().expect("static suffix over {1,2}"))
    }

    pub fn child(&self, symbol: u8) -> Word {
        debug_assert!(symbol == 1 || symbol == 2);
        let mut symbols = self.0.clone();
        symbols.push(symbol);
        Word(symbols)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Swaps `1 <-> 2`, the word-level image of `x -> 1 - x`.
    pub fn mirror(&self) -> Word {
        Word(self.0.iter().map(|&s| 3 - s).collect())
    }

    /// All words of length `k`, in lexicographic order.
    pub fn all_of_length(k: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..k {
            out = out.iter().flat_map(|w| [w.child(1), w.child(2)]).collect();
        }
        out
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Word::parse_with_limit(s, DEFAULT_MAX_LEN)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `x -> scale * x + translate`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap<T> {
    pub scale: T,
    pub translate: T,
}

impl<T: Scalar> AffineMap<T> {
    pub fn identity() -> Self {
        AffineMap { scale: T::one(), translate: T::zero() }
    }

    pub fn apply(&self, x: &T) -> T {
        self.scale.clone() * x.clone() + self.translate.clone()
    }

    /// `self ∘ inner`.
    pub fn then_inner(&self, inner: &AffineMap<T>) -> AffineMap<T> {
        AffineMap { scale: self.scale.clone() * inner.scale.clone(), translate: self.apply(&inner.translate) }
    }
}

/// `S_1(x) = r x` or `S_2(x) = r x + (1 - r)`.
fn generator<T: Scalar>(symbol: u8, r: &T) -> AffineMap<T> {
    let translate = if symbol == 1 { T::zero() } else { T::one() - r.clone() };
    AffineMap { scale: r.clone(), translate }
}

/// `S_w = S_{w_1} ∘ ... ∘ S_{w_k}`; the empty word gives the identity.
pub fn compose<T: Scalar>(word: &Word, r: &T) -> Result<AffineMap<T>> {
    r.check_ratio()?;
    Ok(word.symbols().iter().fold(AffineMap::identity(), |acc, &s| acc.then_inner(&generator(s, r))))
}

/// `J_w` as `(left, right)`.
pub fn cylinder<T: Scalar>(word: &Word, r: &T) -> Result<(T, T)> {
    let map = compose(word, r)?;
    Ok((map.apply(&T::zero()), map.apply(&T::one())))
}

/// `(p_w, s_w) = (2^-|w|, r^|w|)`.
pub fn weight_and_scale<T: Scalar>(word: &Word, r: &T) -> (T, T) {
    (T::from_ratio(1, 2).powi(word.len()), r.powi(word.len()))
}
