//! The self-similar measure `P = 1/2 P∘S_1^-1 + 1/2 P∘S_2^-1` in closed form.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::word::{compose, weight_and_scale, Word};

/// Uniform Cantor measure with contraction ratio `r` (concrete or formal).
#[derive(Clone, Debug, PartialEq)]
pub struct CantorMeasure<T> {
    ratio: T,
}

impl<T: Scalar> CantorMeasure<T> {
    pub fn new(ratio: T) -> Result<Self> {
        ratio.check_ratio()?;
        Ok(CantorMeasure { ratio })
    }

    pub fn ratio(&self) -> &T {
        &self.ratio
    }

    /// `E(X) = 1/2` for every ratio, by symmetry of the two maps about 1/2.
    pub fn mean(&self) -> T {
        T::half()
    }

    /// `V(X) = (1 - r) / (4 (r + 1))`.
    pub fn variance(&self) -> T {
        let r = self.ratio.clone();
        (T::one() - r.clone()) / (T::from_ratio(4, 1) * (r + T::one()))
    }

    /// `E(X^2) = V + 1/4`.
    pub fn second_moment(&self) -> T {
        self.variance() + T::from_ratio(1, 4)
    }

    /// `a(w) = S_w(1/2)`, the centroid of `J_w`.
    pub fn cylinder_mean(&self, word: &Word) -> T {
        let shift = T::one() - self.ratio.clone();
        word.symbols().iter().rev().fold(T::half(), |x, &s| {
            let x = self.ratio.clone() * x;
            if s == 1 {
                x
            } else {
                x + shift.clone()
            }
        })
    }

    /// `∫_{J_w} (x - x0)^2 dP = p_w (s_w^2 V + (S_w(1/2) - x0)^2)`.
    pub fn cylinder_integral(&self, word: &Word, x0: &T) -> T {
        let (p, s) = weight_and_scale(word, &self.ratio);
        let offset = self.cylinder_mean(word) - x0.clone();
        p * (s.clone() * s * self.variance() + offset.clone() * offset)
    }

    /// `∫ (x - x0)^2 dP = V + (x0 - 1/2)^2`.
    pub fn second_moment_about(&self, x0: &T) -> T {
        let d = x0.clone() - self.mean();
        self.variance() + d.clone() * d
    }

    /// Conditional mean of `X` given `X ∈ ∪ J_w`; the cylinders must be disjoint.
    pub fn cond_expectation(&self, words: &[Word]) -> Result<T> {
        if words.is_empty() {
            return Err(Error::EmptyWordSet);
        }
        check_prefix_free(words)?;
        let mut mass = T::zero();
        let mut moment = T::zero();
        for w in words {
            let p = T::half().powi(w.len());
            moment = moment + p.clone() * self.cylinder_mean(w);
            mass = mass + p;
        }
        Ok(moment / mass)
    }

    /// `P(∪ J_w)` for a prefix-free set of words.
    pub fn mass(&self, words: &[Word]) -> T {
        words.iter().fold(T::zero(), |acc, w| acc + weight_and_scale(w, &self.ratio).0)
    }

    /// Composed similarity for this measure's ratio.
    pub fn map(&self, word: &Word) -> crate::word::AffineMap<T> {
        compose(word, &self.ratio).expect("ratio validated at construction")
    }
}

/// Rejects word sets in which one word is a prefix of another.
pub fn check_prefix_free(words: &[Word]) -> Result<()> {
    let mut sorted: Vec<&Word> = words.iter().collect();
    sorted.sort();
    // after sorting, a prefix is immediately followed by one of its extensions
    for pair in sorted.windows(2) {
        if pair[0].is_prefix_of(pair[1]) {
            return Err(Error::OverlappingCylinders(pair[0].to_string(), pair[1].to_string()));
        }
    }
    Ok(())
}
