//! Independent checks on the exact engine: level-k discretizations of the
//! Cantor measure, a globally optimal 1-D quantizer by dynamic programming,
//! and Lloyd iteration.
//!
//! Everything here is generic over [`Scalar`] so it runs either exactly on
//! [`crate::ParamScalar`] or approximately on `f64`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::measure::CantorMeasure;
use crate::scalar::Scalar;
use crate::word::Word;

pub const MAX_DISCRETIZE_DEPTH: usize = 20;

/// Scalars that can also be compared.
pub trait OrderedScalar: Scalar + PartialOrd {}
impl<T: Scalar + PartialOrd> OrderedScalar for T {}

/// Equal-mass atoms at the level-`depth` cylinder centroids, sorted by position.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<T> {
    positions: Vec<T>,
    atom_mass: T,
    depth: usize,
}

pub fn discretize<T: Scalar>(measure: &CantorMeasure<T>, depth: usize) -> Result<DiscreteMeasure<T>> {
    if !(1..=MAX_DISCRETIZE_DEPTH).contains(&depth) {
        return Err(Error::DepthOutOfRange(depth));
    }
    let positions = Word::all_of_length(depth).iter().map(|w| measure.cylinder_mean(w)).collect();
    Ok(DiscreteMeasure { positions, atom_mass: T::half().powi(depth), depth })
}

impl<T: Scalar> DiscreteMeasure<T> {
    pub fn positions(&self) -> &[T] {
        &self.positions
    }

    pub fn atom_mass(&self) -> &T {
        &self.atom_mass
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn mean(&self) -> T {
        self.moments().run_mean(0..self.len())
    }

    pub fn variance(&self) -> T {
        self.moments().run_cost(0..self.len())
    }

    fn moments(&self) -> PrefixMoments<T> {
        PrefixMoments::new(&self.positions, &self.atom_mass)
    }
}

/// Prefix sums of mass, first and second moment over the sorted atoms.
struct PrefixMoments<T> {
    mass: Vec<T>,
    first: Vec<T>,
    second: Vec<T>,
}

impl<T: Scalar> PrefixMoments<T> {
    fn new(positions: &[T], atom_mass: &T) -> Self {
        let mut mass = vec![T::zero()];
        let mut first = vec![T::zero()];
        let mut second = vec![T::zero()];
        for x in positions {
            let m = atom_mass.clone();
            let mx = m.clone() * x.clone();
            mass.push(mass.last().expect("seeded").clone() + m);
            first.push(first.last().expect("seeded").clone() + mx.clone());
            second.push(second.last().expect("seeded").clone() + mx * x.clone());
        }
        PrefixMoments { mass, first, second }
    }

    fn sums(&self, run: &Range<usize>) -> (T, T, T) {
        (
            self.mass[run.end].clone() - self.mass[run.start].clone(),
            self.first[run.end].clone() - self.first[run.start].clone(),
            self.second[run.end].clone() - self.second[run.start].clone(),
        )
    }

    fn run_mean(&self, run: Range<usize>) -> T {
        let (m, f, _) = self.sums(&run);
        f / m
    }

    /// Squared error of a non-empty run about its own mean.
    fn run_cost(&self, run: Range<usize>) -> T {
        let (m, f, s) = self.sums(&run);
        s - f.clone() * f / m
    }

    /// Squared error of a run about an arbitrary point.
    fn run_cost_about(&self, run: Range<usize>, a: &T) -> T {
        let (m, f, s) = self.sums(&run);
        s - T::from_ratio(2, 1) * a.clone() * f + a.clone() * a.clone() * m
    }
}

/// An `n`-point quantizer of a discrete measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantizer<T> {
    pub points: Vec<T>,
    /// Consecutive atom index ranges forming the cells.
    pub runs: Vec<Range<usize>>,
    pub distortion: T,
}

fn check_count<T>(dm: &DiscreteMeasure<T>, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::BadCount { n, min: 1 });
    }
    if n > dm.positions.len() {
        return Err(Error::TooManyCodepoints { n, atoms: dm.positions.len() });
    }
    Ok(())
}

fn quantizer_from_splits<T: Scalar>(pm: &PrefixMoments<T>, splits: Vec<usize>, distortion: T) -> Quantizer<T> {
    let runs: Vec<Range<usize>> = splits.windows(2).map(|w| w[0]..w[1]).collect();
    let points = runs.iter().map(|r| pm.run_mean(r.clone())).collect();
    Quantizer { points, runs, distortion }
}

/// Globally optimal `n`-point quantizer by interval-partition dynamic programming.
///
/// Each layer is filled by divide and conquer over the monotone optimal split,
/// so a layer costs `O(m log m)` interval evaluations instead of `O(m^2)`.
/// Ties prefer the shorter left run.
pub fn dp_optimal<T: OrderedScalar>(dm: &DiscreteMeasure<T>, n: usize) -> Result<Quantizer<T>> {
    check_count(dm, n)?;
    let m = dm.len();
    let pm = dm.moments();
    // best[j] = optimal cost of the first j atoms with the current number of cells
    let mut best: Vec<Option<T>> = (0..=m).map(|j| (j >= 1).then(|| pm.run_cost(0..j))).collect();
    let mut splits_at: Vec<Vec<usize>> = Vec::with_capacity(n);
    for cells in 2..=n {
        let mut next: Vec<Option<T>> = vec![None; m + 1];
        let mut arg = vec![0usize; m + 1];
        let ctx = Layer { pm: &pm, prev: &best, cells };
        ctx.fill(cells, m, cells - 1, m - 1, &mut next, &mut arg);
        best = next;
        splits_at.push(arg);
    }
    let distortion = best[m].clone().expect("n <= m");
    let mut splits = vec![m];
    let mut j = m;
    for arg in splits_at.iter().rev() {
        j = arg[j];
        splits.push(j);
    }
    splits.push(0);
    splits.reverse();
    Ok(quantizer_from_splits(&pm, splits, distortion))
}

struct Layer<'a, T> {
    pm: &'a PrefixMoments<T>,
    prev: &'a [Option<T>],
    cells: usize,
}

impl<T: OrderedScalar> Layer<'_, T> {
    /// Fills `next[j]` for `j` in `lo..=hi`, with the split searched in `opt_lo..=opt_hi`.
    fn fill(&self, lo: usize, hi: usize, opt_lo: usize, opt_hi: usize, next: &mut [Option<T>], arg: &mut [usize]) {
        if lo > hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let first = opt_lo.max(self.cells - 1);
        let last = opt_hi.min(mid - 1);
        let mut choice: Option<(usize, T)> = None;
        for i in first..=last {
            let Some(prefix) = &self.prev[i] else { continue };
            let value = prefix.clone() + self.pm.run_cost(i..mid);
            if choice.as_ref().is_none_or(|(_, v)| value < *v) {
                choice = Some((i, value));
            }
        }
        let (split, value) = choice.expect("non-empty split range");
        next[mid] = Some(value);
        arg[mid] = split;
        if mid > lo {
            self.fill(lo, mid - 1, opt_lo, split, next, arg);
        }
        self.fill(mid + 1, hi, split, opt_hi, next, arg);
    }
}

/// Plain `O(m^2 n)` dynamic program; reference for [`dp_optimal`].
pub fn dp_optimal_naive<T: OrderedScalar>(dm: &DiscreteMeasure<T>, n: usize) -> Result<Quantizer<T>> {
    check_count(dm, n)?;
    let m = dm.len();
    let pm = dm.moments();
    let mut best: Vec<Option<T>> = (0..=m).map(|j| (j >= 1).then(|| pm.run_cost(0..j))).collect();
    let mut splits_at = Vec::new();
    for cells in 2..=n {
        let mut next = vec![None; m + 1];
        let mut arg = vec![0usize; m + 1];
        for j in cells..=m {
            let mut choice: Option<(usize, T)> = None;
            for (i, prefix) in best.iter().enumerate().take(j).skip(cells - 1) {
                let value = prefix.clone().expect("i >= cells - 1") + pm.run_cost(i..j);
                if choice.as_ref().is_none_or(|(_, v)| value < *v) {
                    choice = Some((i, value));
                }
            }
            let (i, v) = choice.expect("j >= cells");
            next[j] = Some(v);
            arg[j] = i;
        }
        best = next;
        splits_at.push(arg);
    }
    let distortion = best[m].clone().expect("n <= m");
    let mut splits = vec![m];
    let mut j = m;
    for arg in splits_at.iter().rev() {
        j = arg[j];
        splits.push(j);
    }
    splits.push(0);
    splits.reverse();
    Ok(quantizer_from_splits(&pm, splits, distortion))
}

/// Distortion of sorted `points` on the discrete measure (nearest point, ties left).
pub fn discrete_distortion<T: OrderedScalar>(dm: &DiscreteMeasure<T>, points: &[T]) -> Result<T> {
    let runs = assign(dm, points)?;
    let pm = dm.moments();
    Ok(sum_costs(&pm, &runs, points))
}

fn sum_costs<T: Scalar>(pm: &PrefixMoments<T>, runs: &[Range<usize>], points: &[T]) -> T {
    runs.iter()
        .zip(points)
        .filter(|(r, _)| !r.is_empty())
        .fold(T::zero(), |acc, (r, a)| acc + pm.run_cost_about(r.clone(), a))
}

/// Nearest-point runs; an atom equidistant from two points goes to the left one.
fn assign<T: OrderedScalar>(dm: &DiscreteMeasure<T>, points: &[T]) -> Result<Vec<Range<usize>>> {
    if points.is_empty() {
        return Err(Error::BadCount { n: 0, min: 1 });
    }
    if let Some(i) = points.windows(2).position(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::UnsortedCodebook(i + 1));
    }
    let two = T::from_ratio(2, 1);
    let mut runs = Vec::with_capacity(points.len());
    let mut start = 0;
    let mut cell = 0;
    for (idx, x) in dm.positions.iter().enumerate() {
        while cell + 1 < points.len() && two.clone() * x.clone() > points[cell].clone() + points[cell + 1].clone() {
            runs.push(start..idx);
            start = idx;
            cell += 1;
        }
    }
    runs.push(start..dm.len());
    while runs.len() < points.len() {
        runs.push(dm.len()..dm.len());
    }
    Ok(runs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LloydRun<T> {
    pub points: Vec<T>,
    pub distortion: T,
    pub iterations: usize,
    /// Distortion of the codebook before each update, then of the final codebook.
    pub history: Vec<T>,
}

impl<T: OrderedScalar> LloydRun<T> {
    pub fn is_monotone(&self) -> bool {
        self.history.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Lloyd iteration from `init` until no point moves more than `tol`.
pub fn lloyd<T: OrderedScalar>(dm: &DiscreteMeasure<T>, init: &[T], max_iters: usize, tol: &T) -> Result<LloydRun<T>> {
    if *tol < T::zero() {
        return Err(Error::NonPositiveTolerance);
    }
    let pm = dm.moments();
    let mut points = init.to_vec();
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < max_iters {
        let runs = assign(dm, &points)?;
        if let Some(i) = runs.iter().position(Range::is_empty) {
            return Err(Error::EmptyCell(i));
        }
        history.push(sum_costs(&pm, &runs, &points));
        let next: Vec<T> = runs.iter().map(|r| pm.run_mean(r.clone())).collect();
        let movement = points.iter().zip(&next).map(|(a, b)| abs(a.clone() - b.clone())).fold(T::zero(), |acc, d| {
            if d > acc {
                d
            } else {
                acc
            }
        });
        points = next;
        iterations += 1;
        if movement <= *tol {
            break;
        }
    }
    let distortion = discrete_distortion(dm, &points)?;
    history.push(distortion.clone());
    Ok(LloydRun { points, distortion, iterations, history })
}

fn abs<T: OrderedScalar>(x: T) -> T {
    if x < T::zero() {
        -x
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::alpha;
    use crate::scalar::{ratio, ParamScalar};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exact(depth: usize) -> DiscreteMeasure<ParamScalar> {
        discretize(&CantorMeasure::new(ratio(4, 9)).unwrap(), depth).unwrap()
    }

    #[test]
    fn discretization_examples() {
        let d1 = exact(1);
        assert_eq!(d1.positions(), &[ratio(2, 9), ratio(7, 9)]);
        assert_eq!(d1.atom_mass(), &ratio(1, 2));
        let d2 = exact(2);
        assert_eq!(d2.positions(), &[ratio(8, 81), ratio(28, 81), ratio(53, 81), ratio(73, 81)]);
        assert_eq!(d2.atom_mass(), &ratio(1, 4));
        for depth in 1..=8 {
            assert_eq!(exact(depth).mean(), ratio(1, 2));
        }
        let m = CantorMeasure::new(ratio(4, 9)).unwrap();
        assert_eq!(discretize(&m, 0), Err(Error::DepthOutOfRange(0)));
        assert_eq!(discretize(&m, 21), Err(Error::DepthOutOfRange(21)));
    }

    #[test]
    fn discrete_variance_lost_inside_cylinders() {
        // V - V_k = r^{2k} V: the atoms drop only the within-cylinder spread
        for depth in 1..=6 {
            let v = exact(depth).variance();
            assert_eq!(v, ratio(5, 52) * (ratio(1, 1) - ratio(16, 81).powi(depth)));
        }
    }

    #[test]
    fn dp_edge_cases() {
        let d = exact(3);
        let all = dp_optimal(&d, 8).unwrap();
        assert_eq!(all.distortion, ratio(0, 1));
        assert_eq!(all.points, d.positions());
        let one = dp_optimal(&d, 1).unwrap();
        assert_eq!(one.points, vec![ratio(1, 2)]);
        assert_eq!(one.distortion, d.variance());
        assert_eq!(dp_optimal(&d, 9), Err(Error::TooManyCodepoints { n: 9, atoms: 8 }));
        assert_eq!(dp_optimal(&d, 0), Err(Error::BadCount { n: 0, min: 1 }));
    }

    #[test]
    fn divide_and_conquer_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let k = rng.gen_range(1..499);
            let depth = rng.gen_range(1..=5);
            let d = discretize(&CantorMeasure::new(ratio(k, 1000)).unwrap(), depth).unwrap();
            let n = rng.gen_range(1..=d.len().min(6));
            assert_eq!(dp_optimal(&d, n).unwrap(), dp_optimal_naive(&d, n).unwrap());
        }
    }

    #[test]
    fn two_point_optimum() {
        let d = exact(8);
        let q = dp_optimal(&d, 2).unwrap();
        assert_eq!(q.points, vec![ratio(2, 9), ratio(7, 9)]);
        assert_eq!(q.runs, vec![0..128, 128..256]);
    }

    #[test]
    fn lloyd_fixed_point_and_convergence() {
        let m = CantorMeasure::new(ratio(4, 9)).unwrap();
        let a3 = alpha(&m, 3, vec![Word::empty()], vec![0]).unwrap();
        let d = exact(6);
        let run = lloyd(&d, &a3.points, 10, &ratio(0, 1)).unwrap();
        assert_eq!(run.iterations, 1);
        assert_eq!(run.points, a3.points);

        let run = lloyd(&exact(10), &[ratio(1, 10), ratio(9, 10)], 100, &ratio(0, 1)).unwrap();
        assert_eq!(run.points, vec![ratio(2, 9), ratio(7, 9)]);
        assert!(run.is_monotone());
    }

    #[test]
    fn lloyd_errors() {
        let d = exact(3);
        assert_eq!(lloyd(&d, &[ratio(-5, 1), ratio(1, 2)], 5, &ratio(0, 1)), Err(Error::EmptyCell(0)));
        assert_eq!(lloyd(&d, &[ratio(1, 2), ratio(1, 3)], 5, &ratio(0, 1)), Err(Error::UnsortedCodebook(1)));
        assert_eq!(lloyd(&d, &[ratio(1, 2)], 5, &ratio(-1, 1)), Err(Error::NonPositiveTolerance));
    }

    #[test]
    fn float_mode_agrees() {
        let df = discretize(&CantorMeasure::new(4.0f64 / 9.0).unwrap(), 8).unwrap();
        let q = dp_optimal(&df, 3).unwrap();
        let exact_q = dp_optimal(&exact(8), 3).unwrap();
        // the two mirror-image optima tie, so only the value is compared
        let expected: f64 =
            exact_q.distortion.to_string().split('/').map(|x| x.parse::<f64>().unwrap()).reduce(|a, b| a / b).unwrap();
        assert!((q.distortion - expected).abs() < 1e-12);
        let run = lloyd(&df, &[0.1, 0.5, 0.9], 200, &1e-12).unwrap();
        assert!(run.history.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }
}
