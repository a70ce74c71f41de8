//! Voronoi partitions on the line, exact cell resolution against the Cantor
//! construction, certified distortion and CVT verification.
//!
//! A Voronoi cell of a sorted codebook is the closed interval between two
//! consecutive midpoints. A cylinder `J_w` whose interval fits inside one cell
//! is integrated in closed form; a cylinder that straddles a boundary is split
//! into its two children. When every boundary falls into a construction gap
//! the descent terminates and the distortion is exact. Otherwise the cylinders
//! still straddling at `max_depth` only contribute an enclosure.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::measure::CantorMeasure;
use crate::scalar::{fraction_string, serde_fraction, ParamScalar, Scalar};
use crate::word::{AffineMap, Word};
use crate::ParamRational;

pub const DEFAULT_MAX_DEPTH: usize = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct VoronoiPartition {
    pub points: Vec<ParamScalar>,
    /// `b_i = (a_i + a_{i+1}) / 2`.
    pub boundaries: Vec<ParamScalar>,
}

impl VoronoiPartition {
    /// Index of the closed cell containing `x`; ties go to the left cell.
    pub fn cell_of(&self, x: &ParamScalar) -> usize {
        self.boundaries.partition_point(|b| b < x)
    }
}

pub fn partition(points: &[ParamScalar]) -> Result<VoronoiPartition> {
    if points.is_empty() {
        return Err(Error::BadCount { n: 0, min: 1 });
    }
    if let Some(i) = points.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedCodebook(i + 1));
    }
    let two = ParamScalar::from_integer(2.into());
    let boundaries = points.windows(2).map(|w| (&w[0] + &w[1]) / &two).collect();
    Ok(VoronoiPartition { points: points.to_vec(), boundaries })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnresolvedCylinder {
    pub word: Word,
    /// Cells whose generators may be nearest to some point of the cylinder.
    pub first_cell: usize,
    pub last_cell: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResolution {
    /// Cylinders assigned to each cell, in left-to-right order.
    pub cells: Vec<Vec<Word>>,
    pub unresolved: Vec<UnresolvedCylinder>,
    /// Length of the longest assigned or unresolved word.
    pub depth: usize,
    /// `S_w` for each assigned word, kept so nothing is recomposed.
    maps: Vec<Vec<AffineMap<ParamScalar>>>,
}

impl CellResolution {
    pub fn is_complete(&self) -> bool {
        self.unresolved.is_empty()
    }

    /// `(P(cell), ∫_cell x dP)` for every cell.
    fn cell_moments(&self) -> Vec<(ParamScalar, ParamScalar)> {
        let half = ParamScalar::half();
        self.cells
            .iter()
            .zip(&self.maps)
            .map(|(words, maps)| {
                words.iter().zip(maps).fold((ParamScalar::zero(), ParamScalar::zero()), |(mass, first), (w, map)| {
                    let p = weight(w.len());
                    let centre = map.apply(&half);
                    (mass + &p, first + p * centre)
                })
            })
            .collect()
    }

    fn assigned_distortion(&self, points: &[ParamScalar], variance: &ParamScalar) -> ParamScalar {
        let half = ParamScalar::half();
        let mut total = ParamScalar::zero();
        for ((words, maps), a) in self.cells.iter().zip(&self.maps).zip(points) {
            for (w, map) in words.iter().zip(maps) {
                let offset = map.apply(&half) - a;
                total += weight(w.len()) * (&map.scale * &map.scale * variance + &offset * &offset);
            }
        }
        total
    }
}

fn weight(len: usize) -> ParamScalar {
    ParamScalar::new(1.into(), num_traits::pow(num_bigint::BigInt::from(2), len))
}

/// Descends the cylinder tree until every cylinder lies in a single closed cell.
pub fn resolve_cells(
    part: &VoronoiPartition,
    measure: &CantorMeasure<ParamScalar>,
    max_depth: usize,
) -> CellResolution {
    let mut out = CellResolution {
        cells: vec![Vec::new(); part.points.len()],
        unresolved: Vec::new(),
        depth: 0,
        maps: vec![Vec::new(); part.points.len()],
    };
    let r = measure.ratio();
    let generators = [
        AffineMap { scale: r.clone(), translate: ParamScalar::zero() },
        AffineMap { scale: r.clone(), translate: ParamScalar::one() - r },
    ];
    let resolver = Resolver { part, generators, max_depth };
    let all = (0, part.points.len() - 1);
    resolver.descend(Word::empty(), AffineMap::identity(), all, &mut out);
    out
}

struct Resolver<'a> {
    part: &'a VoronoiPartition,
    generators: [AffineMap<ParamScalar>; 2],
    max_depth: usize,
}

impl Resolver<'_> {
    /// Cell of `x` among cells `lo..=hi`, which are known to contain it.
    fn cell_in(&self, x: &ParamScalar, lo: usize, hi: usize) -> usize {
        lo + self.part.boundaries[lo..hi].partition_point(|b| b < x)
    }

    fn descend(&self, word: Word, map: AffineMap<ParamScalar>, (lo, hi): (usize, usize), out: &mut CellResolution) {
        let left = &map.translate;
        let right = &map.scale + &map.translate;
        let last = self.cell_in(&right, lo, hi);
        if last == lo || self.part.boundaries[last - 1] <= *left {
            out.depth = out.depth.max(word.len());
            out.cells[last].push(word);
            out.maps[last].push(map);
            return;
        }
        let first = self.cell_in(left, lo, last);
        if word.len() >= self.max_depth {
            out.depth = out.depth.max(word.len());
            out.unresolved.push(UnresolvedCylinder { word, first_cell: first, last_cell: last });
            return;
        }
        for (symbol, generator) in [1u8, 2].into_iter().zip(&self.generators) {
            let child = map.then_inner(generator);
            self.descend(word.child(symbol), child, (first, last), out);
        }
    }
}

/// Closed interval certified to contain the distortion `V(P; γ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistortionBound {
    #[serde(serialize_with = "serde_fraction::one")]
    pub lo: ParamScalar,
    #[serde(serialize_with = "serde_fraction::one")]
    pub hi: ParamScalar,
    pub exact: bool,
}

impl DistortionBound {
    pub fn exact_value(&self) -> Option<&ParamScalar> {
        self.exact.then_some(&self.lo)
    }

    pub fn contains(&self, x: &ParamScalar) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn width(&self) -> ParamScalar {
        &self.hi - &self.lo
    }

    /// Certified comparison; `None` when the enclosures overlap.
    pub fn compare(&self, other: &DistortionBound) -> Option<Ordering> {
        if self.exact && other.exact {
            return Some(self.lo.cmp(&other.lo));
        }
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if other.hi < self.lo {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}

/// `Σ_i Σ_{w ∈ cell_i} ∫_{J_w} (x - a_i)^2 dP` in closed form.
pub fn cells_distortion<T: Scalar>(measure: &CantorMeasure<T>, points: &[T], cells: &[Vec<Word>]) -> T {
    points
        .iter()
        .zip(cells)
        .flat_map(|(a, cell)| cell.iter().map(move |w| measure.cylinder_integral(w, a)))
        .fold(T::zero(), |acc, x| acc + x)
}

/// Distortion of an arbitrary sorted codebook at a concrete ratio.
pub fn distortion(
    points: &[ParamScalar],
    measure: &CantorMeasure<ParamScalar>,
    max_depth: usize,
) -> Result<DistortionBound> {
    let part = partition(points)?;
    let res = resolve_cells(&part, measure, max_depth);
    Ok(bound_from_resolution(&part, measure, &res))
}

pub fn codebook_distortion(
    cb: &Codebook<ParamScalar>,
    measure: &CantorMeasure<ParamScalar>,
    max_depth: usize,
) -> Result<DistortionBound> {
    distortion(&cb.points, measure, max_depth)
}

fn bound_from_resolution(
    part: &VoronoiPartition,
    measure: &CantorMeasure<ParamScalar>,
    res: &CellResolution,
) -> DistortionBound {
    let exact_part = res.assigned_distortion(&part.points, &measure.variance());
    let mut lo = exact_part.clone();
    let mut hi = exact_part;
    for cyl in &res.unresolved {
        let map = measure.map(&cyl.word);
        let left = map.translate.clone();
        let right = &map.scale + &map.translate;
        let candidates = &part.points[cyl.first_cell..=cyl.last_cell];
        let nearest = candidates
            .iter()
            .map(|a| {
                if &left <= a && a <= &right {
                    ParamScalar::zero()
                } else {
                    (a - &left).abs().min((a - &right).abs())
                }
            })
            .min()
            .expect("at least one candidate");
        let (p, _) = crate::word::weight_and_scale(&cyl.word, measure.ratio());
        lo += p * &nearest * &nearest;
        hi += candidates.iter().map(|a| measure.cylinder_integral(&cyl.word, a)).min().expect("at least one candidate");
    }
    DistortionBound { lo, hi, exact: res.is_complete() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CvtStatus {
    Valid,
    Invalid,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvtCertificate {
    pub status: CvtStatus,
    /// For each boundary, the word whose construction gap contains it.
    pub gap_witnesses: Vec<Option<Word>>,
    /// `a_i - E(X | X ∈ cell_i)`, when the cell is resolved and non-empty.
    #[serde(serialize_with = "serde_fraction::vec_option")]
    pub residuals: Vec<Option<ParamScalar>>,
    #[serde(serialize_with = "serde_fraction::vec")]
    pub boundaries: Vec<ParamScalar>,
    pub cells: Vec<Vec<Word>>,
    pub depth: usize,
    pub distortion: Option<DistortionBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Word `w` with `S_w1(1) <= b <= S_w2(0)`, searched up to `max_depth`.
pub fn gap_witness(b: &ParamScalar, measure: &CantorMeasure<ParamScalar>, max_depth: usize) -> Option<Word> {
    let r = measure.ratio();
    let one = ParamScalar::from_integer(1.into());
    if b < &ParamScalar::zero() || b > &one {
        return None;
    }
    let mut word = Word::empty();
    let mut map = AffineMap::<ParamScalar>::identity();
    while word.len() < max_depth {
        let left_end = map.apply(r);
        let right_start = map.apply(&(&one - r));
        if &left_end <= b && b <= &right_start {
            return Some(word);
        }
        let (symbol, translate) = if b < &left_end { (1, ParamScalar::zero()) } else { (2, &one - r) };
        map = map.then_inner(&AffineMap { scale: r.clone(), translate });
        word = word.child(symbol);
    }
    None
}

fn common_prefix(a: &Word, b: &Word) -> Word {
    let k = a.symbols().iter().zip(b.symbols()).take_while(|(x, y)| x == y).count();
    Word::new(a.symbols()[..k].to_vec()).expect("prefix of a valid word")
}

/// Checks the boundary-in-gap and centroid conditions exactly.
pub fn verify_cvt(points: &[ParamScalar], measure: &CantorMeasure<ParamScalar>, max_depth: usize) -> CvtCertificate {
    let part = match partition(points) {
        Ok(p) => p,
        Err(e) => {
            return CvtCertificate {
                status: CvtStatus::Invalid,
                gap_witnesses: Vec::new(),
                residuals: Vec::new(),
                boundaries: Vec::new(),
                cells: Vec::new(),
                depth: 0,
                distortion: None,
                reason: Some(e.to_string()),
            }
        }
    };
    let res = resolve_cells(&part, measure, max_depth);
    let gap_witnesses = part
        .boundaries
        .iter()
        .enumerate()
        .map(|(i, b)| match (res.cells[i].last(), res.cells[i + 1].first()) {
            // adjacent resolved cylinders split at the gap of their common prefix
            (Some(l), Some(r)) if res.is_complete() => Some(common_prefix(l, r)),
            _ => gap_witness(b, measure, max_depth),
        })
        .collect();
    let distortion = Some(bound_from_resolution(&part, measure, &res));
    let mut cert = CvtCertificate {
        status: CvtStatus::Undecided,
        gap_witnesses,
        residuals: vec![None; points.len()],
        boundaries: part.boundaries.clone(),
        cells: res.cells.clone(),
        depth: res.depth,
        distortion,
        reason: None,
    };
    if !res.is_complete() {
        cert.reason =
            Some(format!("{} cylinder(s) still straddle a boundary at depth {max_depth}", res.unresolved.len()));
        return cert;
    }
    let mut empty = None;
    for (i, (a, (mass, first))) in points.iter().zip(res.cell_moments()).enumerate() {
        if mass.is_zero() {
            empty.get_or_insert(i);
            continue;
        }
        cert.residuals[i] = Some(a - first / mass);
    }
    if let Some(i) = empty {
        cert.status = CvtStatus::Invalid;
        cert.reason = Some(format!("cell {i} has zero mass"));
    } else if let Some(i) = cert.residuals.iter().position(|r| !r.as_ref().is_some_and(Zero::is_zero)) {
        cert.status = CvtStatus::Invalid;
        cert.reason = Some(format!(
            "generator {i} differs from its cell centroid by {}",
            fraction_string(cert.residuals[i].as_ref().expect("set above"))
        ));
    } else {
        cert.status = CvtStatus::Valid;
    }
    cert
}

/// One Lloyd update on the exact measure: every generator moves to its cell centroid.
pub fn lloyd_step(
    points: &[ParamScalar],
    measure: &CantorMeasure<ParamScalar>,
    max_depth: usize,
) -> Result<Vec<ParamScalar>> {
    let part = partition(points)?;
    let res = resolve_cells(&part, measure, max_depth);
    if !res.is_complete() {
        return Err(Error::Unresolved(max_depth));
    }
    res.cell_moments()
        .into_iter()
        .enumerate()
        .map(|(i, (mass, first))| if mass.is_zero() { Err(Error::EmptyCell(i)) } else { Ok(first / mass) })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GateSide {
    /// `S_{left}(1) <= b`.
    Lower,
    /// `b <= S_{right}(0)`.
    Upper,
}

/// One boundary-in-gap inequality `difference(r) >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gate {
    pub boundary: usize,
    pub side: GateSide,
    /// Rightmost cylinder of the left cell, or leftmost of the right cell.
    pub word: Word,
    pub difference: ParamRational,
}

impl Gate {
    pub fn describe(&self) -> String {
        let b = format!("(a_{} + a_{})/2", self.boundary, self.boundary + 1);
        match self.side {
            GateSide::Lower => format!("S_{}(1) <= {b}", self.word),
            GateSide::Upper => format!("{b} <= S_{}(0)", self.word),
        }
    }
}

/// Boundary-in-gap inequalities of a formal family codebook, two per boundary.
pub fn gate_inequalities(cb: &Codebook<ParamRational>) -> Result<Vec<Gate>> {
    let cells = cb
        .cells
        .as_ref()
        .ok_or_else(|| Error::UnsupportedFamily("custom codebook has no construction cells".into()))?;
    let measure = CantorMeasure::new(ParamRational::r())?;
    let half = ParamRational::half();
    let mut gates = Vec::with_capacity(2 * cells.len());
    for i in 0..cells.len().saturating_sub(1) {
        let b = &(&cb.points[i] + &cb.points[i + 1]) * &half;
        let left = cells[i].iter().max().expect("non-empty cell");
        let right = cells[i + 1].iter().min().expect("non-empty cell");
        let left_end = measure.map(left).apply(&ParamRational::one_value());
        let right_start = measure.map(right).translate;
        gates.push(Gate { boundary: i, side: GateSide::Lower, word: left.clone(), difference: &b - &left_end });
        gates.push(Gate { boundary: i, side: GateSide::Upper, word: right.clone(), difference: &right_start - &b });
    }
    Ok(gates)
}

/// Distortion of a formal codebook as a rational function of `r`.
///
/// The cell resolution is computed at both ends and the middle of `window`;
/// it must be complete and identical at all three points, and the shared
/// cylinder assignment is then integrated symbolically.
pub fn formal_distortion(
    cb: &Codebook<ParamRational>,
    window: (&ParamScalar, &ParamScalar),
    max_depth: usize,
) -> Result<ParamRational> {
    let (lo, hi) = window;
    let mid = (lo + hi) / ParamScalar::from_integer(2.into());
    let mut assignment: Option<Vec<Vec<Word>>> = None;
    for r in [lo, &mid, hi] {
        let measure = CantorMeasure::new(r.clone())?;
        let concrete = cb.evaluate(r)?;
        let part = partition(&concrete.points)?;
        let res = resolve_cells(&part, &measure, max_depth);
        if !res.is_complete() {
            return Err(Error::UnstableResolution(format!("unresolved at r = {}", fraction_string(r))));
        }
        if let Some(i) = res.cells.iter().position(Vec::is_empty) {
            return Err(Error::UnstableResolution(format!("cell {i} is empty at r = {}", fraction_string(r))));
        }
        match &assignment {
            None => assignment = Some(res.cells),
            Some(prev) if *prev != res.cells => {
                return Err(Error::UnstableResolution(format!(
                    "cells change between the window samples (at r = {})",
                    fraction_string(r)
                )))
            }
            Some(_) => {}
        }
    }
    let measure = CantorMeasure::new(ParamRational::r())?;
    Ok(cells_distortion(&measure, &cb.points, &assignment.expect("three samples")))
}

impl ParamRational {
    fn one_value() -> ParamRational {
        <ParamRational as num_traits::One>::one()
    }
}
