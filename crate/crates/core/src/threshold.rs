//! Critical ratios: where a family's boundary-in-gap inequalities stop holding
//! and where two families' distortions cross.
//!
//! Every threshold is the root of an explicit rational function of `r`,
//! isolated by exact bisection. The bracket for each known constant is fixed;
//! if the defining function does not change sign inside it, the solver scans
//! the whole range and reports every sign change instead of guessing.

use std::cmp::Ordering;

use serde::Serialize;

use crate::codebook::{Codebook, Construction, Family};
use crate::cvt::{cells_distortion, gate_inequalities, Gate};
use crate::error::{Error, Result};
use crate::measure::CantorMeasure;
use crate::rational_fn::{bisect, RootBracket};
use crate::scalar::{fixed_decimal, fraction_string, parse_scalar, ratio, ParamScalar};
use crate::ParamRational;

/// Default bisection tolerance, `10^-12`.
pub fn default_tolerance() -> ParamScalar {
    ratio(1, 1_000_000_000_000)
}

/// What a threshold separates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdKind {
    /// Smallest ratio at which every gate of the family holds.
    GateLower { family: Family },
    /// Largest ratio at which every gate of the family holds.
    GateUpper { family: Family },
    /// Ratio where the two construction distortions are equal.
    Crossover { first: Family, second: Family },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Threshold {
    pub name: &'static str,
    pub kind: ThresholdKind,
    pub defining_function: ParamRational,
    #[serde(serialize_with = "crate::scalar::serde_fraction::vec")]
    pub bracket: [ParamScalar; 2],
    #[serde(serialize_with = "crate::scalar::serde_fraction::one")]
    pub value: ParamScalar,
    /// `value` rounded to ten decimals.
    pub decimals: String,
    /// The constant this threshold is expected to reproduce.
    pub expected: &'static str,
    /// For gate thresholds, the inequality that binds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binding_gate: Option<String>,
}

impl Threshold {
    pub fn matches_expected(&self) -> bool {
        self.decimals == self.expected
    }
}

/// The seven known constants with the function each one is a root of.
pub const KNOWN: [(&str, &str, ThresholdKind); 7] = [
    ("alpha3_gate_lower", "0.4364590141", ThresholdKind::GateLower { family: Family::Alpha }),
    ("alpha3_gate_upper", "0.4512271429", ThresholdKind::GateUpper { family: Family::Alpha }),
    ("beta3_gate_upper", "0.4384471872", ThresholdKind::GateUpper { family: Family::Beta }),
    ("alpha3_beta3_crossover", "0.4371985206", ThresholdKind::Crossover { first: Family::Alpha, second: Family::Beta }),
    ("delta3_gate_lower", "0.4332840530", ThresholdKind::GateLower { family: Family::Delta }),
    ("delta3_gate_upper", "0.4486234903", ThresholdKind::GateUpper { family: Family::Delta }),
    (
        "delta3_alpha3_crossover",
        "0.4307442489",
        ThresholdKind::Crossover { first: Family::Delta, second: Family::Alpha },
    ),
];

fn formal_family(family: Family, n: usize) -> Result<Codebook<ParamRational>> {
    let measure = CantorMeasure::new(ParamRational::r())?;
    Construction::canonical(family, n)?.build(&measure)
}

/// Boundary-in-gap inequalities of the canonical `n`-point codebook of a family.
pub fn family_gates(family: Family, n: usize) -> Result<Vec<Gate>> {
    gate_inequalities(&formal_family(family, n)?)
}

/// Distortion of the canonical construction over its own cells, as a function of `r`.
///
/// This is the family's distortion formula; it coincides with the true
/// distortion only where the construction is a CVT.
pub fn construction_distortion(family: Family, n: usize) -> Result<ParamRational> {
    let cb = formal_family(family, n)?;
    let measure = CantorMeasure::new(ParamRational::r())?;
    let cells = cb.cells.as_ref().expect("family codebooks carry cells");
    Ok(cells_distortion(&measure, &cb.points, cells))
}

/// Every sign change of `f` on a uniform grid over `(lo, hi)`.
pub fn scan_sign_changes(
    f: &ParamRational,
    lo: &ParamScalar,
    hi: &ParamScalar,
    step: &ParamScalar,
) -> Vec<(ParamScalar, ParamScalar)> {
    let mut out = Vec::new();
    let mut a = lo + step;
    let mut prev = f.sign_at(&a).ok();
    while &a + step < *hi {
        let b = &a + step;
        let s = f.sign_at(&b).ok();
        if let (Some(x), Some(y)) = (prev, s) {
            if x != y && x != Ordering::Equal {
                out.push((a.clone(), b.clone()));
            }
        }
        prev = s;
        a = b;
    }
    out
}

/// Direction in which a gate difference must cross zero to bound the window.
fn crosses_upward(f: &ParamRational, bracket: &RootBracket) -> Result<bool> {
    if bracket.exact.is_some() {
        let eps = ratio(1, 1_000_000_000_000_000);
        let x = bracket.value();
        return Ok(f.sign_at(&(&x + &eps))? == Ordering::Greater);
    }
    Ok(f.sign_at(&bracket.hi)? == Ordering::Greater)
}

fn mismatch(name: &str, functions: &[&ParamRational]) -> Error {
    let zero = ParamScalar::from_integer(0.into());
    let half = ratio(1, 2);
    let step = ratio(1, 1000);
    let found: Vec<String> = functions
        .iter()
        .flat_map(|f| scan_sign_changes(f, &zero, &half, &step))
        .map(|(a, b)| format!("[{}, {}]", fixed_decimal(&a, 3), fixed_decimal(&b, 3)))
        .collect();
    Error::ThresholdMismatch { name: name.to_string(), found: found.join(", ") }
}

/// Solves one threshold inside `bracket`.
pub fn solve(
    name: &'static str,
    expected: &'static str,
    kind: ThresholdKind,
    bracket: [ParamScalar; 2],
    tol: &ParamScalar,
) -> Result<Threshold> {
    let [lo, hi] = &bracket;
    let (defining_function, value, binding_gate) = match kind {
        ThresholdKind::Crossover { first, second } => {
            let f = &construction_distortion(first, 3)? - &construction_distortion(second, 3)?;
            let root = match bisect(&f, lo, hi, tol) {
                Ok(b) => b.value(),
                Err(Error::NoSignChange { .. }) => return Err(mismatch(name, &[&f])),
                Err(e) => return Err(e),
            };
            (f, root, None)
        }
        ThresholdKind::GateLower { family } | ThresholdKind::GateUpper { family } => {
            let lower = matches!(kind, ThresholdKind::GateLower { .. });
            let gates = family_gates(family, 3)?;
            let mut best: Option<(ParamScalar, &Gate)> = None;
            for gate in &gates {
                let bracket = match bisect(&gate.difference, lo, hi, tol) {
                    Ok(b) => b,
                    Err(Error::NoSignChange { .. }) => continue,
                    Err(e) => return Err(e),
                };
                // a lower end needs the gate to turn non-negative as r grows
                if crosses_upward(&gate.difference, &bracket)? != lower {
                    continue;
                }
                let root = bracket.value();
                let tighter = best.as_ref().is_none_or(|(b, _)| if lower { root > *b } else { root < *b });
                if tighter {
                    best = Some((root, gate));
                }
            }
            let Some((root, gate)) = best else {
                let fs: Vec<&ParamRational> = gates.iter().map(|g| &g.difference).collect();
                return Err(mismatch(name, &fs));
            };
            (gate.difference.clone(), root, Some(gate.describe()))
        }
    };
    let decimals = fixed_decimal(&value, 10);
    Ok(Threshold { name, kind, defining_function, bracket, value, decimals, expected, binding_gate })
}

/// Solves all seven known thresholds; each bracket is the expected value `± 10^-3`.
pub fn solve_all(tol: &ParamScalar) -> Result<Vec<Threshold>> {
    let widen = ratio(1, 1000);
    KNOWN
        .iter()
        .map(|&(name, expected, kind)| {
            let centre = parse_scalar(expected)?;
            let bracket = [&centre - &widen, &centre + &widen];
            let t = solve(name, expected, kind, bracket, tol)?;
            if !t.matches_expected() {
                return Err(Error::ThresholdMismatch { name: name.to_string(), found: t.decimals });
            }
            Ok(t)
        })
        .collect()
}

/// One end of a validity window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowEnd {
    #[serde(serialize_with = "crate::scalar::serde_fraction::one")]
    pub value: ParamScalar,
    pub gate: String,
}

/// Maximal interval around a reference ratio on which every gate holds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidityWindow {
    /// `None` means the gates hold all the way down to 0.
    pub lower: Option<WindowEnd>,
    /// `None` means the gates hold all the way up to 1/2.
    pub upper: Option<WindowEnd>,
}

/// Roots of `f` in `(0, 1/2)` at which `f` changes sign, each to within `tol`.
pub fn sign_change_roots(f: &ParamRational, tol: &ParamScalar) -> Result<Vec<ParamScalar>> {
    let zero = ParamScalar::from_integer(0.into());
    let half = ratio(1, 2);
    if f.den().count_roots(&zero, &half) > 0 {
        return Err(Error::PoleInInterval { lo: "0".into(), hi: "1/2".into() });
    }
    let num = f.num();
    if num.is_constant() {
        return Ok(Vec::new());
    }
    let square_free = num.div_exact(&num.gcd(&num.derivative())).expect("gcd divides");
    // isolate: split until each piece holds at most one distinct root
    let mut pending = vec![(zero, half.clone())];
    let mut isolated = Vec::new();
    while let Some((a, b)) = pending.pop() {
        match square_free.count_roots(&a, &b) {
            0 => {}
            1 => isolated.push((a, b)),
            _ => {
                let m = (&a + &b) / ParamScalar::from_integer(2.into());
                pending.push((m.clone(), b));
                pending.push((a, m));
            }
        }
    }
    let sf = ParamRational::from_poly(square_free);
    let mut roots = Vec::new();
    for (a, b) in isolated {
        if b == half && sf.sign_at(&b)? == Ordering::Equal {
            continue;
        }
        let bracket = if sf.sign_at(&b)? == Ordering::Equal {
            RootBracket { lo: b.clone(), hi: b.clone(), exact: Some(b) }
        } else {
            bisect(&sf, &a, &b, tol)?
        };
        let eps = tol.clone();
        let left = f.sign_at(&(&bracket.lo - &eps))?;
        let right = f.sign_at(&(&bracket.hi + &eps))?;
        if left != right {
            roots.push(bracket.value());
        }
    }
    roots.sort();
    Ok(roots)
}

/// Validity window of the gates around `reference`, which must satisfy them all.
pub fn validity_window(gates: &[Gate], reference: &ParamScalar, tol: &ParamScalar) -> Result<ValidityWindow> {
    let mut window = ValidityWindow { lower: None, upper: None };
    for gate in gates {
        if gate.difference.sign_at(reference)? == Ordering::Less {
            return Err(Error::ThresholdMismatch {
                name: gate.describe(),
                found: format!("violated at reference r = {}", fraction_string(reference)),
            });
        }
        for root in sign_change_roots(&gate.difference, tol)? {
            let end = WindowEnd { value: root.clone(), gate: gate.describe() };
            if root < *reference {
                if window.lower.as_ref().is_none_or(|e| e.value < root) {
                    window.lower = Some(end);
                }
            } else if window.upper.as_ref().is_none_or(|e| root < e.value) {
                window.upper = Some(end);
            }
        }
    }
    Ok(window)
}

/// Validity window of a family's canonical three-point codebook.
pub fn family_window(family: Family, reference: &ParamScalar, tol: &ParamScalar) -> Result<ValidityWindow> {
    validity_window(&family_gates(family, 3)?, reference, tol)
}
