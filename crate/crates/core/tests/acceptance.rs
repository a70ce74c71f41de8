//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cantor_cvt::codebook::{alpha, beta, count_cvts, delta, enumerate};
use cantor_cvt::cvt::{distortion, formal_distortion, verify_cvt, CvtStatus, DistortionBound};
use cantor_cvt::oracle::{discretize, dp_optimal, lloyd};
use cantor_cvt::scalar::{fixed_decimal, parse_scalar, ratio};
use cantor_cvt::threshold::{default_tolerance, solve_all};
use cantor_cvt::{CantorMeasure, Family, IntPoly, ParamRational, ParamScalar, Scalar, Word};

const MOMENTS_BUDGET: Duration = Duration::from_millis(1);
const THRESHOLD_BUDGET: Duration = Duration::from_secs(5);
const ENUMERATION_BUDGET: Duration = Duration::from_secs(60);
const ORACLE_BUDGET: Duration = Duration::from_secs(300);

const MAX_DEPTH: usize = 40;
const ENUMERATION_MAX_N: usize = 32;
const ORDERING_SAMPLES: i64 = 10;
const ORACLE_DEPTH: usize = 12;
/// `10^-4` on the two-point optimum.
const ORACLE_POINT_TOL: (i64, i64) = (1, 10_000);
/// `10^-6` discretization slack.
const ORACLE_SLACK: (i64, i64) = (1, 1_000_000);
const LLOYD_INITS: usize = 100;
const LLOYD_DEPTH: usize = 8;
const SELF_SIMILAR_DEPTHS: std::ops::RangeInclusive<usize> = 1..=6;
const SEED: u64 = 0x5eed;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn w(s: &str) -> Word {
    s.parse().expect("static word")
}

fn words(list: &[&str]) -> Vec<Word> {
    list.iter().map(|s| w(s)).collect()
}

fn at(r: ParamScalar) -> CantorMeasure<ParamScalar> {
    CantorMeasure::new(r).expect("valid ratio")
}

fn formal() -> CantorMeasure<ParamRational> {
    CantorMeasure::new(ParamRational::r()).expect("formal ratio")
}

fn r_poly(coeffs: &[i64]) -> IntPoly {
    IntPoly::from_i64(coeffs)
}

fn moments() -> Outcome {
    let start = Instant::now();
    let m = at(ratio(4, 9));
    let (mean, second, var) = (m.mean(), m.second_moment(), m.variance());
    let elapsed = start.elapsed();
    check(mean == ratio(1, 2), || format!("mean = {mean}"))?;
    check(second == ratio(9, 26), || format!("E(X^2) = {second}"))?;
    check(var == ratio(5, 52), || format!("variance = {var}"))?;
    check(elapsed < MOMENTS_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("mean 1/2, E(X^2) 9/26, variance 5/52 in {elapsed:?}"))
}

fn variance_formula() -> Outcome {
    let v = formal().variance();
    let expected = ParamRational::new(r_poly(&[1, -1]), r_poly(&[4, 4])).map_err(|e| e.to_string())?;
    check(v.num() == expected.num() && v.den() == expected.den(), || format!("got {v}"))?;
    Ok(format!("variance = {v}"))
}

fn gate_constants() -> Outcome {
    let m = at(ratio(4, 9));
    let s = |word: &str, x: i64| m.map(&w(word)).apply(&ratio(x, 1));
    let a = |list: &[&str]| m.cond_expectation(&words(list)).expect("prefix free");
    let mid = |x: ParamScalar, y: ParamScalar| (x + y) / ratio(2, 1);
    let cases: Vec<(&str, ParamScalar, usize)> = vec![
        ("0.395671", s("1221", 1), 6),
        ("0.400854", mid(a(&["11", "121", "1221"]), a(&["1222", "21"])), 6),
        ("0.405426", s("1222", 0), 6),
        ("0.753086", s("21", 1), 6),
        ("0.754839", mid(a(&["1222", "21"]), a(&["22"])), 6),
        ("0.802469", s("22", 0), 6),
        ("0.444444", s("122", 1), 6),
        ("0.527435", mid(a(&["122"]), a(&["21"])), 6),
        ("0.555556", s("21", 0), 6),
        ("0.521", mid(a(&["122"]), a(&["211", "2121", "21221"])), 3),
        ("0.500000", mid(a(&["122"]), a(&["211"])), 6),
    ];
    for (printed, value, places) in &cases {
        let got = fixed_decimal(value, *places);
        check(&got == printed, || format!("expected {printed}, got {got}"))?;
    }
    Ok(format!("{} constants reproduced", cases.len()))
}

fn closed_forms() -> Outcome {
    let f = formal();
    let a3 = alpha(&f, 3, vec![Word::empty()], vec![0]).map_err(|e| e.to_string())?;
    let va = formal_distortion(&a3, (&parse_scalar("0.437").unwrap(), &parse_scalar("0.451").unwrap()), MAX_DEPTH)
        .map_err(|e| e.to_string())?;
    let a_num = r_poly(&[28, -84, 88, 4, 49, -71, -22, 14, -3, -3]);
    let a_den = r_poly(&[560, 560]);
    check(va.num() == &a_num && va.den() == &a_den, || format!("alpha3: {va}"))?;

    let d3 = delta(&f, 3, vec![Word::empty()], vec![0]).map_err(|e| e.to_string())?;
    let vd = formal_distortion(&d3, (&parse_scalar("0.434").unwrap(), &parse_scalar("0.448").unwrap()), MAX_DEPTH)
        .map_err(|e| e.to_string())?;
    // leading minus folded into the numerator
    let d_num = -&r_poly(&[-220, 660, -568, -140, -48, 180, 21, 89, 18, -2, 5, 5]);
    let d_den = r_poly(&[3168, 3168]);
    check(vd.num() == &d_num && vd.den() == &d_den, || format!("delta3: {vd}"))?;
    Ok("alpha3 and delta3 distortions match coefficient for coefficient".into())
}

fn thresholds() -> Outcome {
    let start = Instant::now();
    let ts = solve_all(&default_tolerance()).map_err(|e| e.to_string())?;
    for t in &ts {
        check(t.matches_expected(), || format!("{}: {} vs {}", t.name, t.decimals, t.expected))?;
    }
    let beta = ts.iter().find(|t| t.name == "beta3_gate_upper").ok_or("missing beta gate")?;
    let quadratic = r_poly(&[2, -5, 1]);
    check(beta.defining_function.num().div_exact(&quadratic).is_some(), || {
        format!("r^2 - 5r + 2 does not divide {}", beta.defining_function.num())
    })?;
    let tol = default_tolerance();
    let q = |x: &ParamScalar| quadratic.eval(x);
    let lo = q(&(&beta.value - &tol));
    let hi = q(&(&beta.value + &tol));
    check(lo.is_positive() && hi.is_negative(), || "quadratic root not within tolerance".into())?;
    let elapsed = start.elapsed();
    check(elapsed < THRESHOLD_BUDGET, || format!("took {elapsed:?}"))?;
    let list: Vec<&str> = ts.iter().map(|t| t.decimals.as_str()).collect();
    Ok(format!("{} in {elapsed:?}", list.join(" ")))
}

/// Certified comparison of two true distortions: `Some(true)` iff `x < y`.
fn strictly_less(x: &DistortionBound, y: &DistortionBound) -> Option<bool> {
    x.compare(y).map(|o| o.is_lt())
}

fn true_distortion(points: &[ParamScalar], r: &ParamScalar) -> Result<DistortionBound, String> {
    distortion(points, &at(r.clone()), MAX_DEPTH).map_err(|e| e.to_string())
}

fn family_distortions(r: &ParamScalar) -> Result<[DistortionBound; 3], String> {
    let m = at(r.clone());
    let a3 = alpha(&m, 3, vec![Word::empty()], vec![0]).map_err(|e| e.to_string())?;
    let b3 = beta(&m, 3, vec![w("1")]).map_err(|e| e.to_string())?;
    let d3 = delta(&m, 3, vec![Word::empty()], vec![0]).map_err(|e| e.to_string())?;
    Ok([true_distortion(&a3.points, r)?, true_distortion(&b3.points, r)?, true_distortion(&d3.points, r)?])
}

#[derive(Clone, Copy)]
enum Ends {
    /// `[lo, hi]`
    Closed,
    /// `(lo, hi]`
    OpenLow,
    /// `(lo, hi)`
    Open,
}

/// `ORDERING_SAMPLES` equally spaced rationals in the interval.
fn samples(lo: &str, hi: &str, ends: Ends) -> Vec<ParamScalar> {
    let (lo, hi) = (parse_scalar(lo).unwrap(), parse_scalar(hi).unwrap());
    let k = ORDERING_SAMPLES;
    let (first, parts) = match ends {
        Ends::Closed => (0, k - 1),
        Ends::OpenLow => (1, k),
        Ends::Open => (1, k + 1),
    };
    (first..first + k).map(|i| &lo + (&hi - &lo) * ratio(i, parts)).collect()
}

fn orderings() -> Outcome {
    for r in samples("0.4371985206", "0.4384471872", Ends::OpenLow) {
        let [a, b, _] = family_distortions(&r)?;
        check(strictly_less(&a, &b) == Some(true), || {
            format!("V(alpha3) < V(beta3) fails at {}", fixed_decimal(&r, 12))
        })?;
    }
    for r in samples("0.40", "0.4371985206", Ends::Open) {
        let [a, b, _] = family_distortions(&r)?;
        check(strictly_less(&b, &a) == Some(true), || {
            format!("V(beta3) < V(alpha3) fails at {}", fixed_decimal(&r, 12))
        })?;
    }
    for r in samples("0.4364590141", "0.4486234903", Ends::Closed) {
        let [a, _, d] = family_distortions(&r)?;
        check(strictly_less(&d, &a) == Some(true), || {
            format!("V(delta3) < V(alpha3) fails at {}", fixed_decimal(&r, 12))
        })?;
    }
    Ok(format!("3 x {ORDERING_SAMPLES} exact comparisons hold"))
}

fn counts_and_enumeration() -> Outcome {
    let start = Instant::now();
    let expected = [(2, 1u32), (3, 2), (4, 1), (5, 4), (6, 4), (7, 4), (8, 1), (16, 1)];
    for (n, c) in expected {
        let got = count_cvts(n, Family::Alpha).map_err(|e| e.to_string())?;
        check(got == c.into(), || format!("count_cvts({n}) = {got}, expected {c}"))?;
    }
    let m = at(ratio(4, 9));
    let mut verified = 0usize;
    for n in 2..=ENUMERATION_MAX_N {
        let deltas = enumerate(n, Family::Delta, &m).map_err(|e| e.to_string())?;
        let deltas = deltas.collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
        let alphas = enumerate(n, Family::Alpha, &m).map_err(|e| e.to_string())?;
        let alphas = alphas.collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
        for (family, listed) in [(Family::Alpha, alphas.len()), (Family::Delta, deltas.len())] {
            let count = count_cvts(n, family).map_err(|e| e.to_string())?;
            check(count == listed.into(), || format!("{family} n={n}: {listed} listed, count {count}"))?;
        }
        for cb in alphas {
            let cert = verify_cvt(&cb.points, &m, MAX_DEPTH);
            check(cert.status == CvtStatus::Valid, || {
                format!("alpha n={n} {:?} is {:?}: {:?}", cb.construction, cert.status, cert.reason)
            })?;
            verified += 1;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < ENUMERATION_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{verified} alpha codebooks for n <= {ENUMERATION_MAX_N} verified in {elapsed:?}"))
}

fn power_of_two() -> Outcome {
    let f = formal();
    let window = (ratio(1, 100), ratio(49, 100));
    for k in 1..=5 {
        let cb = alpha(&f, 1 << k, vec![], vec![]).map_err(|e| e.to_string())?;
        let got = formal_distortion(&cb, (&window.0, &window.1), MAX_DEPTH).map_err(|e| e.to_string())?;
        let expected = ParamRational::r().powi(2 * k) * f.variance();
        check(got == expected, || format!("n = {}: {got}", 1 << k))?;
    }
    Ok("V(alpha(2^k)) = r^(2k) V for k = 1..5".into())
}

fn oracle_consistency() -> Outcome {
    let start = Instant::now();
    let r = ratio(4, 9);
    let m = at(r.clone());
    let dm = discretize(&m, ORACLE_DEPTH).map_err(|e| e.to_string())?;
    let point_tol = ratio(ORACLE_POINT_TOL.0, ORACLE_POINT_TOL.1);
    let slack = ratio(ORACLE_SLACK.0, ORACLE_SLACK.1);

    let two = dp_optimal(&dm, 2).map_err(|e| e.to_string())?;
    for (got, want) in two.points.iter().zip([ratio(2, 9), ratio(7, 9)]) {
        check((got - &want).abs() <= point_tol, || format!("two-point optimum has {got}"))?;
    }
    let discretization = r.powi(2 * ORACLE_DEPTH) * m.variance();
    let gap = (&two.distortion - ratio(20, 1053)).abs();
    check(gap <= &discretization + &slack, || format!("two-point distortion off by {}", fixed_decimal(&gap, 12)))?;

    let three = dp_optimal(&dm, 3).map_err(|e| e.to_string())?;
    let [a, b, d] = family_distortions(&r)?;
    let exact = |x: &DistortionBound, name: &str| x.exact_value().cloned().ok_or(format!("{name} not exact"));
    let (va, vb, vd) = (exact(&a, "alpha3")?, exact(&b, "beta3")?, exact(&d, "delta3")?);
    let chain = [("dp", &three.distortion), ("delta3", &vd), ("alpha3", &va), ("beta3", &vb)];
    for pair in chain.windows(2) {
        let (n0, v0) = pair[0];
        let (n1, v1) = pair[1];
        check(*v0 <= v1 + &slack, || {
            format!("{n0} = {} exceeds {n1} = {}", fixed_decimal(v0, 10), fixed_decimal(v1, 10))
        })?;
    }
    let elapsed = start.elapsed();
    check(elapsed < ORACLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "dp {} <= delta3 {} <= alpha3 {} <= beta3 {} in {elapsed:?}",
        fixed_decimal(&three.distortion, 8),
        fixed_decimal(&vd, 8),
        fixed_decimal(&va, 8),
        fixed_decimal(&vb, 8)
    ))
}

fn random_ratio(rng: &mut ChaCha8Rng) -> ParamScalar {
    ratio(rng.gen_range(1..500), 1000)
}

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<ParamScalar> {
    let mut xs: Vec<i64> = Vec::new();
    while xs.len() < n {
        let x = rng.gen_range(-100..1100);
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    xs.sort();
    xs.into_iter().map(|x| ratio(x, 1000)).collect()
}

/// A boundary pinned to a point of the Cantor set that no depth resolves.
fn straddling_points(rng: &mut ChaCha8Rng, r: &ParamScalar) -> Vec<ParamScalar> {
    let len = rng.gen_range(1..=3);
    let symbols: Vec<u8> = (0..len).map(|_| rng.gen_range(1..=2)).collect();
    let map = at(r.clone()).map(&Word::new(symbols).unwrap());
    let fixed = &map.translate / (ratio(1, 1) - &map.scale);
    let off = ratio(rng.gen_range(1..200), 1000);
    vec![&fixed - &off, &fixed + &off]
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    // reflection invariance, exact
    for _ in 0..50 {
        let r = random_ratio(&mut rng);
        let n = rng.gen_range(1..=6);
        let points = random_points(&mut rng, n);
        let mirrored: Vec<ParamScalar> = points.iter().rev().map(|p| ratio(1, 1) - p).collect();
        let d = true_distortion(&points, &r)?;
        let e = true_distortion(&mirrored, &r)?;
        check(d == e, || format!("reflection changes the distortion at r = {r}"))?;
    }

    // self-similarity for quadratic integrands, formal r
    let f = formal();
    let r = ParamRational::r();
    let integral = |scale: &ParamRational, shift: &ParamRational, c: &[ParamRational; 3]| {
        // ∫ c2 y^2 + c1 y + c0 dP with y = scale x + shift
        let ey = scale * &f.mean() + shift.clone();
        let ey2 = &(&(scale * scale) * &f.second_moment())
            + &(&(&(scale * shift) * &ParamRational::from_ratio(2, 1)) * &f.mean())
            + shift * shift;
        &(&(&c[2] * &ey2) + &(&c[1] * &ey)) + &c[0]
    };
    let coeffs =
        [ParamRational::from_ratio(3, 1), &r - &ParamRational::from_ratio(1, 2), ParamRational::from_ratio(-7, 5)];
    let one = ParamRational::from_ratio(1, 1);
    let whole = integral(&one, &ParamRational::zero(), &coeffs);
    for depth in SELF_SIMILAR_DEPTHS {
        let weight = ParamRational::from_ratio(1, 1 << depth);
        let total = Word::all_of_length(depth).iter().fold(ParamRational::zero(), |acc, word| {
            let map = f.map(word);
            &acc + &(&weight * &integral(&map.scale, &map.translate, &coeffs))
        });
        check(total == whole, || format!("self-similarity fails at depth {depth}"))?;
    }

    // Lloyd descent from random distinct atoms
    let dm = discretize(&at(ratio(4, 9)), LLOYD_DEPTH).map_err(|e| e.to_string())?;
    for run in 0..LLOYD_INITS {
        let n = rng.gen_range(2..=6);
        let mut idx: Vec<usize> = Vec::new();
        while idx.len() < n {
            let i = rng.gen_range(0..dm.len());
            if !idx.contains(&i) {
                idx.push(i);
            }
        }
        idx.sort();
        let init: Vec<ParamScalar> = idx.iter().map(|&i| dm.positions()[i].clone()).collect();
        let out = lloyd(&dm, &init, 200, &ParamScalar::zero()).map_err(|e| format!("Lloyd run {run}: {e}"))?;
        check(out.is_monotone(), || format!("Lloyd run {run} increased the distortion"))?;
    }

    // bounds shrink under refinement
    for _ in 0..30 {
        let r = random_ratio(&mut rng);
        let points = straddling_points(&mut rng, &r);
        let m = at(r.clone());
        let mut prev: Option<DistortionBound> = None;
        for depth in [2, 4, 8, 12] {
            let b = distortion(&points, &m, depth).map_err(|e| e.to_string())?;
            if let Some(p) = &prev {
                check(p.lo <= b.lo && b.hi <= p.hi, || format!("bound widened at depth {depth}, r = {r}"))?;
            }
            check(b.lo <= b.hi, || "inverted bound".into())?;
            prev = Some(b);
        }
    }
    Ok(format!("reflection, self-similarity (depths 1-6), {LLOYD_INITS} Lloyd runs, bound refinement"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("moments", moments),
        ("variance formula", variance_formula),
        ("gate constants", gate_constants),
        ("closed-form distortions", closed_forms),
        ("thresholds", thresholds),
        ("distortion orderings", orderings),
        ("counts and enumeration", counts_and_enumeration),
        ("power-of-two distortion", power_of_two),
        ("oracle consistency", oracle_consistency),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
