use std::fs;

use anyhow::{anyhow, bail, Context, Result};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::{json, Value};

use cantor_cvt::codebook::{constructions, count_cvts, enumerate};
use cantor_cvt::cvt::{codebook_distortion, distortion, formal_distortion, gate_inequalities, verify_cvt};
use cantor_cvt::oracle::{discretize, dp_optimal, lloyd};
use cantor_cvt::scalar::{fixed_decimal, fraction_string};
use cantor_cvt::threshold::{construction_distortion, sign_change_roots, solve_all};
use cantor_cvt::{
    CantorMeasure, Codebook, CodebookRecord, Construction, CvtStatus, DistortionBound, Family, ParamRational,
    ParamScalar, Word,
};

use crate::args::{Cli, CodebookSpec, Command, RatioArg, Sweep};
use crate::report::{bound_json, bound_text, csv, decimal, exact_json, exact_text, formal_json, table, Report};

pub fn run(cli: &Cli) -> Result<Report> {
    let depth = cli.depth as usize;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.parallel as usize).build()?;
    match &cli.command {
        Command::Moments { r } => Ok(moments(r)),
        Command::Codebook { spec, r } => codebook(spec, r),
        Command::Enumerate { family, n, r, verify } => {
            pool.install(|| enumerate_cmd(*family, *n, r.as_ref(), *verify, depth))
        }
        Command::Verify { spec, r } => verify(spec, r.as_ref(), depth, &cli.tol),
        Command::Distortion { spec, r, window } => distortion_cmd(spec, r.as_ref(), window.as_deref(), depth),
        Command::Compare { r, n, sweep } => match (r, sweep) {
            (_, Some(sweep)) => pool.install(|| compare_sweep(sweep, depth)),
            (Some(RatioArg::Value(r)), None) => compare(r, *n, depth),
            (Some(RatioArg::Formal), None) => bail!("--r formal is not supported by compare; use --sweep"),
            (None, None) => bail!("compare needs --r or --sweep"),
        },
        Command::Thresholds => thresholds(&cli.tol),
        Command::Oracle { r, level, n, init, max_iters, float } => {
            let RatioArg::Value(r) = r else { bail!("--r formal is not supported by oracle") };
            oracle(r, *level, *n, init.as_deref(), *max_iters, *float)
        }
    }
}

fn measure(r: &ParamScalar) -> Result<CantorMeasure<ParamScalar>> {
    CantorMeasure::new(r.clone()).context("--r")
}

fn formal_measure() -> CantorMeasure<ParamRational> {
    CantorMeasure::new(ParamRational::r()).expect("the formal ratio is admissible")
}

fn moments(r: &RatioArg) -> Report {
    match r {
        RatioArg::Value(r) => {
            let m = CantorMeasure::new(r.clone()).expect("checked by the parser");
            let (mean, var, second) = (m.mean(), m.variance(), m.second_moment());
            Report {
                command: "moments",
                json: json!({
                    "r": exact_json(r),
                    "mean": exact_json(&mean),
                    "variance": exact_json(&var),
                    "second_moment": exact_json(&second),
                }),
                text: format!(
                    "r         {}\nmean      {}\nvariance  {}\nE(X^2)    {}",
                    exact_text(r),
                    exact_text(&mean),
                    exact_text(&var),
                    exact_text(&second)
                ),
                csv: Some(csv(
                    &["r", "mean", "variance", "second_moment"],
                    &[vec![
                        fraction_string(r),
                        fraction_string(&mean),
                        fraction_string(&var),
                        fraction_string(&second),
                    ]],
                )),
            }
        }
        RatioArg::Formal => {
            let m = formal_measure();
            let (mean, var, second) = (m.mean(), m.variance(), m.second_moment());
            Report {
                command: "moments",
                json: json!({
                    "r": "formal",
                    "mean": formal_json(&mean),
                    "variance": formal_json(&var),
                    "second_moment": formal_json(&second),
                }),
                text: format!("mean      {mean}\nvariance  {var}\nE(X^2)    {second}"),
                csv: None,
            }
        }
    }
}

/// The construction named by `--family/--n/--I/--variants`.
fn construction(spec: &CodebookSpec) -> Result<Construction> {
    let family = spec.family.ok_or_else(|| anyhow!("--family is required"))?;
    let n = spec.n.ok_or_else(|| anyhow!("--n is required"))?;
    let found = match (&spec.index_set, &spec.variants) {
        (None, None) => Construction::canonical(family, n).context("--n")?,
        (Some(set), Some(bits)) => Construction::new(family, n, set.clone(), bits.clone()),
        (Some(set), None) => {
            let mut set = set.clone();
            set.sort();
            constructions(n, family)
                .context("--n")?
                .find(|c| c.index_set == set)
                .ok_or_else(|| anyhow!("--I does not index a construction for n = {n}"))?
        }
        (None, Some(_)) => bail!("--variants needs --I"),
    };
    found.cells().context("invalid --I/--variants")?;
    Ok(found)
}

/// Reads `--codebook`, returning the codebook and the ratio stored with it.
fn read_record(path: &std::path::Path) -> Result<(Codebook<ParamScalar>, Option<ParamScalar>)> {
    let text = fs::read_to_string(path).with_context(|| format!("--codebook {}", path.display()))?;
    let record: CodebookRecord =
        serde_json::from_str(&text).with_context(|| format!("--codebook {}: not a codebook record", path.display()))?;
    let r = record.r.as_deref().map(cantor_cvt::scalar::parse_scalar).transpose().context("--codebook: bad ratio")?;
    let cb = record.to_codebook().context("--codebook")?;
    Ok((cb, r))
}

/// A concrete codebook with its ratio.
fn concrete(spec: &CodebookSpec, r: Option<&RatioArg>) -> Result<(Codebook<ParamScalar>, ParamScalar)> {
    let given = match r {
        Some(RatioArg::Formal) => bail!("--r formal is not valid here"),
        Some(RatioArg::Value(v)) => Some(v.clone()),
        None => None,
    };
    if let Some(path) = &spec.codebook {
        let (cb, stored) = read_record(path)?;
        let r = match (given, stored) {
            (Some(a), Some(b)) if a != b => {
                bail!("--r {} disagrees with the ratio in --codebook ({})", fraction_string(&a), fraction_string(&b))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => bail!("--r is required: --codebook has no ratio"),
        };
        return Ok((cb, r));
    }
    let r = given.ok_or_else(|| anyhow!("--r is required"))?;
    if let Some(points) = &spec.points {
        return Ok((Codebook::custom(points.clone()), r));
    }
    let cb = construction(spec)?.build(&measure(&r)?)?;
    Ok((cb, r))
}

fn cells_text(cells: &Option<Vec<Vec<Word>>>, i: usize) -> String {
    cells.as_ref().map(|c| c[i].iter().map(Word::to_string).collect::<Vec<_>>().join(" ")).unwrap_or_default()
}

fn codebook(spec: &CodebookSpec, r: &RatioArg) -> Result<Report> {
    if let RatioArg::Formal = r {
        if spec.points.is_some() || spec.codebook.is_some() {
            bail!("--r formal needs --family and --n");
        }
        let c = construction(spec)?;
        let cb = c.build(&formal_measure())?;
        let text = cb
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| format!("a{:<3} {p}    [{}]", i + 1, cells_text(&cb.cells, i)))
            .collect::<Vec<_>>()
            .join("\n");
        return Ok(Report {
            command: "codebook",
            json: json!({
                "family": c.family,
                "n": c.n,
                "I": c.index_set,
                "variants": c.variants,
                "points": cb.points.iter().map(formal_json).collect::<Vec<_>>(),
                "r": "formal",
            }),
            text,
            csv: None,
        });
    }
    let (cb, r) = concrete(spec, Some(r))?;
    let record = CodebookRecord::from_codebook(&cb, Some(&r));
    let rows: Vec<Vec<String>> = cb
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| vec![(i + 1).to_string(), fraction_string(p), decimal(p), cells_text(&cb.cells, i)])
        .collect();
    Ok(Report {
        command: "codebook",
        json: serde_json::to_value(&record)?,
        text: table(&["i", "point", "decimal", "cell"], &rows),
        csv: Some(csv(&["i", "point", "decimal", "cell"], &rows)),
    })
}

fn status_code(s: CvtStatus) -> &'static str {
    match s {
        CvtStatus::Valid => "1",
        CvtStatus::Invalid => "0",
        CvtStatus::Undecided => "U",
    }
}

fn status_word(s: CvtStatus) -> &'static str {
    match s {
        CvtStatus::Valid => "valid",
        CvtStatus::Invalid => "invalid",
        CvtStatus::Undecided => "undecided",
    }
}

fn enumerate_cmd(family: Family, n: usize, r: Option<&RatioArg>, verify: bool, depth: usize) -> Result<Report> {
    let expected = count_cvts(n, family).context("--family/--n")?;
    let list: Vec<Construction> = constructions(n, family)?.collect();
    let concrete_r = match r {
        Some(RatioArg::Value(v)) => Some(v.clone()),
        Some(RatioArg::Formal) if verify => bail!("--verify needs a concrete --r"),
        None if verify => bail!("--verify needs --r"),
        _ => None,
    };
    let built: Option<Vec<Codebook<ParamScalar>>> = match &concrete_r {
        Some(r) => Some(enumerate(n, family, &measure(r)?)?.collect::<cantor_cvt::Result<_>>()?),
        None => None,
    };
    let statuses: Option<Vec<CvtStatus>> = match (&built, &concrete_r, verify) {
        (Some(cbs), Some(r), true) => {
            let m = measure(r)?;
            Some(cbs.par_iter().map(|cb| verify_cvt(&cb.points, &m, depth).status).collect())
        }
        _ => None,
    };
    let matches = expected == list.len().into();
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for (i, c) in list.iter().enumerate() {
        let set = c.index_set.iter().map(Word::to_string).collect::<Vec<_>>().join(";");
        let bits = c.variants.iter().map(u8::to_string).collect::<Vec<_>>().join(";");
        let mut entry = json!({ "I": c.index_set, "variants": c.variants });
        let mut row = vec![(i + 1).to_string(), set, bits];
        if let Some(cbs) = &built {
            entry["points"] = json!(cbs[i].points.iter().map(fraction_string).collect::<Vec<_>>());
        }
        if let Some(st) = &statuses {
            entry["status"] = json!(status_word(st[i]));
            row.push(status_word(st[i]).to_string());
        }
        entries.push(entry);
        rows.push(row);
    }
    let mut header = vec!["#", "I", "variants"];
    if statuses.is_some() {
        header.push("status");
    }
    let summary = format!(
        "{family} n = {n}: {} constructions, expected {expected} ({})",
        list.len(),
        if matches { "ok" } else { "MISMATCH" }
    );
    Ok(Report {
        command: "enumerate",
        json: json!({
            "family": family,
            "n": n,
            "r": concrete_r.as_ref().map(fraction_string),
            "count": list.len(),
            "expected_count": expected.to_string(),
            "count_matches": matches,
            "codebooks": entries,
        }),
        text: format!("{summary}\n{}", table(&header, &rows)),
        csv: Some(csv(&header, &rows)),
    })
}

fn verify(spec: &CodebookSpec, r: Option<&RatioArg>, depth: usize, tol: &ParamScalar) -> Result<Report> {
    if let Some(RatioArg::Formal) = r {
        return verify_formal(spec, tol);
    }
    let (cb, r) = concrete(spec, r)?;
    let cert = verify_cvt(&cb.points, &measure(&r)?, depth);
    let mut json = serde_json::to_value(&cert)?;
    json["r"] = json!(fraction_string(&r));
    json["family"] = json!(cb.family());
    let mut lines = vec![format!("status: {}", status_word(cert.status))];
    if let Some(reason) = &cert.reason {
        lines.push(format!("reason: {reason}"));
    }
    for (i, b) in cert.boundaries.iter().enumerate() {
        let witness = cert.gap_witnesses[i].as_ref().map_or("none".to_string(), Word::to_string);
        lines.push(format!("boundary {}: {}  gap of {witness}", i + 1, exact_text(b)));
    }
    for (i, res) in cert.residuals.iter().enumerate() {
        if let Some(res) = res {
            lines.push(format!("residual {}: {}", i + 1, fraction_string(res)));
        }
    }
    if let Some(d) = &cert.distortion {
        lines.push(format!("distortion: {}", bound_text(d)));
    }
    Ok(Report { command: "verify", json, text: lines.join("\n"), csv: None })
}

/// With a formal ratio, verification reduces to the list of gate inequalities.
fn verify_formal(spec: &CodebookSpec, tol: &ParamScalar) -> Result<Report> {
    let c = construction(spec)?;
    let cb = c.build(&formal_measure())?;
    let gates = gate_inequalities(&cb)?;
    let mut items = Vec::new();
    let mut lines = Vec::new();
    for g in &gates {
        let roots = sign_change_roots(&g.difference, tol)?;
        let shown: Vec<String> = roots.iter().map(|x| fixed_decimal(x, 10)).collect();
        lines.push(format!(
            "{}\n    {} >= 0    sign changes: {}",
            g.describe(),
            g.difference,
            if shown.is_empty() { "none".into() } else { shown.join(", ") }
        ));
        items.push(json!({
            "gate": g.describe(),
            "boundary": g.boundary,
            "side": g.side,
            "word": g.word,
            "difference": formal_json(&g.difference),
            "sign_changes": shown,
        }));
    }
    Ok(Report {
        command: "verify",
        json: json!({ "r": "formal", "family": c.family, "n": c.n, "gates": items }),
        text: lines.join("\n"),
        csv: None,
    })
}

fn distortion_cmd(
    spec: &CodebookSpec,
    r: Option<&RatioArg>,
    window: Option<&[ParamScalar]>,
    depth: usize,
) -> Result<Report> {
    if let Some(RatioArg::Formal) = r {
        let c = construction(spec)?;
        let cb = c.build(&formal_measure())?;
        let (value, method) = match window {
            Some([lo, hi]) => (formal_distortion(&cb, (lo, hi), depth).context("--window")?, "certified"),
            Some(_) => bail!("--window takes lo,hi"),
            None => {
                let m = formal_measure();
                let cells = cb.cells.as_ref().expect("constructions carry cells");
                (cantor_cvt::cvt::cells_distortion(&m, &cb.points, cells), "construction_cells")
            }
        };
        return Ok(Report {
            command: "distortion",
            json: json!({
                "family": c.family, "n": c.n, "I": c.index_set, "variants": c.variants,
                "r": "formal", "method": method, "distortion": formal_json(&value),
            }),
            text: format!("V = {value}\nnumerator:   {}\ndenominator: {}", value.num(), value.den()),
            csv: None,
        });
    }
    if window.is_some() {
        bail!("--window needs --r formal");
    }
    let (cb, r) = concrete(spec, r)?;
    let bound = codebook_distortion(&cb, &measure(&r)?, depth)?;
    Ok(Report {
        command: "distortion",
        json: json!({ "family": cb.family(), "n": cb.n(), "r": exact_json(&r), "distortion": bound_json(&bound) }),
        text: format!("V = {}", bound_text(&bound)),
        csv: None,
    })
}

const FAMILIES: [Family; 3] = [Family::Alpha, Family::Beta, Family::Delta];

struct FamilyRow {
    family: Family,
    formula: ParamScalar,
    actual: DistortionBound,
    status: CvtStatus,
}

fn family_row(family: Family, n: usize, r: &ParamScalar, depth: usize) -> Result<FamilyRow> {
    let m = measure(r)?;
    let cb = Construction::canonical(family, n)?.build(&m)?;
    let cells = cb.cells.as_ref().expect("constructions carry cells");
    Ok(FamilyRow {
        family,
        formula: cantor_cvt::cvt::cells_distortion(&m, &cb.points, cells),
        actual: distortion(&cb.points, &m, depth)?,
        status: verify_cvt(&cb.points, &m, depth).status,
    })
}

fn compare(r: &ParamScalar, n: usize, depth: usize) -> Result<Report> {
    let rows: Vec<FamilyRow> = FAMILIES.iter().map(|&f| family_row(f, n, r, depth)).collect::<Result<_>>()?;
    let mut order: Vec<&FamilyRow> = rows.iter().collect();
    let mut certified = true;
    order.sort_by(|a, b| {
        a.actual.compare(&b.actual).unwrap_or_else(|| {
            certified = false;
            std::cmp::Ordering::Equal
        })
    });
    let ordering = order.iter().map(|x| x.family.to_string()).collect::<Vec<_>>().join(" < ");
    let table_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|x| {
            vec![x.family.to_string(), status_word(x.status).into(), bound_text(&x.actual), exact_text(&x.formula)]
        })
        .collect();
    Ok(Report {
        command: "compare",
        json: json!({
            "r": exact_json(r),
            "n": n,
            "families": rows.iter().map(|x| json!({
                "family": x.family,
                "status": status_word(x.status),
                "distortion": bound_json(&x.actual),
                "construction_distortion": exact_json(&x.formula),
            })).collect::<Vec<_>>(),
            "ordering": ordering,
            "ordering_certified": certified,
        }),
        text: format!(
            "{}\nordering by distortion: {ordering}{}",
            table(&["family", "cvt", "distortion", "construction formula"], &table_rows),
            if certified { "" } else { " (not certified: enclosures overlap)" }
        ),
        csv: Some(csv(
            &["family", "cvt", "distortion", "construction_distortion"],
            &rows
                .iter()
                .map(|x| {
                    vec![
                        x.family.to_string(),
                        status_code(x.status).into(),
                        x.actual.exact_value().map_or(String::new(), decimal),
                        decimal(&x.formula),
                    ]
                })
                .collect::<Vec<_>>(),
        )),
    })
}

const SWEEP_HEADER: [&str; 7] = ["r", "V_alpha3", "V_beta3", "V_delta3", "valid_alpha", "valid_beta", "valid_delta"];

fn compare_sweep(sweep: &Sweep, depth: usize) -> Result<Report> {
    let formulas: Vec<ParamRational> =
        FAMILIES.iter().map(|&f| construction_distortion(f, 3)).collect::<cantor_cvt::Result<_>>()?;
    let grid = sweep.grid();
    let rows: Vec<Vec<String>> = grid
        .par_iter()
        .map(|r| -> Result<Vec<String>> {
            let m = measure(r)?;
            let mut row = vec![decimal(r)];
            for f in &formulas {
                row.push(decimal(&f.evaluate(r)?));
            }
            for family in FAMILIES {
                let cb = Construction::canonical(family, 3)?.build(&m)?;
                row.push(status_code(verify_cvt(&cb.points, &m, depth).status).into());
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|row| Value::Object(SWEEP_HEADER.iter().zip(row).map(|(k, v)| (k.to_string(), json!(v))).collect()))
        .collect();
    Ok(Report {
        command: "compare",
        json: json!({ "sweep": { "lo": exact_json(&sweep.lo), "hi": exact_json(&sweep.hi), "step": exact_json(&sweep.step) }, "rows": json_rows }),
        text: table(&SWEEP_HEADER, &rows),
        csv: Some(csv(&SWEEP_HEADER, &rows)),
    })
}

fn thresholds(tol: &ParamScalar) -> Result<Report> {
    let ts = solve_all(tol)?;
    let header = ["name", "value", "expected", "bracket", "binding gate"];
    let rows: Vec<Vec<String>> = ts
        .iter()
        .map(|t| {
            vec![
                t.name.to_string(),
                t.decimals.clone(),
                t.expected.to_string(),
                format!("[{}, {}]", fixed_decimal(&t.bracket[0], 4), fixed_decimal(&t.bracket[1], 4)),
                t.binding_gate.clone().unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    let items: Vec<Value> = ts
        .iter()
        .map(|t| {
            let mut v = serde_json::to_value(t).expect("thresholds serialize");
            v["defining_function"] = formal_json(&t.defining_function);
            v["value_decimal"] = json!(decimal(&t.value));
            v
        })
        .collect();
    Ok(Report {
        command: "thresholds",
        json: json!({ "tolerance": fraction_string(tol), "thresholds": items }),
        text: table(&header, &rows),
        csv: Some(csv(&header, &rows)),
    })
}

fn oracle(
    r: &ParamScalar,
    level: usize,
    n: usize,
    init: Option<&[ParamScalar]>,
    max_iters: usize,
    float: bool,
) -> Result<Report> {
    let mut json = json!({ "r": exact_json(r), "level": level, "n": n, "mode": if float { "float" } else { "exact" } });
    let mut lines = Vec::new();
    if float {
        let rf = r.to_f64().ok_or_else(|| anyhow!("--r does not fit a float"))?;
        let dm = discretize(&CantorMeasure::new(rf)?, level).context("--level")?;
        let q = dp_optimal(&dm, n).context("--n")?;
        lines.push(format!("optimal points: {}", join_f64(&q.points)));
        lines.push(format!("optimal distortion: {:.15e}", q.distortion));
        json["optimal"] = json!({ "points": q.points, "distortion": q.distortion });
        if let Some(init) = init {
            let start: Vec<f64> = init.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
            let run = lloyd(&dm, &start, max_iters, &1e-15).context("--init")?;
            lines.push(format!("lloyd points: {}", join_f64(&run.points)));
            lines.push(format!("lloyd distortion: {:.15e} after {} iterations", run.distortion, run.iterations));
            json["lloyd"] = json!({ "points": run.points, "distortion": run.distortion, "iterations": run.iterations, "monotone": run.is_monotone() });
        }
    } else {
        let dm = discretize(&measure(r)?, level).context("--level")?;
        let q = dp_optimal(&dm, n).context("--n")?;
        lines.push(format!("optimal points: {}", q.points.iter().map(exact_text).collect::<Vec<_>>().join(", ")));
        lines.push(format!("optimal distortion: {}", exact_text(&q.distortion)));
        json["optimal"] = json!({
            "points": q.points.iter().map(exact_json).collect::<Vec<_>>(),
            "distortion": exact_json(&q.distortion),
        });
        if let Some(init) = init {
            let zero = ParamScalar::from_integer(0.into());
            let run = lloyd(&dm, init, max_iters, &zero).context("--init")?;
            lines.push(format!("lloyd points: {}", run.points.iter().map(exact_text).collect::<Vec<_>>().join(", ")));
            lines.push(format!(
                "lloyd distortion: {} after {} iterations",
                exact_text(&run.distortion),
                run.iterations
            ));
            json["lloyd"] = json!({
                "points": run.points.iter().map(exact_json).collect::<Vec<_>>(),
                "distortion": exact_json(&run.distortion),
                "iterations": run.iterations,
                "monotone": run.is_monotone(),
            });
        }
    }
    Ok(Report { command: "oracle", json, text: lines.join("\n"), csv: None })
}

fn join_f64(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.15}")).collect::<Vec<_>>().join(", ")
}
