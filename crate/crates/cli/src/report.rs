use anyhow::{bail, Result};
use serde_json::{json, Map, Value};

use cantor_cvt::scalar::{fraction_string, sig_decimal};
use cantor_cvt::{DistortionBound, ParamRational, ParamScalar};

use crate::args::Output;

pub const SCHEMA_VERSION: u32 = 1;
const DECIMAL_DIGITS: usize = 15;

/// A command's result in every format it supports.
pub struct Report {
    pub command: &'static str,
    pub json: Value,
    pub text: String,
    pub csv: Option<String>,
}

impl Report {
    pub fn render(self, output: Output) -> Result<String> {
        match output {
            Output::Text => Ok(self.text),
            Output::Csv => match self.csv {
                Some(csv) => Ok(csv),
                None => bail!("--output csv is not available for `{}`", self.command),
            },
            Output::Json => {
                let mut top = Map::new();
                top.insert("schema_version".into(), json!(SCHEMA_VERSION));
                top.insert("command".into(), json!(self.command));
                match self.json {
                    Value::Object(fields) => top.extend(fields),
                    other => {
                        top.insert("result".into(), other);
                    }
                }
                Ok(serde_json::to_string_pretty(&Value::Object(top))?)
            }
        }
    }
}

pub fn decimal(x: &ParamScalar) -> String {
    sig_decimal(x, DECIMAL_DIGITS)
}

pub fn exact_json(x: &ParamScalar) -> Value {
    json!({ "fraction": fraction_string(x), "decimal": decimal(x) })
}

pub fn exact_text(x: &ParamScalar) -> String {
    format!("{} ({})", fraction_string(x), decimal(x))
}

pub fn formal_json(f: &ParamRational) -> Value {
    let mut v = serde_json::to_value(f).expect("rational functions serialize");
    if let Value::Object(m) = &mut v {
        m.insert("expression".into(), json!(f.to_string()));
    }
    v
}

pub fn bound_json(b: &DistortionBound) -> Value {
    match b.exact_value() {
        Some(v) => json!({ "exact": true, "value": exact_json(v) }),
        None => json!({ "exact": false, "lo": exact_json(&b.lo), "hi": exact_json(&b.hi) }),
    }
}

pub fn bound_text(b: &DistortionBound) -> String {
    match b.exact_value() {
        Some(v) => exact_text(v),
        None => format!("in [{}, {}]", exact_text(&b.lo), exact_text(&b.hi)),
    }
}

/// Left-aligned columns separated by two spaces.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
    };
    let mut out = vec![line(header.to_vec())];
    out.extend(rows.iter().map(|r| line(r.iter().map(String::as_str).collect())));
    out.join("\n")
}

pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    for row in rows {
        out.push('\n');
        out.push_str(&row.join(","));
    }
    out
}
