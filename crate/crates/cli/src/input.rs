//! Reading fields, polynomials and JSON documents from the command line and
//! from files, with `path:line:column` diagnostics.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use shearflow::field::FieldError;
use shearflow::{parse, parse_field, ExactField, ExactPoly};

fn field_column(err: &FieldError) -> Option<usize> {
    match err {
        FieldError::Parse { offset, .. } => Some(*offset + 1),
        _ => None,
    }
}

pub fn field_arg(name: &str, text: &str) -> Result<ExactField> {
    parse_field(text).map_err(|e| match field_column(&e) {
        Some(col) => anyhow!("--{name}: column {col}: {e}"),
        None => anyhow!("--{name}: {e}"),
    })
}

pub fn poly_arg(name: &str, text: &str, nvars: usize) -> Result<ExactPoly> {
    parse(text, nvars).map_err(|e| anyhow!("--{name}: column {}: {}", e.pos + 1, e.msg))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// One field per line; blank lines and lines starting with `#` are skipped.
pub fn field_file(path: &Path) -> Result<Vec<ExactField>> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v = parse_field(line).map_err(|e| {
            let col = field_column(&e).unwrap_or(1);
            anyhow!("{}:{}:{}: {e}", path.display(), k + 1, col)
        })?;
        if let Some(first) = out.first() {
            let first: &ExactField = first;
            if first.nvars() != v.nvars() {
                bail!("{}:{}: field has {} components, earlier fields have {}", path.display(), k + 1, v.nvars(), first.nvars());
            }
        }
        out.push(v);
    }
    if out.is_empty() {
        bail!("{}: no fields found", path.display());
    }
    Ok(out)
}

pub fn json_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

#[derive(Debug, Clone)]
pub struct Point(pub Vec<shearflow::Complex64>);

/// Comma-separated Gaussian rationals such as `0,1/2,i`.
pub fn point(text: &str) -> Result<Point, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<shearflow::GaussRat>()
                .map(|q| shearflow::Scalar::to_complex(&q))
                .map_err(|e| format!("{s:?}: {e}"))
        })
        .collect::<Result<_, _>>()
        .map(Point)
}

pub fn parse_positive_f64(text: &str) -> Result<f64, String> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        Ok(_) => Err("must be a positive finite number".into()),
        Err(e) => Err(e.to_string()),
    }
}
