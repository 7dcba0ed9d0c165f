use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use metastable_core::dct::DirectedFamily;
use metastable_core::formats;
use metastable_core::henson::FiniteStructure;
use metastable_core::measure::MeasureStructure;
use metastable_core::netcore::{RateKind, RateSet, RateSpec, SequenceSpec, Tail};
use metastable_core::{Rational, Sampling};
use serde_json::Value;

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn json(path: &Path) -> Result<Value> {
    serde_json::from_str(&read(path)?).with_context(|| format!("{} is not valid JSON", path.display()))
}

/// A JSON sequence file, or a CSV file with one float per line (float mode).
pub fn sequence(path: &Path, period: Option<usize>) -> Result<SequenceSpec> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if !is_csv {
        let v = json(path)?;
        return formats::sequence_from_value(&v).with_context(|| format!("bad sequence in {}", path.display()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: bad CSV record", path.display()))?;
        let field = record.get(0).unwrap_or("");
        let x: f64 = field
            .parse()
            .with_context(|| format!("{}:{}: `{field}` is not a number", path.display(), line + 1))?;
        values.push(x);
    }
    let tail = period.map_or(Tail::Constant, Tail::Periodic);
    SequenceSpec::from_floats(&values, tail, None).with_context(|| format!("bad sequence in {}", path.display()))
}

/// Sequences from several files; a file holding a JSON array contributes each element.
pub fn sequences(paths: &[std::path::PathBuf]) -> Result<Vec<SequenceSpec>> {
    let mut out = Vec::new();
    for p in paths {
        if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            if let Value::Array(items) = json(p)? {
                for (k, item) in items.iter().enumerate() {
                    out.push(
                        formats::sequence_from_value(item)
                            .with_context(|| format!("{}: element {k}", p.display()))?,
                    );
                }
                continue;
            }
        }
        out.push(sequence(p, None)?);
    }
    if out.is_empty() {
        bail!("no sequences given");
    }
    Ok(out)
}

/// `--F`: `n+c`, `kn+c`, inline JSON, or a JSON file.
pub fn sampling(text: &str) -> Result<Sampling> {
    let path = Path::new(text);
    let text = if path.is_file() { read(path)? } else { text.to_owned() };
    formats::sampling_from_text(&text).with_context(|| format!("bad sampling `{}`", text.trim()))
}

pub fn rational(text: &str) -> Result<Rational> {
    formats::parse_rational(text).with_context(|| format!("`{text}` is not a rational (use p/q)"))
}

/// `--E`: a range, a list, JSON, or a file holding a rate or an emitted report.
pub fn rate_set(text: &str, eps: &Rational, eta_id: &str) -> Result<RateSet> {
    let path = Path::new(text);
    let text = if path.is_file() { read(path)? } else { text.to_owned() };
    let trimmed = text.trim();
    if !trimmed.starts_with('{') && !trimmed.starts_with('[') {
        return Ok(formats::parse_rate_set(trimmed)?);
    }
    let v: Value = serde_json::from_str(trimmed).context("rate is not valid JSON")?;
    let v = v.get("rate").cloned().unwrap_or(v);
    let spec: RateSpec = formats::rate_from_value(&v)?;
    if let RateKind::Single(e) = spec.kind() {
        return Ok(e.clone());
    }
    spec.rate_for(eps, Some(eta_id))
        .cloned()
        .with_context(|| format!("the rate has no set for ε = {}", metastable_core::rational::format(eps)))
}

pub fn structure(path: &Path) -> Result<FiniteStructure> {
    FiniteStructure::from_json(&read(path)?).with_context(|| format!("bad structure in {}", path.display()))
}

pub fn measure(path: &Path) -> Result<MeasureStructure> {
    MeasureStructure::from_json(&read(path)?).with_context(|| format!("bad measure structure in {}", path.display()))
}

/// A function given inline as JSON or as a JSON file.
pub fn function_value(text: &str) -> Result<Value> {
    let path = Path::new(text);
    let text = if path.is_file() { read(path)? } else { text.to_owned() };
    serde_json::from_str(&text).context("function is not valid JSON")
}

pub fn families(paths: &[std::path::PathBuf]) -> Result<Vec<DirectedFamily>> {
    let mut out = Vec::new();
    for p in paths {
        match json(p)? {
            Value::Array(items) => {
                for (k, item) in items.iter().enumerate() {
                    out.push(DirectedFamily::from_value(item).with_context(|| format!("{}: element {k}", p.display()))?);
                }
            }
            v => out.push(DirectedFamily::from_value(&v).with_context(|| format!("bad family in {}", p.display()))?),
        }
    }
    Ok(out)
}
