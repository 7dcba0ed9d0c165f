//! JSON and text forms of sequences, samplings, directed sets, and rates.
//!
//! - sequence: `{"prefix": [...], "tail": {"constant": true} | {"period": p},
//!   "bound": C, "anchor": x, "mode": "rational" | "float", "tolerance": τ}`.
//!   Entries are rationals (`"p/q"`, integers, decimals) or arrays of them.
//! - sampling: `{"F": "n+1" | "2n+1" | {"affine": {"w": 1}} | {"affine": {"slope": 2, "offset": 1}}}`
//!   or `{"sampling": {"i": [...]}, "domain": <directed set>}`.
//! - directed set: `{"elements": [...], "leq": [[a, b], ...], "anchor": a}`.
//! - rate: `[0, 1, 2]`, `{"E": [...]}`, or `{"r": "0", "per_epsilon": {"1/2": [...]}}`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::directed::{
    make_finite_directed, make_nat, sampling_from_function, DirectedError, DirectedSet, IncreasingFn, Index,
    Sampling, SamplingKind,
};
use crate::netcore::{NetError, NumericMode, Point, RateKind, RateSet, RateSpec, SequenceSpec, Tail};
use crate::rational::{self, Rational, Text};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Directed(#[from] DirectedError),
}

fn malformed(e: impl ToString) -> FormatError {
    FormatError::Malformed(e.to_string())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Scalar(Text),
    Tuple(Vec<Text>),
}

impl Entry {
    fn into_point(self) -> Point {
        match self {
            Entry::Scalar(t) => Point::scalar(t.0),
            Entry::Tuple(v) => Point(v.into_iter().map(|t| t.0).collect()),
        }
    }

    fn from_point(p: &Point) -> Self {
        match p.as_scalar() {
            Some(q) => Entry::Scalar(Text(q.clone())),
            None => Entry::Tuple(p.0.iter().cloned().map(Text).collect()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TailFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constant: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SequenceFile {
    prefix: Vec<Entry>,
    #[serde(default = "constant_tail")]
    tail: TailFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bound: Option<Text>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anchor: Option<Entry>,
    #[serde(default = "rational_mode")]
    mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<Text>,
}

fn constant_tail() -> TailFile {
    TailFile {
        constant: Some(true),
        period: None,
    }
}

fn rational_mode() -> String {
    "rational".into()
}

pub fn sequence_from_value(v: &Value) -> Result<SequenceSpec, FormatError> {
    let f: SequenceFile = serde_json::from_value(v.clone()).map_err(malformed)?;
    let tail = match (f.tail.constant, f.tail.period) {
        (Some(true), None) | (None, None) => Tail::Constant,
        (None | Some(false), Some(p)) => Tail::Periodic(p),
        _ => return Err(malformed("tail is either {\"constant\": true} or {\"period\": p}")),
    };
    let mut seq = SequenceSpec::new(f.prefix.into_iter().map(Entry::into_point).collect(), tail)?;
    seq = match f.mode.as_str() {
        "rational" | "exact" => seq,
        "float" => seq.with_mode(match f.tolerance {
            Some(t) => NumericMode::Float { tolerance: t.0 },
            None => NumericMode::float_default(),
        }),
        other => return Err(malformed(format!("unknown mode `{other}`"))),
    };
    match (f.bound, f.anchor) {
        (Some(c), Some(a)) => seq = seq.with_anchor(a.into_point(), c.0)?,
        (Some(c), None) => seq = seq.with_bound(c.0)?,
        (None, Some(_)) => return Err(malformed("an anchor needs a bound")),
        (None, None) => {}
    }
    Ok(seq)
}

pub fn sequence_from_json(text: &str) -> Result<SequenceSpec, FormatError> {
    sequence_from_value(&serde_json::from_str(text).map_err(malformed)?)
}

pub fn sequence_to_value(seq: &SequenceSpec) -> Value {
    let tail = match seq.tail() {
        Tail::Constant => constant_tail(),
        Tail::Periodic(p) => TailFile {
            constant: None,
            period: Some(p),
        },
    };
    let (mode, tolerance) = match seq.mode() {
        NumericMode::Exact => (rational_mode(), None),
        NumericMode::Float { tolerance } => ("float".to_owned(), Some(Text(tolerance.clone()))),
    };
    let file = SequenceFile {
        prefix: seq.prefix().iter().map(Entry::from_point).collect(),
        tail,
        bound: Some(Text(seq.bound().clone())),
        anchor: seq.anchor().map(Entry::from_point),
        mode,
        tolerance,
    };
    serde_json::to_value(file).expect("sequence serializes")
}

/// `n`, `n+c`, `kn+c`, `k*n+c` (spaces allowed).
pub fn parse_increasing_fn(text: &str) -> Result<IncreasingFn, FormatError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || malformed(format!("`{text}` is not of the form n+c or kn+c"));
    let (lhs, offset) = match s.split_once('+') {
        Some((l, c)) => (l, c.parse::<Index>().map_err(|_| bad())?),
        None => (s.as_str(), 0),
    };
    let slope = match lhs.strip_suffix('n').ok_or_else(bad)? {
        "" => 1,
        k => k.strip_suffix('*').unwrap_or(k).parse::<Index>().map_err(|_| bad())?,
    };
    let f = IncreasingFn::affine(slope, offset);
    f.validate()?;
    Ok(f)
}

/// A sampling from a text form of `F` or a JSON sampling object.
pub fn sampling_from_text(text: &str) -> Result<Sampling, FormatError> {
    let t = text.trim();
    if t.starts_with('{') {
        sampling_from_value(&serde_json::from_str(t).map_err(malformed)?)
    } else {
        Ok(sampling_from_function(parse_increasing_fn(t)?)?)
    }
}

pub fn sampling_from_value(v: &Value) -> Result<Sampling, FormatError> {
    if let Some(f) = v.get("F") {
        let func = match f {
            Value::String(s) => parse_increasing_fn(s)?,
            Value::Object(_) => {
                let a = f.get("affine").ok_or_else(|| malformed("expected {\"affine\": …}"))?;
                let get = |k: &str| a.get(k).and_then(Value::as_u64).map(|x| x as Index);
                let func = match (get("w"), get("slope"), get("offset")) {
                    (Some(w), None, None) => IncreasingFn::shift(w),
                    (None, slope, Some(offset)) => IncreasingFn::affine(slope.unwrap_or(1), offset),
                    _ => return Err(malformed("affine takes {\"w\": c} or {\"slope\": k, \"offset\": c}")),
                };
                func.validate()?;
                func
            }
            _ => return Err(malformed("F must be a string or an object")),
        };
        return Ok(sampling_from_function(func)?);
    }
    let map = v
        .get("sampling")
        .and_then(Value::as_object)
        .ok_or_else(|| malformed("expected \"F\" or \"sampling\""))?;
    let domain = match v.get("domain") {
        Some(d) => directed_from_value(d)?,
        None => make_nat(),
    };
    let index = |label: &Value| -> Result<Index, FormatError> {
        let s = match label {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return Err(malformed("sampling entries are labels or indices")),
        };
        domain
            .index_of(&s)
            .ok_or_else(|| malformed(format!("`{s}` is not an element of the domain")))
    };
    let mut windows = BTreeMap::new();
    for (i, members) in map {
        let i = index(&Value::String(i.clone()))?;
        let members = members
            .as_array()
            .ok_or_else(|| malformed("sampling windows are arrays"))?
            .iter()
            .map(index)
            .collect::<Result<BTreeSet<_>, _>>()?;
        windows.insert(i, members);
    }
    Ok(Sampling::explicit(windows, domain))
}

pub fn sampling_to_value(eta: &Sampling) -> Value {
    match eta.kind() {
        SamplingKind::FromFunction(f) => json!({ "F": f.to_string() }),
        SamplingKind::Explicit(map) => {
            let d = eta.domain();
            let windows: serde_json::Map<String, Value> = map
                .iter()
                .map(|(i, w)| (d.label(*i), Value::from(w.iter().map(|j| d.label(*j)).collect::<Vec<_>>())))
                .collect();
            let mut out = json!({ "sampling": windows });
            if !d.is_nat() {
                out["domain"] = directed_to_value(d);
            }
            out
        }
    }
}

pub fn directed_from_value(v: &Value) -> Result<DirectedSet, FormatError> {
    if v.as_str() == Some("N") || v.as_str() == Some("ℕ") {
        return Ok(make_nat());
    }
    #[derive(Deserialize)]
    struct File {
        elements: Vec<String>,
        leq: Vec<(String, String)>,
        anchor: String,
    }
    let f: File = serde_json::from_value(v.clone()).map_err(malformed)?;
    Ok(make_finite_directed(&f.elements, &f.leq, &f.anchor)?)
}

pub fn directed_to_value(d: &DirectedSet) -> Value {
    match d.elements() {
        None => Value::from("N"),
        Some(range) => json!({
            "elements": range.map(|i| d.label(i)).collect::<Vec<_>>(),
            "leq": d.leq_pairs(),
            "anchor": d.label(d.anchor()),
        }),
    }
}

/// `a..b` (inclusive), `a,b,c`, or a JSON rate.
pub fn parse_rate_set(text: &str) -> Result<RateSet, FormatError> {
    let t = text.trim();
    if t.starts_with('[') || t.starts_with('{') {
        let spec = rate_from_value(&serde_json::from_str(t).map_err(malformed)?)?;
        return match spec.kind() {
            RateKind::Single(e) => Ok(e.clone()),
            _ => Err(malformed("expected a single rate set")),
        };
    }
    let bad = || malformed(format!("`{text}` is not a rate set (try 0..5 or 0,2,4)"));
    if let Some((a, b)) = t.split_once("..") {
        let a: Index = a.trim().parse().map_err(|_| bad())?;
        let b: Index = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        return if a <= b { Ok((a..=b).collect()) } else { Err(bad()) };
    }
    t.split(',')
        .map(|s| s.trim().parse::<Index>().map_err(|_| bad()))
        .collect()
}

pub fn rate_from_value(v: &Value) -> Result<RateSpec, FormatError> {
    let set = |x: &Value| -> Result<RateSet, FormatError> { serde_json::from_value(x.clone()).map_err(malformed) };
    if v.is_array() {
        return Ok(RateSpec::single(set(v)?)?);
    }
    if let Some(e) = v.get("E") {
        return Ok(RateSpec::single(set(e)?)?);
    }
    let r = match v.get("r") {
        Some(r) => serde_json::from_value::<Text>(r.clone()).map_err(malformed)?.0,
        None => rational::zero(),
    };
    let map = v
        .get("per_epsilon")
        .and_then(Value::as_object)
        .ok_or_else(|| malformed("expected an array, {\"E\": …} or {\"per_epsilon\": …}"))?;
    let mut out = BTreeMap::new();
    for (eps, e) in map {
        out.insert(rational::parse(eps).map_err(malformed)?, set(e)?);
    }
    Ok(RateSpec::per_epsilon(out, r)?)
}

pub fn rate_to_value(rate: &RateSpec) -> Value {
    match rate.kind() {
        RateKind::Single(e) => json!({ "E": e }),
        RateKind::PerEpsilon(m) => json!({
            "r": rational::format(rate.r()),
            "per_epsilon": m.iter().map(|(k, e)| (rational::format(k), json!(e))).collect::<serde_json::Map<_, _>>(),
        }),
        RateKind::PerEpsilonEta(m) => json!({
            "r": rational::format(rate.r()),
            "per_epsilon_eta": m
                .iter()
                .map(|((k, id), e)| json!({"eps": rational::format(k), "eta": id, "E": e}))
                .collect::<Vec<_>>(),
        }),
    }
}

/// Rational from a command-line or JSON string.
pub fn parse_rational(text: &str) -> Result<Rational, FormatError> {
    rational::parse(text).map_err(malformed)
}
