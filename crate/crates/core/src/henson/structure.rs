use std::collections::BTreeMap;

use num::Signed;
use serde::{Deserialize, Serialize};

use super::syntax::{Signature, Sort, REAL_SORT};
use super::LogicError;
use crate::rational::{self, Rational, Text};

/// A value of some sort: a point `(sort index, point index)` or a real.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Point(usize, usize),
    Real(Rational),
}

impl Value {
    pub fn as_real(&self) -> Option<&Rational> {
        match self {
            Value::Real(q) => Some(q),
            Value::Point(..) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortData {
    pub name: String,
    pub points: Vec<String>,
    pub metric: Vec<Vec<Rational>>,
    pub anchor: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionData {
    pub domain: Vec<usize>,
    pub range: Sort,
    /// Keyed by argument point indices; total on the product of the domain sorts.
    pub table: BTreeMap<Vec<usize>, Value>,
}

/// A finite many-sorted metric structure. The real sort is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStructure {
    sorts: Vec<SortData>,
    functions: BTreeMap<String, FunctionData>,
    signature: Signature,
}

impl FiniteStructure {
    /// Validates metrics, anchors, and function tables.
    pub fn new(sorts: Vec<SortData>, functions: BTreeMap<String, FunctionData>) -> Result<Self, LogicError> {
        let mut signature = Signature::new();
        for s in &sorts {
            validate_sort(s)?;
            signature
                .add_sort(&s.name, &s.points[s.anchor])
                .map_err(LogicError::InvalidStructure)?;
            for p in &s.points {
                signature.add_constant(p, &s.name).map_err(LogicError::InvalidStructure)?;
            }
        }
        for (name, f) in &functions {
            let domain = f
                .domain
                .iter()
                .map(|&k| {
                    sorts
                        .get(k)
                        .map(|s| Sort::Base(s.name.clone()))
                        .ok_or_else(|| LogicError::InvalidStructure(format!("`{name}`: unknown domain sort #{k}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let range_idx = match &f.range {
                Sort::Real => None,
                Sort::Base(r) => Some(sorts.iter().position(|s| &s.name == r).ok_or_else(|| {
                    LogicError::InvalidStructure(format!("`{name}`: unknown range sort `{r}`"))
                })?),
            };
            let expected: usize = f.domain.iter().map(|&k| sorts[k].points.len()).product();
            if f.table.len() != expected {
                return Err(LogicError::InvalidStructure(format!(
                    "`{name}`: table has {} entries, expected {expected}",
                    f.table.len()
                )));
            }
            for (args, v) in &f.table {
                let in_domain = args.len() == f.domain.len()
                    && args.iter().zip(&f.domain).all(|(&a, &k)| a < sorts[k].points.len());
                let in_range = match (v, range_idx) {
                    (Value::Real(_), None) => true,
                    (Value::Point(s, p), Some(r)) => *s == r && *p < sorts[r].points.len(),
                    _ => false,
                };
                if !in_domain || !in_range {
                    return Err(LogicError::InvalidStructure(format!("`{name}`: ill-sorted table entry")));
                }
            }
            signature
                .add_function(name, domain, f.range.clone())
                .map_err(LogicError::InvalidStructure)?;
        }
        Ok(FiniteStructure {
            sorts,
            functions,
            signature,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn sorts(&self) -> &[SortData] {
        &self.sorts
    }

    pub fn functions(&self) -> &BTreeMap<String, FunctionData> {
        &self.functions
    }

    pub fn sort_index(&self, name: &str) -> Option<usize> {
        self.sorts.iter().position(|s| s.name == name)
    }

    pub fn sort(&self, name: &str) -> Option<&SortData> {
        self.sorts.iter().find(|s| s.name == name)
    }

    /// Looks a point up by label across all sorts.
    pub fn point(&self, label: &str) -> Option<Value> {
        self.sorts.iter().enumerate().find_map(|(k, s)| {
            s.points.iter().position(|p| p == label).map(|i| Value::Point(k, i))
        })
    }

    pub fn dist(&self, sort: usize, a: usize, b: usize) -> &Rational {
        &self.sorts[sort].metric[a][b]
    }

    pub fn dist_to_anchor(&self, sort: usize, p: usize) -> &Rational {
        let s = &self.sorts[sort];
        &s.metric[p][s.anchor]
    }

    /// Every metric entry of every sort.
    pub fn distances(&self) -> impl Iterator<Item = &Rational> {
        self.sorts.iter().flat_map(|s| s.metric.iter().flatten())
    }

    pub fn label(&self, v: &Value) -> String {
        match v {
            Value::Point(s, p) => self.sorts[*s].points[*p].clone(),
            Value::Real(q) => rational::format(q),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, LogicError> {
        let file: StructureFile =
            serde_json::from_str(text).map_err(|e| LogicError::InvalidStructure(e.to_string()))?;
        file.into_structure()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StructureFile::from_structure(self)).expect("structure serializes")
    }
}

fn validate_sort(s: &SortData) -> Result<(), LogicError> {
    let bad = |msg: String| Err(LogicError::InvalidStructure(format!("sort `{}`: {msg}", s.name)));
    let n = s.points.len();
    if s.name == REAL_SORT {
        return bad(format!("`{REAL_SORT}` is the real sort"));
    }
    if n == 0 {
        return bad("no points".into());
    }
    if s.anchor >= n {
        return bad("anchor is not a point of the sort".into());
    }
    if s.metric.len() != n || s.metric.iter().any(|row| row.len() != n) {
        return bad(format!("metric must be {n}×{n}"));
    }
    for i in 0..n {
        for j in 0..n {
            let dij = &s.metric[i][j];
            if dij.is_negative() {
                return bad(format!("d({}, {}) is negative", s.points[i], s.points[j]));
            }
            if (i == j) != rational::is_zero(dij) {
                return bad(format!("d({}, {}) violates identity of indiscernibles", s.points[i], s.points[j]));
            }
            if dij != &s.metric[j][i] {
                return bad(format!("d({}, {}) is not symmetric", s.points[i], s.points[j]));
            }
            for k in 0..n {
                if dij > &(&s.metric[i][k] + &s.metric[k][j]) {
                    return bad(format!(
                        "triangle inequality fails at {}, {}, {}",
                        s.points[i], s.points[k], s.points[j]
                    ));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct StructureFile {
    sorts: BTreeMap<String, SortFile>,
    #[serde(default)]
    functions: BTreeMap<String, FunctionFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SortFile {
    points: Vec<String>,
    metric: Vec<Vec<Text>>,
    anchor: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct FunctionFile {
    #[serde(default)]
    domain: Vec<String>,
    #[serde(default = "real_sort_name")]
    range: String,
    /// Comma-joined argument labels ↦ value (a rational or a point label).
    table: BTreeMap<String, serde_json::Value>,
}

fn real_sort_name() -> String {
    REAL_SORT.to_owned()
}

impl StructureFile {
    fn into_structure(self) -> Result<FiniteStructure, LogicError> {
        let invalid = LogicError::InvalidStructure;
        let mut sorts = Vec::new();
        for (name, s) in self.sorts {
            let anchor = s
                .points
                .iter()
                .position(|p| p == &s.anchor)
                .ok_or_else(|| invalid(format!("sort `{name}`: anchor `{}` is not a point", s.anchor)))?;
            sorts.push(SortData {
                name,
                points: s.points,
                metric: s.metric.into_iter().map(|row| row.into_iter().map(|t| t.0).collect()).collect(),
                anchor,
            });
        }
        let sort_idx = |name: &str| {
            sorts
                .iter()
                .position(|s| s.name == name)
                .ok_or_else(|| invalid(format!("unknown sort `{name}`")))
        };
        let mut functions = BTreeMap::new();
        for (fname, f) in self.functions {
            let domain = f.domain.iter().map(|s| sort_idx(s)).collect::<Result<Vec<_>, _>>()?;
            let range = if f.range == REAL_SORT {
                Sort::Real
            } else {
                sort_idx(&f.range)?;
                Sort::Base(f.range.clone())
            };
            let mut table = BTreeMap::new();
            for (key, raw) in f.table {
                let labels: Vec<&str> = if key.trim().is_empty() {
                    Vec::new()
                } else {
                    key.split(',').map(str::trim).collect()
                };
                if labels.len() != domain.len() {
                    return Err(invalid(format!("`{fname}`: key `{key}` has wrong arity")));
                }
                let args = labels
                    .iter()
                    .zip(&domain)
                    .map(|(l, &k)| {
                        sorts[k]
                            .points
                            .iter()
                            .position(|p| p == l)
                            .ok_or_else(|| invalid(format!("`{fname}`: `{l}` is not a point of `{}`", sorts[k].name)))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let value = match &range {
                    Sort::Real => {
                        let t: Text = serde_json::from_value(raw).map_err(|e| invalid(format!("`{fname}`: {e}")))?;
                        Value::Real(t.0)
                    }
                    Sort::Base(r) => {
                        let k = sort_idx(r)?;
                        let label = raw
                            .as_str()
                            .ok_or_else(|| invalid(format!("`{fname}`: values must be point labels")))?;
                        let p = sorts[k]
                            .points
                            .iter()
                            .position(|p| p == label)
                            .ok_or_else(|| invalid(format!("`{fname}`: `{label}` is not a point of `{r}`")))?;
                        Value::Point(k, p)
                    }
                };
                table.insert(args, value);
            }
            functions.insert(fname, FunctionData { domain, range, table });
        }
        FiniteStructure::new(sorts, functions)
    }

    fn from_structure(m: &FiniteStructure) -> Self {
        let sorts = m
            .sorts
            .iter()
            .map(|s| {
                (
                    s.name.clone(),
                    SortFile {
                        points: s.points.clone(),
                        metric: s.metric.iter().map(|row| row.iter().cloned().map(Text).collect()).collect(),
                        anchor: s.points[s.anchor].clone(),
                    },
                )
            })
            .collect();
        let functions = m
            .functions
            .iter()
            .map(|(name, f)| {
                let table = f
                    .table
                    .iter()
                    .map(|(args, v)| {
                        let key = args
                            .iter()
                            .zip(&f.domain)
                            .map(|(&a, &k)| m.sorts[k].points[a].clone())
                            .collect::<Vec<_>>()
                            .join(",");
                        let value = match v {
                            Value::Real(q) => serde_json::Value::String(rational::format(q)),
                            Value::Point(..) => serde_json::Value::String(m.label(v)),
                        };
                        (key, value)
                    })
                    .collect();
                (
                    name.clone(),
                    FunctionFile {
                        domain: f.domain.iter().map(|&k| m.sorts[k].name.clone()).collect(),
                        range: f.range.name().to_owned(),
                        table,
                    },
                )
            })
            .collect();
        StructureFile { sorts, functions }
    }
}
