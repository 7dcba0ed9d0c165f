//! Finite measure structures: a sample space `Ω`, an algebra of subsets,
//! a finitely additive (possibly signed) measure given by atom weights, bounded
//! functions, and the integration functional `I f = Σ f(ω) w(ω)`.
//!
//! Sets are bitmasks over `Ω` (bit `k` is `Ω[k]`), so `|Ω| ≤ 63`. Exhaustive
//! audits enumerate the algebra and are limited to `|Ω| ≤` [`MAX_ENUMERATED`].

mod audit;
mod function;

use std::collections::{BTreeMap, HashMap};

use num::Signed;
use serde::{Deserialize, Serialize};

pub use audit::{audit_integration, audit_preloeb, Clause, Report};
pub use function::LInfFunction;

use crate::rational::{self, Rational, Text};

pub const MAX_ENUMERATED: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeasureError {
    #[error("invalid measure structure: {0}")]
    Invalid(String),
    #[error("|Ω| = {0} is too large to enumerate the algebra")]
    TooLarge(usize),
    #[error("approximate measurability needs u < v")]
    UVOrder,
    #[error("function has {got} values but |Ω| = {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Algebra {
    Powerset,
    /// Listed members; closure is audited, not assumed.
    Explicit(Vec<u64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Probability,
    Finite,
    Signed,
}

impl MeasureKind {
    pub fn is_positive(self) -> bool {
        !matches!(self, MeasureKind::Signed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TvMode {
    /// `Σ |μ(atom)|` over the atoms of the algebra.
    Fast,
    /// `sup |μA| + |μB| − |μ(A∩B)|` over all pairs of the algebra.
    Audit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureStructure {
    omega: Vec<String>,
    anchor: usize,
    algebra: Algebra,
    weights: Vec<Rational>,
    kind: MeasureKind,
    bound: Option<Rational>,
}

impl MeasureStructure {
    /// Checks shapes only; measure-theoretic clauses are left to [`audit_preloeb`].
    pub fn new(
        omega: Vec<String>,
        anchor: usize,
        weights: Vec<Rational>,
        algebra: Algebra,
        kind: MeasureKind,
    ) -> Result<Self, MeasureError> {
        let n = omega.len();
        if n == 0 || n > 63 {
            return Err(MeasureError::Invalid(format!("|Ω| must be in 1..=63, got {n}")));
        }
        if anchor >= n {
            return Err(MeasureError::Invalid("anchor is not a sample point".into()));
        }
        if weights.len() != n {
            return Err(MeasureError::DimensionMismatch {
                expected: n,
                got: weights.len(),
            });
        }
        for (k, w) in omega.iter().enumerate() {
            if omega[..k].contains(w) {
                return Err(MeasureError::Invalid(format!("duplicate sample point `{w}`")));
            }
        }
        if let Algebra::Explicit(sets) = &algebra {
            let full = full_mask(n);
            if let Some(s) = sets.iter().find(|&&s| s & !full != 0) {
                return Err(MeasureError::Invalid(format!("set {s:#b} is not a subset of Ω")));
            }
        }
        Ok(MeasureStructure {
            omega,
            anchor,
            algebra,
            weights,
            kind,
            bound: None,
        })
    }

    /// Uniform probability on the powerset of `n` points `w1 … wn`.
    pub fn uniform(n: usize) -> Result<Self, MeasureError> {
        Self::from_weights(vec![rational::ratio(1, n.max(1) as i64); n], MeasureKind::Probability)
    }

    /// Powerset structure on points `w1 … wn`.
    pub fn from_weights(weights: Vec<Rational>, kind: MeasureKind) -> Result<Self, MeasureError> {
        let omega = (1..=weights.len()).map(|k| format!("w{k}")).collect();
        Self::new(omega, 0, weights, Algebra::Powerset, kind)
    }

    /// Declares `C` with `‖μ‖ ≤ C`; audited by [`audit_preloeb`].
    pub fn with_bound(mut self, bound: Rational) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn omega(&self) -> &[String] {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn bound(&self) -> Option<&Rational> {
        self.bound.as_ref()
    }

    pub fn full(&self) -> u64 {
        full_mask(self.len())
    }

    /// `μ(A) = Σ_{ω∈A} w(ω)`.
    pub fn measure_of(&self, set: u64) -> Rational {
        self.weights
            .iter()
            .enumerate()
            .filter(|(k, _)| set >> k & 1 == 1)
            .map(|(_, w)| w)
            .sum()
    }

    /// Members of the algebra, in increasing bitmask order for the powerset and
    /// listed order otherwise.
    pub fn sets(&self) -> Result<Vec<u64>, MeasureError> {
        match &self.algebra {
            Algebra::Powerset if self.len() > MAX_ENUMERATED => Err(MeasureError::TooLarge(self.len())),
            Algebra::Powerset => Ok((0..=self.full()).collect()),
            Algebra::Explicit(sets) => Ok(sets.clone()),
        }
    }

    /// `A ↦ μ(A)` over the given sets.
    pub(crate) fn measure_table(&self, sets: &[u64]) -> HashMap<u64, Rational> {
        sets.iter().map(|&s| (s, self.measure_of(s))).collect()
    }

    pub fn contains_set(&self, set: u64) -> bool {
        match &self.algebra {
            Algebra::Powerset => set & !self.full() == 0,
            Algebra::Explicit(sets) => sets.contains(&set),
        }
    }

    /// Minimal nonempty members of the algebra.
    pub fn atoms(&self) -> Result<Vec<u64>, MeasureError> {
        match &self.algebra {
            Algebra::Powerset => Ok((0..self.len()).map(|k| 1u64 << k).collect()),
            Algebra::Explicit(sets) => {
                let mut atoms: Vec<u64> = sets
                    .iter()
                    .copied()
                    .filter(|&a| a != 0 && !sets.iter().any(|&b| b != 0 && b != a && b & !a == 0))
                    .collect();
                atoms.sort_unstable();
                atoms.dedup();
                Ok(atoms)
            }
        }
    }

    /// `‖μ‖`. Fast mode assumes the algebra is closed; audit mode does not.
    pub fn total_variation(&self, mode: TvMode) -> Result<Rational, MeasureError> {
        match mode {
            TvMode::Fast => Ok(self.atoms()?.iter().map(|&a| self.measure_of(a).abs()).sum()),
            TvMode::Audit => {
                let sets = self.sets()?;
                let values = self.measure_table(&sets);
                let mut best = rational::zero();
                for (i, &a) in sets.iter().enumerate() {
                    for &b in &sets[i..] {
                        let meet = values.get(&(a & b)).cloned().unwrap_or_else(|| self.measure_of(a & b));
                        let v = values[&a].abs() + values[&b].abs() - meet.abs();
                        if v > best {
                            best = v;
                        }
                    }
                }
                Ok(best)
            }
        }
    }

    pub fn check_function(&self, f: &LInfFunction) -> Result<(), MeasureError> {
        if f.len() == self.len() {
            Ok(())
        } else {
            Err(MeasureError::DimensionMismatch {
                expected: self.len(),
                got: f.len(),
            })
        }
    }

    pub fn from_json(text: &str) -> Result<Self, MeasureError> {
        let file: MeasureFile = serde_json::from_str(text).map_err(|e| MeasureError::Invalid(e.to_string()))?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MeasureFile::from(self)).expect("measure serializes")
    }

    pub(crate) fn to_file(&self) -> MeasureFile {
        MeasureFile::from(self)
    }

    /// Reads a function as `{"label": value, …}` or `[v1, …]` in the order of `Ω`.
    pub fn function_from_json(&self, value: &serde_json::Value) -> Result<LInfFunction, MeasureError> {
        let invalid = |e: String| MeasureError::Invalid(e);
        let values = match value {
            serde_json::Value::Array(_) => {
                let v: Vec<Text> = serde_json::from_value(value.clone()).map_err(|e| invalid(e.to_string()))?;
                v.into_iter().map(|t| t.0).collect()
            }
            serde_json::Value::Object(_) => {
                let map: BTreeMap<String, Text> =
                    serde_json::from_value(value.clone()).map_err(|e| invalid(e.to_string()))?;
                let mut out = Vec::with_capacity(self.len());
                for w in &self.omega {
                    out.push(map.get(w).ok_or_else(|| invalid(format!("no value for `{w}`")))?.0.clone());
                }
                if map.len() != self.len() {
                    return Err(invalid("function mentions points outside Ω".into()));
                }
                out
            }
            _ => return Err(invalid("a function is a JSON object or array".into())),
        };
        let f = LInfFunction::new(values);
        self.check_function(&f)?;
        Ok(f)
    }

    pub fn set_labels(&self, set: u64) -> Vec<&str> {
        (0..self.len())
            .filter(|k| set >> k & 1 == 1)
            .map(|k| self.omega[k].as_str())
            .collect()
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// `I f = Σ_ω f(ω) μ({ω})`.
pub fn integrate(m: &MeasureStructure, f: &LInfFunction) -> Result<Rational, MeasureError> {
    m.check_function(f)?;
    Ok(f.values().iter().zip(m.weights()).map(|(a, w)| a * w).sum())
}

/// A set `A` of the algebra with `f ≤ v` on `A` and `f ≥ u` off `A`.
pub fn check_measurability(
    m: &MeasureStructure,
    f: &LInfFunction,
    u: &Rational,
    v: &Rational,
) -> Result<Option<u64>, MeasureError> {
    if u >= v {
        return Err(MeasureError::UVOrder);
    }
    m.check_function(f)?;
    let fits = |set: u64| {
        f.values()
            .iter()
            .enumerate()
            .all(|(k, x)| if set >> k & 1 == 1 { x <= v } else { x >= u })
    };
    match m.algebra() {
        Algebra::Powerset => {
            let below: u64 = (0..m.len()).filter(|&k| &f.values()[k] <= v).map(|k| 1u64 << k).sum();
            Ok(Some(below))
        }
        Algebra::Explicit(sets) => Ok(sets.iter().copied().find(|&s| fits(s))),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct MeasureFile {
    omega: Vec<String>,
    anchor: String,
    weights: BTreeMap<String, Text>,
    #[serde(default = "powerset_text")]
    algebra: AlgebraFile,
    kind: MeasureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bound: Option<Text>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum AlgebraFile {
    Named(String),
    Sets(Vec<Vec<String>>),
}

fn powerset_text() -> AlgebraFile {
    AlgebraFile::Named("powerset".into())
}

impl TryFrom<MeasureFile> for MeasureStructure {
    type Error = MeasureError;

    fn try_from(f: MeasureFile) -> Result<Self, MeasureError> {
        let invalid = MeasureError::Invalid;
        let index = |w: &str| {
            f.omega
                .iter()
                .position(|x| x == w)
                .ok_or_else(|| invalid(format!("`{w}` is not a sample point")))
        };
        let anchor = index(&f.anchor)?;
        let mut weights = Vec::with_capacity(f.omega.len());
        for w in &f.omega {
            weights.push(f.weights.get(w).ok_or_else(|| invalid(format!("no weight for `{w}`")))?.0.clone());
        }
        if let Some(extra) = f.weights.keys().find(|k| !f.omega.contains(k)) {
            return Err(invalid(format!("weight for unknown point `{extra}`")));
        }
        let algebra = match &f.algebra {
            AlgebraFile::Named(s) if s == "powerset" => Algebra::Powerset,
            AlgebraFile::Named(s) => return Err(invalid(format!("unknown algebra `{s}`"))),
            AlgebraFile::Sets(sets) => Algebra::Explicit(
                sets.iter()
                    .map(|s| s.iter().map(|w| index(w).map(|k| 1u64 << k)).sum::<Result<u64, _>>())
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        let m = MeasureStructure::new(f.omega.clone(), anchor, weights, algebra, f.kind)?;
        Ok(match f.bound {
            Some(c) => m.with_bound(c.0),
            None => m,
        })
    }
}

impl From<&MeasureStructure> for MeasureFile {
    fn from(m: &MeasureStructure) -> Self {
        MeasureFile {
            omega: m.omega.clone(),
            anchor: m.omega[m.anchor].clone(),
            weights: m.omega.iter().cloned().zip(m.weights.iter().cloned().map(Text)).collect(),
            algebra: match &m.algebra {
                Algebra::Powerset => powerset_text(),
                Algebra::Explicit(sets) => AlgebraFile::Sets(
                    sets.iter()
                        .map(|&s| m.set_labels(s).into_iter().map(str::to_owned).collect())
                        .collect(),
                ),
            },
            kind: m.kind,
            bound: m.bound.clone().map(Text),
        }
    }
}
