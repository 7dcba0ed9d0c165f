//! Dominated convergence on finite measure structures.
//!
//! A family `φ: ℕ → L∞(Ω)` is stored one ω-slice at a time, each slice a
//! tail-structured scalar sequence. Slices are brought to a common tail start
//! `T` (the latest one) and period `p` (the lcm) before integrating, so the
//! integral sequence `j ↦ I(φ_j)` is tail-structured as well.

use std::collections::BTreeMap;

use num::integer::lcm;
use num::Signed;
use rayon::prelude::*;
use serde_json::Value;

use crate::directed::{Index, Sampling};
use crate::formats::{self, FormatError};
use crate::measure::{integrate, LInfFunction, MeasureError, MeasureStructure, TvMode};
use crate::netcore::{
    brute_min_uniform_rate, check_rate, osc_total_exact, MinRate, NetError, RateSet, RateSpec, SequenceSpec, Tail,
};
use crate::rational::{self, Rational, Text};

/// Largest common period accepted when aligning slices.
pub const MAX_PERIOD: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DctError {
    #[error("slices cannot share a tail: {0}")]
    IncoherentTails(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("family {family}{}: {reason}", slice.map(|s| format!(", slice {s}")).unwrap_or_default())]
    PreconditionViolated {
        family: usize,
        slice: Option<usize>,
        reason: String,
    },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Format(#[from] FormatError),
}

/// `φ_j(ω)` for `j ∈ ℕ`, `ω ∈ Ω`, with a declared bound `‖φ‖ ≥ sup_j ‖φ_j‖`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedFamily {
    measure: MeasureStructure,
    slices: Vec<SequenceSpec>,
    norm_phi: Rational,
}

impl DirectedFamily {
    pub fn new(measure: MeasureStructure, slices: Vec<SequenceSpec>, norm_phi: Rational) -> Result<Self, DctError> {
        if slices.len() != measure.len() {
            return Err(DctError::InvalidFamily(format!(
                "{} slices for |Ω| = {}",
                slices.len(),
                measure.len()
            )));
        }
        if let Some(k) = slices.iter().position(|s| s.dim() != 1) {
            return Err(DctError::InvalidFamily(format!("slice {k} is not real-valued")));
        }
        let sup = slices
            .iter()
            .flat_map(|s| s.prefix().iter().map(|p| p.0[0].abs()))
            .max()
            .unwrap_or_else(rational::zero);
        if sup > norm_phi {
            return Err(DctError::InvalidFamily(format!(
                "‖φ‖ = {} exceeds the declared {}",
                rational::format(&sup),
                rational::format(&norm_phi)
            )));
        }
        Ok(DirectedFamily {
            measure,
            slices,
            norm_phi,
        })
    }

    /// Declares `‖φ‖` as the actual sup.
    pub fn tight(measure: MeasureStructure, slices: Vec<SequenceSpec>) -> Result<Self, DctError> {
        let sup = slices
            .iter()
            .flat_map(|s| s.prefix().iter().filter_map(|p| p.as_scalar().map(|q| q.abs())))
            .max()
            .unwrap_or_else(rational::zero);
        Self::new(measure, slices, sup)
    }

    pub fn measure(&self) -> &MeasureStructure {
        &self.measure
    }

    pub fn slices(&self) -> &[SequenceSpec] {
        &self.slices
    }

    pub fn norm_phi(&self) -> &Rational {
        &self.norm_phi
    }

    /// `φ_j` as a function on `Ω`.
    pub fn at(&self, j: Index) -> LInfFunction {
        LInfFunction::new(
            self.slices
                .iter()
                .map(|s| s.scalar_value(j).expect("scalar slices").clone())
                .collect(),
        )
    }

    /// Common `(T, p)` for all slices.
    pub fn common_tail(&self) -> Result<(Index, usize), DctError> {
        let start = self.slices.iter().map(SequenceSpec::tail_start).max().unwrap_or(0);
        let mut period = 1usize;
        for s in &self.slices {
            period = lcm(period, s.period());
            if period > MAX_PERIOD {
                return Err(DctError::IncoherentTails(format!(
                    "common period exceeds {MAX_PERIOD}"
                )));
            }
        }
        Ok((start, period))
    }

    /// The same weights scaled by `λ`.
    pub fn scale_measure(&self, lambda: &Rational) -> Result<Self, DctError> {
        let m = &self.measure;
        let weights = m.weights().iter().map(|w| w * lambda).collect();
        let scaled = MeasureStructure::new(m.omega().to_vec(), m.anchor(), weights, m.algebra().clone(), m.kind())?;
        Ok(DirectedFamily {
            measure: scaled,
            slices: self.slices.clone(),
            norm_phi: self.norm_phi.clone(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self, DctError> {
        let v: Value = serde_json::from_str(text).map_err(|e| DctError::InvalidFamily(e.to_string()))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self, DctError> {
        let invalid = |e: String| DctError::InvalidFamily(e);
        let measure_json = v.get("measure").ok_or_else(|| invalid("missing \"measure\"".into()))?;
        let measure = MeasureStructure::from_json(&measure_json.to_string())?;
        let slices = v
            .get("slices")
            .and_then(Value::as_object)
            .ok_or_else(|| invalid("\"slices\" must map each ω to a sequence".into()))?;
        let mut ordered = Vec::with_capacity(measure.len());
        for w in measure.omega() {
            let s = slices.get(w).ok_or_else(|| invalid(format!("no slice for `{w}`")))?;
            ordered.push(formats::sequence_from_value(s)?);
        }
        if slices.len() != measure.len() {
            return Err(invalid("slices mention points outside Ω".into()));
        }
        match v.get("norm_phi") {
            Some(n) => {
                let n: Text = serde_json::from_value(n.clone()).map_err(|e| invalid(e.to_string()))?;
                Self::new(measure, ordered, n.0)
            }
            None => Self::tight(measure, ordered),
        }
    }

    pub fn to_value(&self) -> Value {
        let slices: serde_json::Map<String, Value> = self
            .measure
            .omega()
            .iter()
            .zip(&self.slices)
            .map(|(w, s)| (w.clone(), formats::sequence_to_value(s)))
            .collect();
        serde_json::json!({
            "measure": serde_json::to_value(self.measure.to_file()).expect("measure serializes"),
            "slices": slices,
            "norm_phi": rational::format(&self.norm_phi),
        })
    }
}

/// `j ↦ I(φ_j)`, with tail start `T = max T_ω` and period `lcm p_ω`.
pub fn integral_sequence(fam: &DirectedFamily) -> Result<SequenceSpec, DctError> {
    let (start, period) = fam.common_tail()?;
    let aligned = fam
        .slices
        .iter()
        .map(|s| s.relayout(start, period))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| DctError::IncoherentTails(e.to_string()))?;
    let values = (0..start + period)
        .map(|j| {
            let phi = LInfFunction::new(aligned.iter().map(|s| s.scalar_value(j).expect("scalar").clone()).collect());
            integrate(&fam.measure, &phi)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let tail = if period == 1 { Tail::Constant } else { Tail::Periodic(period) };
    Ok(SequenceSpec::scalar(values, tail)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DctCheck {
    pub holds: bool,
    /// `osc(Iφ•)`.
    pub lhs: Rational,
    /// `‖μ‖ · max_ω osc(φ•(ω))`.
    pub rhs: Rational,
}

pub fn dct_inequality_check(fam: &DirectedFamily) -> Result<DctCheck, DctError> {
    let lhs = osc_total_exact(&integral_sequence(fam)?);
    let worst = fam
        .slices
        .iter()
        .map(osc_total_exact)
        .max()
        .unwrap_or_else(rational::zero);
    let rhs = fam.measure.total_variation(TvMode::Fast)? * worst;
    Ok(DctCheck {
        holds: lhs <= rhs,
        lhs,
        rhs,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DctSearch {
    /// `Ẽ_ε` for every grid `ε > r·s`, with threshold `r·s`.
    Found(RateSpec),
    /// The integral sequence of `family` has no witness up to the horizon at `ε`.
    Infeasible { eps: Rational, family: usize },
}

/// Searches a uniform rate `Ẽ` for the integral sequences of a finite class.
///
/// Every family must satisfy `‖φ‖ ≤ 1`, `‖μ‖ ≤ s`, and each slice must have
/// a witness in `E^r_ε` for every `ε > r` at which `E^r` is defined (or every
/// grid `ε > r` for a single-set rate). `Ẽ_ε` is the least prefix set
/// `{0..m}`, `m ≤ horizon`, that works for the whole class.
pub fn metastable_dct_search(
    class: &[DirectedFamily],
    r: &Rational,
    s: &Rational,
    eta: &Sampling,
    rate_r: &RateSpec,
    eps_grid: &[Rational],
    horizon: Index,
) -> Result<DctSearch, DctError> {
    let slice_eps: Vec<Rational> = match rate_r.epsilons() {
        v if v.is_empty() => eps_grid.iter().filter(|e| *e > r).cloned().collect(),
        v => v.into_iter().filter(|e| e > r).collect(),
    };
    let violation = class
        .par_iter()
        .enumerate()
        .map(|(k, fam)| precondition(k, fam, s, eta, rate_r, &slice_eps))
        .collect::<Vec<_>>();
    if let Some(err) = violation.into_iter().find_map(Result::err) {
        return Err(err);
    }
    let integrals = class
        .par_iter()
        .map(integral_sequence)
        .collect::<Result<Vec<_>, _>>()?;
    let threshold = r * s;
    let mut grid: Vec<&Rational> = eps_grid.iter().filter(|e| **e > threshold).collect();
    grid.sort();
    grid.dedup();
    let mut found = BTreeMap::new();
    for eps in grid {
        match brute_min_uniform_rate(&integrals, eps, eta, horizon)? {
            MinRate::Found(e) => {
                found.insert(eps.clone(), e);
            }
            MinRate::Infeasible { index } => {
                return Ok(DctSearch::Infeasible {
                    eps: eps.clone(),
                    family: index,
                })
            }
        }
    }
    if found.is_empty() {
        return Err(DctError::InvalidFamily("no grid ε exceeds r·s".into()));
    }
    Ok(DctSearch::Found(RateSpec::per_epsilon(found, threshold)?))
}

fn precondition(
    k: usize,
    fam: &DirectedFamily,
    s: &Rational,
    eta: &Sampling,
    rate_r: &RateSpec,
    slice_eps: &[Rational],
) -> Result<(), DctError> {
    let violated = |slice: Option<usize>, reason: String| DctError::PreconditionViolated {
        family: k,
        slice,
        reason,
    };
    if fam.norm_phi > rational::one() {
        return Err(violated(None, format!("‖φ‖ = {} > 1", rational::format(&fam.norm_phi))));
    }
    let tv = fam.measure.total_variation(TvMode::Fast)?;
    if &tv > s {
        return Err(violated(
            None,
            format!("‖μ‖ = {} > s = {}", rational::format(&tv), rational::format(s)),
        ));
    }
    for eps in slice_eps {
        let e: &RateSet = rate_r
            .rate_for(eps, None)
            .ok_or_else(|| violated(None, format!("E^r has no set at ε = {}", rational::format(eps))))?;
        for (w, slice) in fam.slices.iter().enumerate() {
            if !check_rate(slice, eps, eta, e)? {
                return Err(violated(
                    Some(w),
                    format!("no witness in E^r at ε = {}", rational::format(eps)),
                ));
            }
        }
    }
    Ok(())
}
