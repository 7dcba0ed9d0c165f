//! Nets over ℕ in metric spaces: oscillation, metastability witnesses, and
//! rates of metastability.
//!
//! Everything that computes a limit quantity (`osc`, `osc_η`) exactly needs
//! a [`SequenceSpec`] with a declared tail and, for `osc_η`, a sampling with
//! an affine tail. Everything else works on any [`Net`] with an explicit
//! finite budget.
//!
//! Over a finite directed set every net has oscillation 0 (the top element
//! is a witness for every sampling), so only ℕ-indexed nets are modelled.

mod oscillation;
mod rate;
mod sequence;

pub use oscillation::{
    eps_cauchy_exact, exactness_horizon, metastable_witness, osc_eta_exact, osc_eta_upper,
    osc_segment, osc_total_exact, FlaggedBound,
};
pub use rate::{
    brute_min_uniform_rate, check_rate, first_witness_in, monotone_rate_bound,
    monotone_uniform_rate, prefix_rate, uniform_rate_audit, AuditOutcome, MinRate, RateKind,
    RateSet, RateSpec,
};
pub use sequence::{FnNet, Net, NumericMode, Point, SequenceSpec, Tail};

use crate::directed::{DirectedError, Index};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetError {
    #[error("sequence prefix is empty")]
    EmptyPrefix,
    #[error("tail period must be at least 1")]
    ZeroPeriod,
    #[error("tail window of length {period} does not fit in a prefix of length {len}")]
    TailLongerThanPrefix { period: usize, len: usize },
    #[error("point {index} has a different dimension than point 0")]
    DimensionMismatch { index: usize },
    #[error("value {index} is not a finite number")]
    NonFinite { index: usize },
    #[error("declared bound {bound} is violated: {detail}")]
    BoundViolated { bound: String, detail: String },
    #[error("cannot relayout tail (T = {tail_start}, p = {own_period}) to start {start} with period {period}")]
    Relayout {
        start: Index,
        period: usize,
        tail_start: Index,
        own_period: usize,
    },
    #[error("rate E is empty; no net has a witness in the empty set")]
    EmptyRate,
    #[error("epsilon must be positive")]
    NonpositiveEpsilon,
    #[error("epsilon must be nonnegative")]
    NegativeEpsilon,
    #[error("exact osc_η needs a sampling with a declared affine tail F(i) = i + w; use osc_eta_upper")]
    UnsupportedSampling,
    #[error("sampling must be over ℕ")]
    NotOverNat,
    #[error("invalid rate specification: {0}")]
    InvalidRate(String),
    #[error(transparent)]
    Directed(#[from] DirectedError),
}
