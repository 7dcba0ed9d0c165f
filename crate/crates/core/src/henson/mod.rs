//! Positive bounded formulas over finite many-sorted metric structures.
//!
//! Formulas are built from atoms `t ≤ r`, `t ≥ r`, the connectives `∧`, `∨`
//! and the bounded quantifiers `∃_r x` (closed ball around the sort's anchor)
//! and `∀_r x` (open ball). Evaluation is exact.
//!
//! Approximate satisfaction `⊨≈` quantifies over all approximations of a
//! formula. On a finite structure only finitely many rationals matter (atom
//! values, distances, bounds), so a single relaxation by half the least gap
//! between them decides it; see [`approx_satisfies`].

mod approx;
mod parser;
mod semantics;
mod structure;
mod syntax;
mod xi;

pub use approx::{approx_satisfies, critical_values, gap, is_approximation, relax, weak_negation};
pub use parser::parse_formula;
pub use semantics::{eval_term, satisfies, Assignment};
pub use structure::{FiniteStructure, FunctionData, SortData, Value};
pub use syntax::{Formula, Func, Signature, Sort, Term, REAL_SORT};
pub use xi::{net_structure, wneg_xi, xi_e, xi_formula, NetSymbols};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("syntax error at byte {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("unknown symbol: {0}")]
    UnknownSymbol(String),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("quantifier radius must be positive: {0}")]
    NonpositiveRadius(String),
    #[error("cannot quantify `{0}` over the real sort")]
    RealQuantifier(String),
    #[error("variable `{0}` has no value")]
    UnassignedVariable(String),
    #[error("relaxation δ must be positive")]
    NonpositiveDelta,
    #[error("rate E is empty")]
    EmptyRate,
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("sampling: {0}")]
    Sampling(String),
}

impl LogicError {
    pub(crate) fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        LogicError::SyntaxError { pos, msg: msg.into() }
    }
}
