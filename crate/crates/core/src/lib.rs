//! Metastable convergence toolkit.
//!
//! - [`directed`]: directed sets and samplings `η = (η_i)`.
//! - [`netcore`]: oscillation, metastability witnesses, rates of metastability.
//! - [`henson`]: positive bounded formulas over finite metric structures,
//!   discrete and approximate satisfaction.
//! - [`measure`]: finite (signed) measure structures, integration, axiom audits.
//! - [`dct`]: dominated convergence on finite measure structures.
//! - [`gen`]: seeded instance generators.
//! - [`formats`]: JSON and text formats shared with the command line.
//!
//! All exact computations use arbitrary-precision rationals ([`rational::Rational`]).

pub mod dct;
pub mod directed;
pub mod formats;
pub mod gen;
pub mod henson;
pub mod measure;
pub mod netcore;
pub mod rational;

pub use directed::{
    make_finite_directed, make_nat, sampling_from_function, validate_sampling, DirectedSet,
    IncreasingFn, Index, Sampling,
};
pub use netcore::{Net, Point, RateSet, RateSpec, SequenceSpec, Tail};
pub use dct::{dct_inequality_check, integral_sequence, metastable_dct_search, DctSearch, DirectedFamily};
pub use measure::{integrate, LInfFunction, MeasureKind, MeasureStructure};
pub use rational::Rational;
