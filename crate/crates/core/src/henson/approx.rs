use std::collections::BTreeSet;

use num::Signed;

use super::semantics::{eval_term, satisfies, Assignment};
use super::structure::{FiniteStructure, Value};
use super::syntax::{Formula, Sort};
use super::LogicError;
use crate::rational::{self, Rational};

/// Whether `psi` is an approximation of `phi`: same shape and terms, every
/// `≤` bound strictly raised, every `≥` bound strictly lowered, every `∃`
/// radius strictly raised, every `∀` radius strictly lowered (and positive).
pub fn is_approximation(phi: &Formula, psi: &Formula) -> bool {
    match (phi, psi) {
        (Formula::Le(t, r), Formula::Le(u, s)) => t == u && s > r,
        (Formula::Ge(t, r), Formula::Ge(u, s)) => t == u && s < r,
        (Formula::And(a, b), Formula::And(c, d)) | (Formula::Or(a, b), Formula::Or(c, d)) => {
            is_approximation(a, c) && is_approximation(b, d)
        }
        (
            Formula::Exists {
                radius: r,
                var: x,
                sort: s,
                body: a,
            },
            Formula::Exists {
                radius: r2,
                var: y,
                sort: s2,
                body: b,
            },
        ) => x == y && s == s2 && r2 > r && is_approximation(a, b),
        (
            Formula::Forall {
                radius: r,
                var: x,
                sort: s,
                body: a,
            },
            Formula::Forall {
                radius: r2,
                var: y,
                sort: s2,
                body: b,
            },
        ) => x == y && s == s2 && r2 < r && r2.is_positive() && is_approximation(a, b),
        _ => false,
    }
}

/// The approximation with every bound moved by `δ`; `∀` radii become
/// `max(r − δ, r/2)` so they stay positive.
pub fn relax(phi: &Formula, delta: &Rational) -> Result<Formula, LogicError> {
    if !delta.is_positive() {
        return Err(LogicError::NonpositiveDelta);
    }
    Ok(relax_by(phi, delta))
}

fn relax_by(phi: &Formula, delta: &Rational) -> Formula {
    match phi {
        Formula::Le(t, r) => Formula::Le(t.clone(), r + delta),
        Formula::Ge(t, r) => Formula::Ge(t.clone(), r - delta),
        Formula::And(a, b) => Formula::and(relax_by(a, delta), relax_by(b, delta)),
        Formula::Or(a, b) => Formula::or(relax_by(a, delta), relax_by(b, delta)),
        Formula::Exists {
            radius,
            var,
            sort,
            body,
        } => Formula::exists(radius + delta, var.clone(), sort.clone(), relax_by(body, delta)),
        Formula::Forall {
            radius,
            var,
            sort,
            body,
        } => {
            let shrunk = radius - delta;
            let floor = rational::half(radius);
            Formula::forall(shrunk.max(floor), var.clone(), sort.clone(), relax_by(body, delta))
        }
    }
}

/// The weak negation `¬w`: swaps `≤`/`≥`, `∧`/`∨`, `∀_r`/`∃_r` throughout.
pub fn weak_negation(phi: &Formula) -> Formula {
    match phi {
        Formula::Le(t, r) => Formula::Ge(t.clone(), r.clone()),
        Formula::Ge(t, r) => Formula::Le(t.clone(), r.clone()),
        Formula::And(a, b) => Formula::or(weak_negation(a), weak_negation(b)),
        Formula::Or(a, b) => Formula::and(weak_negation(a), weak_negation(b)),
        Formula::Exists {
            radius,
            var,
            sort,
            body,
        } => Formula::forall(radius.clone(), var.clone(), sort.clone(), weak_negation(body)),
        Formula::Forall {
            radius,
            var,
            sort,
            body,
        } => Formula::exists(radius.clone(), var.clone(), sort.clone(), weak_negation(body)),
    }
}

/// Every rational the truth of `φ` and its relaxations can depend on: atom
/// values under every assignment of the bound variables, every metric entry,
/// `0`, and every bound and radius of `φ`.
pub fn critical_values(m: &FiniteStructure, phi: &Formula, a: &Assignment) -> Result<BTreeSet<Rational>, LogicError> {
    let mut out: BTreeSet<Rational> = m.distances().cloned().collect();
    out.insert(rational::zero());
    out.extend(phi.constants().into_iter().cloned());
    let mut a = a.clone();
    collect_atom_values(m, phi, &mut a, &mut out)?;
    Ok(out)
}

fn collect_atom_values(
    m: &FiniteStructure,
    phi: &Formula,
    a: &mut Assignment,
    out: &mut BTreeSet<Rational>,
) -> Result<(), LogicError> {
    match phi {
        Formula::Le(t, _) | Formula::Ge(t, _) => match eval_term(m, t, a)? {
            Value::Real(q) => {
                out.insert(q);
                Ok(())
            }
            Value::Point(..) => Err(LogicError::SortMismatch(format!("atom term `{t}` is not real-valued"))),
        },
        Formula::And(x, y) | Formula::Or(x, y) => {
            collect_atom_values(m, x, a, out)?;
            collect_atom_values(m, y, a, out)
        }
        Formula::Exists { var, sort, body, .. } | Formula::Forall { var, sort, body, .. } => {
            let name = match sort {
                Sort::Real => return Err(LogicError::RealQuantifier(var.clone())),
                Sort::Base(s) => s,
            };
            let k = m
                .sort_index(name)
                .ok_or_else(|| LogicError::SortMismatch(format!("structure has no sort `{name}`")))?;
            let saved = a.remove(var);
            let mut result = Ok(());
            for p in 0..m.sorts()[k].points.len() {
                a.insert(var.clone(), Value::Point(k, p));
                result = collect_atom_values(m, body, a, out);
                if result.is_err() {
                    break;
                }
            }
            match saved {
                Some(v) => a.insert(var.clone(), v),
                None => a.remove(var),
            };
            result
        }
    }
}

/// The least positive difference between critical values (1 if there is none).
/// Satisfaction of `relax(φ, δ)` does not depend on `δ ∈ (0, gap)`.
pub fn gap(m: &FiniteStructure, phi: &Formula, a: &Assignment) -> Result<Rational, LogicError> {
    let values = critical_values(m, phi, a)?;
    let v: Vec<&Rational> = values.iter().collect();
    Ok(v.windows(2)
        .map(|w| w[1] - w[0])
        .min()
        .unwrap_or_else(rational::one))
}

/// Approximate satisfaction `M ⊨≈ φ[a]`: `M` satisfies every approximation of
/// `φ`. Decided as `M ⊨ relax(φ, g/2)` with `g` the instance gap; every
/// approximation is implied by `relax(φ, δ)` for small `δ`, and all
/// `δ < g` agree.
pub fn approx_satisfies(m: &FiniteStructure, phi: &Formula, a: &Assignment) -> Result<bool, LogicError> {
    let g = gap(m, phi, a)?;
    satisfies(m, &relax_by(phi, &rational::half(&g)), a)
}
