use std::collections::BTreeMap;

use num::Signed;

use super::structure::{FiniteStructure, Value};
use super::syntax::{Formula, Func, Sort, Term};
use super::LogicError;
use crate::rational::Rational;

/// Values for free variables, by name.
pub type Assignment = BTreeMap<String, Value>;

fn sort_index(m: &FiniteStructure, name: &str) -> Result<usize, LogicError> {
    m.sort_index(name)
        .ok_or_else(|| LogicError::SortMismatch(format!("structure has no sort `{name}`")))
}

fn real(v: Value, what: &Func) -> Result<Rational, LogicError> {
    match v {
        Value::Real(q) => Ok(q),
        Value::Point(..) => Err(LogicError::SortMismatch(format!("`{}` expects reals", what.symbol()))),
    }
}

pub fn eval_term(m: &FiniteStructure, t: &Term, a: &Assignment) -> Result<Value, LogicError> {
    match t {
        Term::Var { name, sort } => {
            let v = a.get(name).ok_or_else(|| LogicError::UnassignedVariable(name.clone()))?;
            let fits = match (sort, v) {
                (Sort::Real, Value::Real(_)) => true,
                (Sort::Base(s), Value::Point(k, p)) => {
                    m.sorts().get(*k).is_some_and(|d| &d.name == s && *p < d.points.len())
                }
                _ => false,
            };
            if !fits {
                return Err(LogicError::SortMismatch(format!("`{name}` is assigned a value outside sort {sort}")));
            }
            Ok(v.clone())
        }
        Term::Real(q) => Ok(Value::Real(q.clone())),
        Term::Const { name, sort } => {
            let k = sort_index(m, sort.name())?;
            let p = m.sorts()[k]
                .points
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| LogicError::UnknownSymbol(format!("constant `{name}`")))?;
            Ok(Value::Point(k, p))
        }
        Term::App { func, args } => {
            let vals = args.iter().map(|x| eval_term(m, x, a)).collect::<Result<Vec<_>, _>>()?;
            apply(m, func, vals)
        }
    }
}

fn apply(m: &FiniteStructure, func: &Func, vals: Vec<Value>) -> Result<Value, LogicError> {
    if let Func::Metric(s) = func {
        let k = sort_index(m, s)?;
        return match vals.as_slice() {
            [Value::Point(k1, p), Value::Point(k2, q)] if *k1 == k && *k2 == k => {
                Ok(Value::Real(m.dist(k, *p, *q).clone()))
            }
            _ => Err(LogicError::SortMismatch(format!("`d` expects two points of sort {s}"))),
        };
    }
    if let Func::User(name) = func {
        let f = m
            .functions()
            .get(name)
            .ok_or_else(|| LogicError::UnknownSymbol(format!("function `{name}`")))?;
        let mut key = Vec::with_capacity(vals.len());
        for (v, &k) in vals.iter().zip(&f.domain) {
            match v {
                Value::Point(vk, p) if *vk == k => key.push(*p),
                _ => return Err(LogicError::SortMismatch(format!("bad argument to `{name}`"))),
            }
        }
        return f
            .table
            .get(&key)
            .cloned()
            .ok_or_else(|| LogicError::SortMismatch(format!("bad arity for `{name}`")));
    }
    let mut it = vals.into_iter();
    let mut next = || {
        it.next()
            .ok_or_else(|| LogicError::SortMismatch(format!("too few arguments to `{}`", func.symbol())))
            .and_then(|v| real(v, func))
    };
    let x = next()?;
    let q = match func {
        Func::Abs => x.abs(),
        Func::Add => x + next()?,
        Func::Sub => x - next()?,
        Func::Mul => x * next()?,
        Func::Min => x.min(next()?),
        Func::Max => x.max(next()?),
        Func::Metric(_) | Func::User(_) => unreachable!("handled above"),
    };
    Ok(Value::Real(q))
}

fn eval_real(m: &FiniteStructure, t: &Term, a: &Assignment) -> Result<Rational, LogicError> {
    match eval_term(m, t, a)? {
        Value::Real(q) => Ok(q),
        Value::Point(..) => Err(LogicError::SortMismatch(format!("atom term `{t}` is not real-valued"))),
    }
}

/// Points of the quantified sort in the ball around its anchor: closed for
/// `∃`, open for `∀`.
pub(crate) fn ball(
    m: &FiniteStructure,
    var: &str,
    sort: &Sort,
    radius: &Rational,
    closed: bool,
) -> Result<Vec<usize>, LogicError> {
    let name = match sort {
        Sort::Real => return Err(LogicError::RealQuantifier(var.to_owned())),
        Sort::Base(s) => s,
    };
    let k = sort_index(m, name)?;
    Ok((0..m.sorts()[k].points.len())
        .filter(|&p| {
            let d = m.dist_to_anchor(k, p);
            if closed {
                d <= radius
            } else {
                d < radius
            }
        })
        .collect())
}

/// Discrete satisfaction `M ⊨ φ[a]`.
pub fn satisfies(m: &FiniteStructure, phi: &Formula, a: &Assignment) -> Result<bool, LogicError> {
    let mut a = a.clone();
    sat(m, phi, &mut a)
}

fn sat(m: &FiniteStructure, phi: &Formula, a: &mut Assignment) -> Result<bool, LogicError> {
    match phi {
        Formula::Le(t, r) => Ok(&eval_real(m, t, a)? <= r),
        Formula::Ge(t, r) => Ok(&eval_real(m, t, a)? >= r),
        Formula::And(x, y) => Ok(sat(m, x, a)? && sat(m, y, a)?),
        Formula::Or(x, y) => Ok(sat(m, x, a)? || sat(m, y, a)?),
        Formula::Exists {
            radius,
            var,
            sort,
            body,
        } => quantify(m, var, sort, ball(m, var, sort, radius, true)?, body, a, true),
        Formula::Forall {
            radius,
            var,
            sort,
            body,
        } => quantify(m, var, sort, ball(m, var, sort, radius, false)?, body, a, false),
    }
}

fn quantify(
    m: &FiniteStructure,
    var: &str,
    sort: &Sort,
    points: Vec<usize>,
    body: &Formula,
    a: &mut Assignment,
    exists: bool,
) -> Result<bool, LogicError> {
    let k = sort_index(m, sort.name())?;
    let saved = a.remove(var);
    let mut verdict = !exists;
    for p in points {
        a.insert(var.to_owned(), Value::Point(k, p));
        let r = sat(m, body, a);
        match r {
            Ok(b) if b == exists => {
                verdict = exists;
                break;
            }
            Ok(_) => {}
            Err(e) => {
                restore(a, var, saved);
                return Err(e);
            }
        }
    }
    restore(a, var, saved);
    Ok(verdict)
}

fn restore(a: &mut Assignment, var: &str, saved: Option<Value>) {
    match saved {
        Some(v) => a.insert(var.to_owned(), v),
        None => a.remove(var),
    };
}
