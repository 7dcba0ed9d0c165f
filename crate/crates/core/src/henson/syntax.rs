use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::rational::{self, Rational};

/// Name of the distinguished real sort in concrete syntax.
pub const REAL_SORT: &str = "R";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Real,
    Base(String),
}

impl Sort {
    pub fn base(name: impl Into<String>) -> Self {
        Sort::Base(name.into())
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Sort::Real)
    }

    pub fn name(&self) -> &str {
        match self {
            Sort::Real => REAL_SORT,
            Sort::Base(s) => s,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Function symbols. `Metric(s)` is `d_s`; the arithmetic symbols live on the real sort.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Func {
    Metric(String),
    Add,
    Sub,
    Mul,
    Abs,
    Min,
    Max,
    User(String),
}

impl Func {
    pub fn symbol(&self) -> &str {
        match self {
            Func::Metric(_) => "d",
            Func::Add => "add",
            Func::Sub => "sub",
            Func::Mul => "mul",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::User(name) => name,
        }
    }

    pub(crate) fn builtin(name: &str) -> Option<Func> {
        Some(match name {
            "add" => Func::Add,
            "sub" => Func::Sub,
            "mul" => Func::Mul,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub(crate) fn builtin_arity(&self) -> Option<usize> {
        match self {
            Func::Abs => Some(1),
            Func::Metric(_) | Func::Add | Func::Sub | Func::Mul | Func::Min | Func::Max => Some(2),
            Func::User(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var { name: String, sort: Sort },
    /// A rational literal of the real sort.
    Real(Rational),
    /// A named point of a base sort.
    Const { name: String, sort: Sort },
    App { func: Func, args: Vec<Term> },
}

impl Term {
    pub fn var(name: impl Into<String>, sort: Sort) -> Self {
        Term::Var {
            name: name.into(),
            sort,
        }
    }

    pub fn constant(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Term::Const {
            name: name.into(),
            sort: Sort::Base(sort.into()),
        }
    }

    pub fn real(q: Rational) -> Self {
        Term::Real(q)
    }

    pub fn metric(sort: impl Into<String>, a: Term, b: Term) -> Self {
        Term::App {
            func: Func::Metric(sort.into()),
            args: vec![a, b],
        }
    }

    pub fn app(func: Func, args: Vec<Term>) -> Self {
        Term::App { func, args }
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var { name, .. } => {
                out.insert(name.clone());
            }
            Term::App { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Real(_) | Term::Const { .. } => {}
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var { name, .. } | Term::Const { name, .. } => f.write_str(name),
            Term::Real(q) => f.write_str(&rational::format(q)),
            Term::App { func, args } => {
                write!(f, "{}(", func.symbol())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Positive bounded formulas. `Exists` ranges over the closed ball
/// `d(x, anchor) ≤ radius`, `Forall` over the open ball `d(x, anchor) < radius`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Le(Term, Rational),
    Ge(Term, Rational),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists {
        radius: Rational,
        var: String,
        sort: Sort,
        body: Box<Formula>,
    },
    Forall {
        radius: Rational,
        var: String,
        sort: Sort,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn le(t: Term, r: Rational) -> Self {
        Formula::Le(t, r)
    }

    pub fn ge(t: Term, r: Rational) -> Self {
        Formula::Ge(t, r)
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(radius: Rational, var: impl Into<String>, sort: Sort, body: Formula) -> Self {
        Formula::Exists {
            radius,
            var: var.into(),
            sort,
            body: Box::new(body),
        }
    }

    pub fn forall(radius: Rational, var: impl Into<String>, sort: Sort, body: Formula) -> Self {
        Formula::Forall {
            radius,
            var: var.into(),
            sort,
            body: Box::new(body),
        }
    }

    /// Right-nested conjunction; `None` for an empty list.
    pub fn conjunction(parts: Vec<Formula>) -> Option<Formula> {
        fold_right(parts, Formula::and)
    }

    pub fn disjunction(parts: Vec<Formula>) -> Option<Formula> {
        fold_right(parts, Formula::or)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Le(t, _) | Formula::Ge(t, _) => {
                let mut vs = BTreeSet::new();
                t.collect_vars(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists { var, body, .. } | Formula::Forall { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every atom bound and quantifier radius, in tree order.
    pub fn constants(&self) -> Vec<&Rational> {
        let mut out = Vec::new();
        self.visit(&mut |node| match node {
            Formula::Le(_, r) | Formula::Ge(_, r) => out.push(r),
            Formula::Exists { radius, .. } | Formula::Forall { radius, .. } => out.push(radius),
            _ => {}
        });
        out
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Le(..) | Formula::Ge(..) => 0,
            Formula::And(a, b) | Formula::Or(a, b) => a.quantifier_depth().max(b.quantifier_depth()),
            Formula::Exists { body, .. } | Formula::Forall { body, .. } => 1 + body.quantifier_depth(),
        }
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Le(..) | Formula::Ge(..) => {}
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Exists { body, .. } | Formula::Forall { body, .. } => body.visit(f),
        }
    }
}

fn fold_right(parts: Vec<Formula>, join: fn(Formula, Formula) -> Formula) -> Option<Formula> {
    let mut it = parts.into_iter().rev();
    let last = it.next()?;
    Some(it.fold(last, |acc, p| join(p, acc)))
}

/// Concrete syntax accepted by [`super::parse_formula`]. Quantified variables
/// always carry their sort, so printing then parsing gives back the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Le(t, r) => write!(f, "{t} <= {}", rational::format(r)),
            Formula::Ge(t, r) => write!(f, "{t} >= {}", rational::format(r)),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Exists {
                radius,
                var,
                sort,
                body,
            } => write!(f, "E {} {var}:{sort}. {body}", rational::format(radius)),
            Formula::Forall {
                radius,
                var,
                sort,
                body,
            } => write!(f, "A {} {var}:{sort}. {body}", rational::format(radius)),
        }
    }
}

/// Sorts, point constants, and function symbols available to formulas.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    sorts: Vec<String>,
    anchors: BTreeMap<String, String>,
    constants: BTreeMap<String, String>,
    functions: BTreeMap<String, (Vec<Sort>, Sort)>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sorts(&self) -> &[String] {
        &self.sorts
    }

    pub fn has_sort(&self, name: &str) -> bool {
        self.sorts.iter().any(|s| s == name)
    }

    /// The anchor constant of a base sort.
    pub fn anchor(&self, sort: &str) -> Option<&str> {
        self.anchors.get(sort).map(String::as_str)
    }

    /// The sort of a point constant.
    pub fn constant_sort(&self, name: &str) -> Option<&str> {
        self.constants.get(name).map(String::as_str)
    }

    pub fn function(&self, name: &str) -> Option<&(Vec<Sort>, Sort)> {
        self.functions.get(name)
    }

    pub fn functions(&self) -> impl Iterator<Item = (&String, &(Vec<Sort>, Sort))> {
        self.functions.iter()
    }

    pub(crate) fn add_sort(&mut self, name: &str, anchor: &str) -> Result<(), String> {
        if name == REAL_SORT || self.has_sort(name) {
            return Err(format!("sort name `{name}` is reserved or already used"));
        }
        self.sorts.push(name.to_owned());
        self.anchors.insert(name.to_owned(), anchor.to_owned());
        Ok(())
    }

    pub(crate) fn add_constant(&mut self, name: &str, sort: &str) -> Result<(), String> {
        self.check_fresh(name)?;
        self.constants.insert(name.to_owned(), sort.to_owned());
        Ok(())
    }

    pub(crate) fn add_function(&mut self, name: &str, domain: Vec<Sort>, range: Sort) -> Result<(), String> {
        self.check_fresh(name)?;
        self.functions.insert(name.to_owned(), (domain, range));
        Ok(())
    }

    fn check_fresh(&self, name: &str) -> Result<(), String> {
        let reserved = name == "d" || name == "E" || name == "A" || Func::builtin(name).is_some();
        if reserved || self.constants.contains_key(name) || self.functions.contains_key(name) {
            Err(format!("symbol `{name}` is reserved or already declared"))
        } else {
            Ok(())
        }
    }
}
