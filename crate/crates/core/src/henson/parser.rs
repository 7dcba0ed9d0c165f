//! Recursive-descent parser for the concrete formula syntax:
//!
//! ```text
//! formula := atom | "(" formula ("&" formula)+ ")" | "(" formula ("|" formula)+ ")"
//!          | "E" rational ident [":" sort] "." formula
//!          | "A" rational ident [":" sort] "." formula
//! atom    := term "<=" rational | term ">=" rational
//! term    := ident | rational | ident "(" term {"," term} ")"
//! ```
//!
//! Longer `&`/`|` chains nest to the right. Identifiers that are neither bound
//! nor point constants are free variables. Sorts of variables are inferred
//! from use; an unconstrained variable gets the only base sort if there is one.

use num::{BigInt, Signed};

use super::syntax::{Formula, Func, Signature, Sort, Term, REAL_SORT};
use super::LogicError;
use crate::rational::Rational;

pub fn parse_formula(text: &str, signature: &Signature) -> Result<Formula, LogicError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        at: 0,
        end: text.len(),
        signature,
        binders: Vec::new(),
        scope: Vec::new(),
        free: Vec::new(),
    };
    let mut raw = p.formula()?;
    if let Some(t) = p.tokens.get(p.at) {
        return Err(LogicError::syntax(t.pos, "unexpected trailing input"));
    }
    let mut sorts: Vec<Option<Sort>> = p.binders.iter().map(|b| b.annotated.clone()).collect();
    loop {
        let mut changed = true;
        while changed {
            changed = false;
            infer_formula(&mut raw, signature, &mut sorts, &mut changed)?;
        }
        let Some(open) = sorts.iter().position(Option::is_none) else { break };
        match signature.sorts() {
            [only] => sorts[open] = Some(Sort::Base(only.clone())),
            _ => {
                return Err(LogicError::SortMismatch(format!(
                    "cannot infer the sort of `{}`; annotate it as `{}:Sort`",
                    p.binders[open].name, p.binders[open].name
                )))
            }
        }
    }
    Ok(build_formula(raw, &p.binders, &sorts))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Slash,
    Minus,
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Amp,
    Bar,
    Le,
    Ge,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, LogicError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        let single = match c {
            '/' => Some(Tok::Slash),
            '-' => Some(Tok::Minus),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            ':' => Some(Tok::Colon),
            '&' | '∧' => Some(Tok::Amp),
            '|' | '∨' => Some(Tok::Bar),
            '≤' => Some(Tok::Le),
            '≥' => Some(Tok::Ge),
            _ => None,
        };
        if let Some(tok) = single {
            chars.next();
            out.push(Token { tok, pos });
            continue;
        }
        if c.is_whitespace() {
            chars.next();
        } else if c == '<' || c == '>' {
            chars.next();
            match chars.next() {
                Some((_, '=')) => out.push(Token {
                    tok: if c == '<' { Tok::Le } else { Tok::Ge },
                    pos,
                }),
                _ => return Err(LogicError::syntax(pos, "expected `<=` or `>=`")),
            }
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&(_, d)) = chars.peek().filter(|(_, d)| d.is_ascii_digit()) {
                s.push(d);
                chars.next();
            }
            out.push(Token {
                tok: Tok::Int(s.parse().expect("digits parse")),
                pos,
            });
        } else if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&(_, d)) = chars.peek().filter(|(_, d)| d.is_alphanumeric() || *d == '_' || *d == '\'') {
                s.push(d);
                chars.next();
            }
            out.push(Token { tok: Tok::Ident(s), pos });
        } else {
            return Err(LogicError::syntax(pos, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Binder {
    name: String,
    annotated: Option<Sort>,
}

#[derive(Debug)]
enum Node {
    Var(usize),
    Const(String, String),
    Lit(Rational),
    Call {
        name: String,
        args: Vec<Node>,
        metric_sort: Option<String>,
    },
}

#[derive(Debug)]
enum Raw {
    Le(Node, Rational),
    Ge(Node, Rational),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Quant {
        exists: bool,
        radius: Rational,
        binder: usize,
        body: Box<Raw>,
    },
}

struct Parser<'a> {
    tokens: Vec<Token>,
    at: usize,
    end: usize,
    signature: &'a Signature,
    binders: Vec<Binder>,
    /// Innermost last.
    scope: Vec<(String, usize)>,
    free: Vec<(String, usize)>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.at).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.at + k).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.at).map_or(self.end, |t| t.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.at).map(|t| t.tok.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), LogicError> {
        let pos = self.pos();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(LogicError::syntax(pos, format!("expected {what}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, LogicError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => Err(LogicError::syntax(pos, format!("expected {what}"))),
        }
    }

    fn rational(&mut self) -> Result<Rational, LogicError> {
        let negative = self.peek() == Some(&Tok::Minus);
        if negative {
            self.at += 1;
        }
        let pos = self.pos();
        let num = match self.bump() {
            Some(Tok::Int(n)) => n,
            _ => return Err(LogicError::syntax(pos, "expected a rational")),
        };
        let mut q = Rational::from_integer(num);
        if self.peek() == Some(&Tok::Slash) {
            self.at += 1;
            let pos = self.pos();
            match self.bump() {
                Some(Tok::Int(d)) if d.is_positive() => q /= Rational::from_integer(d),
                _ => return Err(LogicError::syntax(pos, "expected a positive denominator")),
            }
        }
        Ok(if negative { -q } else { q })
    }

    fn formula(&mut self) -> Result<Raw, LogicError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.at += 1;
                let first = self.formula()?;
                let pos = self.pos();
                let op = match self.bump() {
                    Some(Tok::RParen) => return Ok(first),
                    Some(op @ (Tok::Amp | Tok::Bar)) => op,
                    _ => return Err(LogicError::syntax(pos, "expected `&`, `|` or `)`")),
                };
                let mut parts = vec![first, self.formula()?];
                loop {
                    let pos = self.pos();
                    match self.bump() {
                        Some(Tok::RParen) => break,
                        Some(t) if t == op => parts.push(self.formula()?),
                        Some(Tok::Amp | Tok::Bar) => {
                            return Err(LogicError::syntax(pos, "mixed `&` and `|`; add parentheses"))
                        }
                        _ => return Err(LogicError::syntax(pos, "expected `)`")),
                    }
                }
                let join = if op == Tok::Amp { Raw::And } else { Raw::Or };
                let mut it = parts.into_iter().rev();
                let last = it.next().expect("at least two parts");
                Ok(it.fold(last, |acc, p| join(Box::new(p), Box::new(acc))))
            }
            Some(Tok::Ident(q))
                if (q == "E" || q == "A") && matches!(self.peek_at(1), Some(Tok::Int(_) | Tok::Minus)) =>
            {
                let exists = q == "E";
                self.at += 1;
                let pos = self.pos();
                let radius = self.rational()?;
                if !radius.is_positive() {
                    return Err(LogicError::NonpositiveRadius(format!("{radius} at {pos}")));
                }
                let name = self.ident("a variable")?;
                let annotated = if self.peek() == Some(&Tok::Colon) {
                    self.at += 1;
                    let pos = self.pos();
                    let s = self.ident("a sort")?;
                    Some(self.sort_named(&s, pos)?)
                } else {
                    None
                };
                self.expect(Tok::Dot, "`.` after the quantified variable")?;
                let binder = self.binders.len();
                self.binders.push(Binder {
                    name: name.clone(),
                    annotated,
                });
                self.scope.push((name, binder));
                let body = self.formula();
                self.scope.pop();
                Ok(Raw::Quant {
                    exists,
                    radius,
                    binder,
                    body: Box::new(body?),
                })
            }
            _ => {
                let t = self.term()?;
                let pos = self.pos();
                match self.bump() {
                    Some(Tok::Le) => Ok(Raw::Le(t, self.rational()?)),
                    Some(Tok::Ge) => Ok(Raw::Ge(t, self.rational()?)),
                    _ => Err(LogicError::syntax(pos, "expected `<=` or `>=`")),
                }
            }
        }
    }

    fn sort_named(&self, name: &str, pos: usize) -> Result<Sort, LogicError> {
        if name == REAL_SORT {
            Ok(Sort::Real)
        } else if self.signature.has_sort(name) {
            Ok(Sort::Base(name.to_owned()))
        } else {
            Err(LogicError::UnknownSymbol(format!("sort `{name}` at {pos}")))
        }
    }

    fn term(&mut self) -> Result<Node, LogicError> {
        match self.peek() {
            Some(Tok::Int(_) | Tok::Minus) => Ok(Node::Lit(self.rational()?)),
            Some(Tok::Ident(_)) => {
                let pos = self.pos();
                let name = self.ident("a term")?;
                if self.peek() == Some(&Tok::LParen) {
                    self.at += 1;
                    if name != "d" && Func::builtin(&name).is_none() && self.signature.function(&name).is_none() {
                        return Err(LogicError::UnknownSymbol(format!("function `{name}` at {pos}")));
                    }
                    let mut args = vec![self.term()?];
                    loop {
                        let pos = self.pos();
                        match self.bump() {
                            Some(Tok::Comma) => args.push(self.term()?),
                            Some(Tok::RParen) => break,
                            _ => return Err(LogicError::syntax(pos, "expected `,` or `)`")),
                        }
                    }
                    return Ok(Node::Call {
                        name,
                        args,
                        metric_sort: None,
                    });
                }
                Ok(self.resolve(name))
            }
            _ => Err(LogicError::syntax(self.pos(), "expected a term")),
        }
    }

    fn resolve(&mut self, name: String) -> Node {
        if let Some(&(_, b)) = self.scope.iter().rev().find(|(n, _)| n == &name) {
            return Node::Var(b);
        }
        if let Some(sort) = self.signature.constant_sort(&name) {
            return Node::Const(name, sort.to_owned());
        }
        if self.signature.function(&name).is_some_and(|(dom, _)| dom.is_empty()) {
            return Node::Call {
                name,
                args: Vec::new(),
                metric_sort: None,
            };
        }
        if let Some(&(_, b)) = self.free.iter().find(|(n, _)| n == &name) {
            return Node::Var(b);
        }
        let b = self.binders.len();
        self.binders.push(Binder {
            name: name.clone(),
            annotated: None,
        });
        self.free.push((name, b));
        Node::Var(b)
    }
}

fn mismatch(expected: &Sort, found: &Sort, what: &str) -> LogicError {
    LogicError::SortMismatch(format!("{what}: expected sort {expected}, found {found}"))
}

fn check(expected: Option<&Sort>, found: &Sort, what: &str) -> Result<(), LogicError> {
    match expected {
        Some(e) if e != found => Err(mismatch(e, found, what)),
        _ => Ok(()),
    }
}

fn infer_formula(
    f: &mut Raw,
    sig: &Signature,
    sorts: &mut [Option<Sort>],
    changed: &mut bool,
) -> Result<(), LogicError> {
    match f {
        Raw::Le(t, _) | Raw::Ge(t, _) => infer_term(t, Some(&Sort::Real), sig, sorts, changed).map(|_| ()),
        Raw::And(a, b) | Raw::Or(a, b) => {
            infer_formula(a, sig, sorts, changed)?;
            infer_formula(b, sig, sorts, changed)
        }
        Raw::Quant { body, .. } => infer_formula(body, sig, sorts, changed),
    }
}

fn infer_term(
    t: &mut Node,
    expected: Option<&Sort>,
    sig: &Signature,
    sorts: &mut [Option<Sort>],
    changed: &mut bool,
) -> Result<Option<Sort>, LogicError> {
    match t {
        Node::Var(b) => {
            match (&sorts[*b], expected) {
                (None, Some(e)) => {
                    sorts[*b] = Some(e.clone());
                    *changed = true;
                }
                (Some(have), Some(e)) if have != e => return Err(mismatch(e, have, "variable")),
                _ => {}
            }
            Ok(sorts[*b].clone())
        }
        Node::Const(name, sort) => {
            let s = Sort::Base(sort.clone());
            check(expected, &s, &format!("constant `{name}`"))?;
            Ok(Some(s))
        }
        Node::Lit(_) => {
            check(expected, &Sort::Real, "literal")?;
            Ok(Some(Sort::Real))
        }
        Node::Call {
            name,
            args,
            metric_sort,
        } => {
            let what = format!("`{name}(…)`");
            if name == "d" {
                check(expected, &Sort::Real, &what)?;
                if args.len() != 2 {
                    return Err(LogicError::SortMismatch(format!("`d` takes 2 arguments, got {}", args.len())));
                }
                if metric_sort.is_none() {
                    let mut found = None;
                    for a in args.iter_mut() {
                        if let Some(s) = infer_term(a, None, sig, sorts, changed)? {
                            found = Some(s);
                            break;
                        }
                    }
                    match found {
                        Some(Sort::Real) => {
                            return Err(LogicError::SortMismatch("`d` needs points of a base sort, found R".into()))
                        }
                        Some(Sort::Base(s)) => {
                            *metric_sort = Some(s);
                            *changed = true;
                        }
                        None => {
                            if let [only] = sig.sorts() {
                                *metric_sort = Some(only.clone());
                                *changed = true;
                            }
                        }
                    }
                }
                if let Some(s) = metric_sort.clone() {
                    let s = Sort::Base(s);
                    for a in args.iter_mut() {
                        infer_term(a, Some(&s), sig, sorts, changed)?;
                    }
                }
                return Ok(Some(Sort::Real));
            }
            if let Some(func) = Func::builtin(name) {
                check(expected, &Sort::Real, &what)?;
                let arity = func.builtin_arity().expect("builtin");
                if args.len() != arity {
                    return Err(LogicError::SortMismatch(format!(
                        "`{name}` takes {arity} argument(s), got {}",
                        args.len()
                    )));
                }
                for a in args.iter_mut() {
                    infer_term(a, Some(&Sort::Real), sig, sorts, changed)?;
                }
                return Ok(Some(Sort::Real));
            }
            let (domain, range) = sig
                .function(name)
                .ok_or_else(|| LogicError::UnknownSymbol(format!("function `{name}`")))?;
            check(expected, range, &what)?;
            if args.len() != domain.len() {
                return Err(LogicError::SortMismatch(format!(
                    "`{name}` takes {} argument(s), got {}",
                    domain.len(),
                    args.len()
                )));
            }
            for (a, s) in args.iter_mut().zip(domain) {
                infer_term(a, Some(s), sig, sorts, changed)?;
            }
            Ok(Some(range.clone()))
        }
    }
}

fn build_formula(f: Raw, binders: &[Binder], sorts: &[Option<Sort>]) -> Formula {
    let sort_of = |b: usize| sorts[b].clone().expect("all sorts inferred");
    match f {
        Raw::Le(t, r) => Formula::Le(build_term(t, binders, sorts), r),
        Raw::Ge(t, r) => Formula::Ge(build_term(t, binders, sorts), r),
        Raw::And(a, b) => Formula::and(build_formula(*a, binders, sorts), build_formula(*b, binders, sorts)),
        Raw::Or(a, b) => Formula::or(build_formula(*a, binders, sorts), build_formula(*b, binders, sorts)),
        Raw::Quant {
            exists,
            radius,
            binder,
            body,
        } => {
            let body = build_formula(*body, binders, sorts);
            let var = binders[binder].name.clone();
            if exists {
                Formula::exists(radius, var, sort_of(binder), body)
            } else {
                Formula::forall(radius, var, sort_of(binder), body)
            }
        }
    }
}

fn build_term(t: Node, binders: &[Binder], sorts: &[Option<Sort>]) -> Term {
    match t {
        Node::Var(b) => Term::var(binders[b].name.clone(), sorts[b].clone().expect("all sorts inferred")),
        Node::Const(name, sort) => Term::constant(name, sort),
        Node::Lit(q) => Term::Real(q),
        Node::Call {
            name,
            args,
            metric_sort,
        } => {
            let func = if name == "d" {
                Func::Metric(metric_sort.expect("metric sort inferred"))
            } else {
                Func::builtin(&name).unwrap_or(Func::User(name))
            };
            Term::app(func, args.into_iter().map(|a| build_term(a, binders, sorts)).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::henson::FiniteStructure;
    use crate::rational::{int, ratio};

    fn two_points() -> FiniteStructure {
        FiniteStructure::from_json(
            r#"{"sorts": {"M": {"points": ["a", "b"], "metric": [["0", "1"], ["1", "0"]], "anchor": "a"}},
                "functions": {"f": {"domain": ["M"], "table": {"a": "2", "b": "5"}},
                              "c1": {"table": {"": "2"}}}}"#,
        )
        .unwrap()
    }

    fn two_sorts() -> FiniteStructure {
        FiniteStructure::from_json(
            r#"{"sorts": {"M": {"points": ["a", "b"], "metric": [["0", "1"], ["1", "0"]], "anchor": "a"},
                          "N": {"points": ["u"], "metric": [["0"]], "anchor": "u"}}}"#,
        )
        .unwrap()
    }

    fn m() -> Sort {
        Sort::base("M")
    }

    #[test]
    fn single_atom() {
        let s = two_points();
        let f = parse_formula("d(x, a) <= 1/2", s.signature()).unwrap();
        assert_eq!(
            f,
            Formula::le(Term::metric("M", Term::var("x", m()), Term::constant("a", "M")), ratio(1, 2))
        );
    }

    #[test]
    fn equality_abbreviation_is_a_conjunction() {
        let s = two_points();
        let f = parse_formula("(d(x,a) <= 1 & d(x,a) >= 1)", s.signature()).unwrap();
        let t = Term::metric("M", Term::var("x", m()), Term::constant("a", "M"));
        assert_eq!(f, Formula::and(Formula::le(t.clone(), int(1)), Formula::ge(t, int(1))));
    }

    #[test]
    fn nested_quantifiers() {
        let s = two_points();
        let f = parse_formula("E 2 x. A 1 y. d(x,y) <= 3", s.signature()).unwrap();
        let body = Formula::le(Term::metric("M", Term::var("x", m()), Term::var("y", m())), int(3));
        assert_eq!(f, Formula::exists(int(2), "x", m(), Formula::forall(int(1), "y", m(), body)));
    }

    #[test]
    fn chains_nest_right() {
        let s = two_points();
        let f = parse_formula("(0 <= 1 | 0 <= 2 | 0 <= 3)", s.signature()).unwrap();
        let atom = |k| Formula::le(Term::Real(int(0)), int(k));
        assert_eq!(f, Formula::or(atom(1), Formula::or(atom(2), atom(3))));
        assert!(matches!(
            parse_formula("(0 <= 1 | 0 <= 2 & 0 <= 3)", s.signature()),
            Err(LogicError::SyntaxError { .. })
        ));
    }

    #[test]
    fn user_functions_and_real_constants() {
        let s = two_points();
        let f = parse_formula("abs(sub(f(a), f(b))) >= -1/3", s.signature()).unwrap();
        assert_eq!(f.to_string(), "abs(sub(f(a), f(b))) >= -1/3");
        let g = parse_formula("add(c1, x) <= 0", s.signature()).unwrap();
        assert_eq!(
            g,
            Formula::le(
                Term::app(Func::Add, vec![Term::app(Func::User("c1".into()), vec![]), Term::var("x", Sort::Real)]),
                int(0)
            )
        );
    }

    #[test]
    fn errors() {
        let s = two_points();
        let sig = s.signature();
        assert!(matches!(parse_formula("d(x, a) <=", sig), Err(LogicError::SyntaxError { pos: 10, .. })));
        assert!(matches!(parse_formula("g(a) <= 1", sig), Err(LogicError::UnknownSymbol(_))));
        assert!(matches!(parse_formula("d(a, 1) <= 1", sig), Err(LogicError::SortMismatch(_))));
        assert!(matches!(parse_formula("f(1) <= 1", sig), Err(LogicError::SortMismatch(_))));
        assert!(matches!(parse_formula("a <= 1", sig), Err(LogicError::SortMismatch(_))));
        assert!(matches!(parse_formula("E 0 x. 0 <= 0", sig), Err(LogicError::NonpositiveRadius(_))));
        assert!(matches!(parse_formula("A -1 x. 0 <= 0", sig), Err(LogicError::NonpositiveRadius(_))));
        assert!(matches!(parse_formula("E 1 x:Q. 0 <= 0", sig), Err(LogicError::UnknownSymbol(_))));
        assert!(matches!(parse_formula("0 <= 1/0", sig), Err(LogicError::SyntaxError { .. })));
        assert!(matches!(parse_formula("0 <= 1 0", sig), Err(LogicError::SyntaxError { .. })));
    }

    #[test]
    fn sort_inference_across_sorts() {
        let s = two_sorts();
        let sig = s.signature();
        let f = parse_formula("E 1 x. d(x, u) <= 0", sig).unwrap();
        assert!(matches!(f, Formula::Exists { ref sort, .. } if *sort == Sort::base("N")));
        assert!(matches!(parse_formula("E 1 x. 0 <= 0", sig), Err(LogicError::SortMismatch(_))));
        assert!(parse_formula("E 1 x:M. 0 <= 0", sig).is_ok());
        assert!(matches!(parse_formula("d(a, u) <= 0", sig), Err(LogicError::SortMismatch(_))));
        let real = parse_formula("E 1 x:R. x <= 0", sig).unwrap();
        assert!(matches!(real, Formula::Exists { sort: Sort::Real, .. }));
    }

    #[test]
    fn round_trip_through_display() {
        let s = two_sorts();
        for text in [
            "E 2 x:M. A 1 y. d(x,y) <= 3",
            "(E 1 x:M. d(x, a) >= 1 | A 1/2 z. max(d(z, u), 1) <= 1)",
            "(mul(2, -3) <= -6 & min(1, 0) >= 0)",
        ] {
            let f = parse_formula(text, s.signature()).unwrap();
            let again = parse_formula(&f.to_string(), s.signature()).unwrap();
            assert_eq!(again, f, "{text}");
        }
    }
}
