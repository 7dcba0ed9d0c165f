use num::Signed;
use rayon::prelude::*;
use serde::Serialize;

use super::{integrate, LInfFunction, MeasureError, MeasureKind, MeasureStructure, TvMode};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Clause {
    pub name: String,
    pub passed: bool,
    /// The first offending set, pair or function, when the clause fails.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub clauses: Vec<Clause>,
}

impl Report {
    fn push(&mut self, name: &str, witness: Option<String>) {
        self.clauses.push(Clause {
            name: name.to_owned(),
            passed: witness.is_none(),
            witness,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| !c.passed)
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

fn show(m: &MeasureStructure, set: u64) -> String {
    format!("{{{}}}", m.set_labels(set).join(", "))
}

fn show_pair(m: &MeasureStructure, a: u64, b: u64) -> String {
    format!("A = {}, B = {}", show(m, a), show(m, b))
}

/// First unordered pair `(A, B)` (in enumeration order) for which `bad` reports something.
fn first_pair<T: Send>(sets: &[u64], bad: impl Fn(u64, u64) -> Option<T> + Sync) -> Option<T> {
    sets.par_iter()
        .enumerate()
        .find_map_first(|(i, &a)| sets[i..].iter().find_map(|&b| bad(a, b)))
}

fn first_set<T: Send>(sets: &[u64], bad: impl Fn(u64) -> Option<T> + Sync) -> Option<T> {
    sets.par_iter().find_map_first(|&a| bad(a))
}

/// Checks the algebra, indicator, and measure clauses of a finite measure
/// structure, exhaustively over the algebra.
pub fn audit_preloeb(m: &MeasureStructure) -> Result<Report, MeasureError> {
    let sets = m.sets()?;
    let n = m.len();
    let full = m.full();
    let mut r = Report::default();

    r.push("∅ ∈ 𝒜", (!m.contains_set(0)).then(|| "∅".to_owned()));
    r.push("Ω ∈ 𝒜", (!m.contains_set(full)).then(|| "Ω".to_owned()));
    r.push(
        "closed under complement",
        first_set(&sets, |a| (!m.contains_set(full & !a)).then(|| show(m, a))),
    );
    r.push(
        "closed under ∪",
        first_pair(&sets, |a, b| (!m.contains_set(a | b)).then(|| show_pair(m, a, b))),
    );
    r.push(
        "closed under ∩",
        first_pair(&sets, |a, b| (!m.contains_set(a & b)).then(|| show_pair(m, a, b))),
    );

    let chi = |s: u64| LInfFunction::indicator(n, s);
    r.push(
        "d(A, B) = sup_ω |⟦ω∈A⟧ − ⟦ω∈B⟧|",
        first_pair(&sets, |a, b| {
            let sup = chi(a).sub(&chi(b)).norm();
            let d = if a == b { rational::zero() } else { rational::one() };
            (sup != d).then(|| show_pair(m, a, b))
        }),
    );
    r.push("⟦ω∈∅⟧ = 0", (chi(0) != LInfFunction::zero(n)).then(|| "∅".to_owned()));
    r.push("⟦ω∈Ω⟧ = 1", (chi(full) != LInfFunction::one(n)).then(|| "Ω".to_owned()));
    r.push(
        "⟦ω∈Aᶜ⟧ = 1 − ⟦ω∈A⟧",
        first_set(&sets, |a| (chi(full & !a) != LInfFunction::one(n).sub(&chi(a))).then(|| show(m, a))),
    );
    r.push(
        "⟦ω∈A∪B⟧ = max(⟦ω∈A⟧, ⟦ω∈B⟧)",
        first_pair(&sets, |a, b| (chi(a | b) != chi(a).join(&chi(b))).then(|| show_pair(m, a, b))),
    );
    r.push(
        "⟦ω∈A∩B⟧ = min(⟦ω∈A⟧, ⟦ω∈B⟧)",
        first_pair(&sets, |a, b| (chi(a & b) != chi(a).meet(&chi(b))).then(|| show_pair(m, a, b))),
    );

    let table = m.measure_table(&sets);
    let measure = |s: u64| table.get(&s).cloned().unwrap_or_else(|| m.measure_of(s));
    let mu: Vec<Rational> = sets.iter().map(|s| table[s].clone()).collect();
    r.push(
        "μ(∅) = 0",
        (!rational::is_zero(&m.measure_of(0))).then(|| rational::format(&m.measure_of(0))),
    );
    r.push(
        "μ(A∪B) + μ(A∩B) = μ(A) + μ(B)",
        first_pair(&sets, |a, b| {
            let lhs = measure(a | b) + measure(a & b);
            (lhs != &table[&a] + &table[&b]).then(|| show_pair(m, a, b))
        }),
    );

    let tv_fast = m.total_variation(TvMode::Fast)?;
    let tv = m.total_variation(TvMode::Audit)?;
    r.push(
        "‖μ‖ = Σ |μ(atom)|",
        (tv_fast != tv).then(|| format!("sup = {}, atoms = {}", rational::format(&tv), rational::format(&tv_fast))),
    );
    let omega = m.measure_of(full);
    match m.kind() {
        MeasureKind::Probability | MeasureKind::Finite => {
            r.push(
                "0 ≤ μ(A)",
                sets.iter().zip(&mu).find(|(_, v)| v.is_negative()).map(|(&a, _)| show(m, a)),
            );
            r.push(
                "μ(A) ≤ μ(Ω)",
                sets.iter().zip(&mu).find(|(_, v)| *v > &omega).map(|(&a, _)| show(m, a)),
            );
            r.push("‖μ‖ = μ(Ω)", (tv != omega).then(|| rational::format(&tv)));
            if m.kind() == MeasureKind::Probability {
                r.push("μ(Ω) = 1", (omega != rational::one()).then(|| rational::format(&omega)));
            }
        }
        MeasureKind::Signed => {
            r.push(
                "|μ(A)| ≤ ‖μ‖",
                sets.iter().zip(&mu).find(|(_, v)| v.abs() > tv).map(|(&a, _)| show(m, a)),
            );
        }
    }
    if let Some(c) = m.bound() {
        r.push("‖μ‖ ≤ C", (&tv > c).then(|| rational::format(&tv)));
    }
    Ok(r)
}

/// Checks the integration clauses on every member of the algebra and every
/// (pair of) test function(s) and scalar.
pub fn audit_integration(
    m: &MeasureStructure,
    functions: &[LInfFunction],
    scalars: &[Rational],
) -> Result<Report, MeasureError> {
    for f in functions {
        m.check_function(f)?;
    }
    let sets = m.sets()?;
    let n = m.len();
    let norm = m.total_variation(TvMode::Fast)?;
    let i = |f: &LInfFunction| integrate(m, f).expect("dimensions checked");
    let values: Vec<Rational> = functions.iter().map(i).collect();
    let name = |k: usize| format!("f{k}");
    let mut r = Report::default();

    r.push(
        "I(χ_A) = μ(A)",
        first_set(&sets, |a| (i(&LInfFunction::indicator(n, a)) != m.measure_of(a)).then(|| show(m, a))),
    );
    r.push(
        "I(1) = μ(Ω)",
        (i(&LInfFunction::one(n)) != m.measure_of(m.full())).then(|| "1".to_owned()),
    );

    let pairs: Vec<(usize, usize)> = (0..functions.len())
        .flat_map(|a| (0..functions.len()).map(move |b| (a, b)))
        .collect();
    r.push(
        "I(αf + g) = α·If + Ig",
        pairs.par_iter().find_map_first(|&(a, b)| {
            scalars.iter().find_map(|alpha| {
                let lhs = i(&functions[a].scale(alpha).add(&functions[b]));
                (lhs != alpha * &values[a] + &values[b])
                    .then(|| format!("f = {}, g = {}, α = {}", name(a), name(b), rational::format(alpha)))
            })
        }),
    );
    r.push(
        "|If − Ig| ≤ ‖μ‖·‖f − g‖",
        pairs.par_iter().find_map_first(|&(a, b)| {
            let bound = &norm * functions[a].sub(&functions[b]).norm();
            ((&values[a] - &values[b]).abs() > bound).then(|| format!("f = {}, g = {}", name(a), name(b)))
        }),
    );
    if m.kind().is_positive() {
        r.push(
            "f ≥ 0 ⇒ If ≥ 0",
            (0..functions.len()).find(|&k| functions[k].is_nonnegative() && values[k].is_negative()).map(name),
        );
        r.push(
            "‖μ‖·inf f ≤ If ≤ ‖μ‖·sup f",
            (0..functions.len())
                .find(|&k| values[k] < &norm * functions[k].inf() || values[k] > &norm * functions[k].sup())
                .map(name),
        );
    } else {
        r.push(
            "|If| ≤ ‖μ‖·‖f‖",
            (0..functions.len()).find(|&k| values[k].abs() > &norm * functions[k].norm()).map(name),
        );
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Algebra;
    use crate::rational::{int, ratio};

    #[test]
    fn uniform_powerset_passes() {
        let m = MeasureStructure::uniform(4).unwrap();
        let r = audit_preloeb(&m).unwrap();
        assert!(r.all_passed(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn missing_complement_is_reported() {
        let m = MeasureStructure::new(
            vec!["a".into(), "b".into(), "c".into()],
            0,
            vec![ratio(1, 3); 3],
            Algebra::Explicit(vec![0, 0b001, 0b111]),
            MeasureKind::Probability,
        )
        .unwrap();
        let r = audit_preloeb(&m).unwrap();
        let c = r.clause("closed under complement").unwrap();
        assert!(!c.passed);
        assert_eq!(c.witness.as_deref(), Some("{a}"));
    }

    #[test]
    fn negative_weight_in_positive_mode() {
        let m = MeasureStructure::from_weights(vec![int(2), int(-1)], MeasureKind::Finite).unwrap();
        let r = audit_preloeb(&m).unwrap();
        let c = r.clause("0 ≤ μ(A)").unwrap();
        assert_eq!(c.witness.as_deref(), Some("{w2}"));
        assert!(r.clause("μ(A∪B) + μ(A∩B) = μ(A) + μ(B)").unwrap().passed);
    }

    #[test]
    fn declared_bound_is_checked() {
        let m = MeasureStructure::from_weights(vec![int(1), int(-1)], MeasureKind::Signed)
            .unwrap()
            .with_bound(ratio(3, 2));
        let r = audit_preloeb(&m).unwrap();
        assert!(!r.clause("‖μ‖ ≤ C").unwrap().passed);
    }

    #[test]
    fn integration_examples() {
        let s = MeasureStructure::from_weights(vec![int(1), int(-1)], MeasureKind::Signed).unwrap();
        let f = LInfFunction::one(2);
        assert_eq!(integrate(&s, &f).unwrap(), int(0));
        let r = audit_integration(&s, &[f], &[int(2)]).unwrap();
        assert!(r.clause("|If| ≤ ‖μ‖·‖f‖").unwrap().passed);
        assert!(r.all_passed());

        let p = MeasureStructure::from_weights(vec![ratio(1, 4), ratio(3, 4)], MeasureKind::Probability).unwrap();
        let fs = vec![
            LInfFunction::new(vec![int(1), int(-2)]),
            LInfFunction::new(vec![ratio(1, 2), int(0)]),
        ];
        let r = audit_integration(&p, &fs, &[ratio(-3, 7), int(5)]).unwrap();
        assert!(r.all_passed(), "{:?}", r.failures().collect::<Vec<_>>());
    }
}
