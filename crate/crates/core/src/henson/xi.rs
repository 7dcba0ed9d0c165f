use std::collections::BTreeMap;

use super::structure::{FiniteStructure, FunctionData, SortData, Value};
use super::syntax::{Formula, Func, Sort, Term};
use super::LogicError;
use crate::directed::{Index, Sampling};
use crate::netcore::{Point, RateSet, SequenceSpec};
use crate::rational::{self, Rational};

/// Names used when a net is encoded as a structure: an index sort, a value
/// sort, the net function `s: index → value`, and constants `c{j}` for indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetSymbols {
    pub net: String,
    pub index_sort: String,
    pub value_sort: String,
}

impl Default for NetSymbols {
    fn default() -> Self {
        NetSymbols {
            net: "s".into(),
            index_sort: "D".into(),
            value_sort: "X".into(),
        }
    }
}

impl NetSymbols {
    pub fn index_constant(j: Index) -> String {
        format!("c{j}")
    }

    fn value_at(&self, j: Index) -> Term {
        Term::app(
            Func::User(self.net.clone()),
            vec![Term::constant(Self::index_constant(j), self.index_sort.clone())],
        )
    }

    fn spread(&self, j: Index, k: Index) -> Term {
        Term::metric(self.value_sort.clone(), self.value_at(j), self.value_at(k))
    }
}

fn window_pairs(eta: &Sampling, i: Index) -> Result<Vec<(Index, Index)>, LogicError> {
    let w = eta.window(i).map_err(|e| LogicError::Sampling(e.to_string()))?.to_vec();
    let mut pairs: Vec<(Index, Index)> = w
        .iter()
        .enumerate()
        .flat_map(|(k, &j)| w[k + 1..].iter().map(move |&j2| (j, j2)))
        .collect();
    if pairs.is_empty() {
        let j = *w.first().ok_or_else(|| LogicError::Sampling(format!("η_{i} is empty")))?;
        pairs.push((j, j));
    }
    Ok(pairs)
}

/// `ξ^η_i(t) = ⋀_{j<j′ ∈ η_i} d(s(c_j), s(c_j′)) ≤ t`. Reflexive pairs are
/// dropped; a singleton window gives the single atom `d(s(c_j), s(c_j)) ≤ t`.
pub fn xi_formula(eta: &Sampling, i: Index, t: &Rational, sym: &NetSymbols) -> Result<Formula, LogicError> {
    let atoms = window_pairs(eta, i)?
        .into_iter()
        .map(|(j, k)| Formula::le(sym.spread(j, k), t.clone()))
        .collect();
    Ok(Formula::conjunction(atoms).expect("window has a pair"))
}

/// `¬w ξ^η_i(t) = ⋁_{j<j′ ∈ η_i} d(s(c_j), s(c_j′)) ≥ t`.
pub fn wneg_xi(eta: &Sampling, i: Index, t: &Rational, sym: &NetSymbols) -> Result<Formula, LogicError> {
    let atoms = window_pairs(eta, i)?
        .into_iter()
        .map(|(j, k)| Formula::ge(sym.spread(j, k), t.clone()))
        .collect();
    Ok(Formula::disjunction(atoms).expect("window has a pair"))
}

/// `ξ^η_E(t) = ⋁_{i∈E} ξ^η_i(t)`.
pub fn xi_e(eta: &Sampling, rate: &RateSet, t: &Rational, sym: &NetSymbols) -> Result<Formula, LogicError> {
    if rate.is_empty() {
        return Err(LogicError::EmptyRate);
    }
    let parts = rate
        .iter()
        .map(|&i| xi_formula(eta, i, t, sym))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Formula::disjunction(parts).expect("rate is nonempty"))
}

/// Encodes `a_0, …, a_horizon` as a structure: the index sort holds `c_0 …
/// c_horizon` under the discrete metric (anchor `c_0`), the value sort holds
/// the distinct values `x0, x1, …` under the sup metric (anchor: the value of
/// `a_0`), and `s(c_j) = a_j`.
pub fn net_structure(seq: &SequenceSpec, horizon: Index, sym: &NetSymbols) -> Result<FiniteStructure, LogicError> {
    let mut values: Vec<Point> = Vec::new();
    let mut table = BTreeMap::new();
    for j in 0..=horizon {
        let v = seq.value(j);
        let k = match values.iter().position(|p| p == v) {
            Some(k) => k,
            None => {
                values.push(v.clone());
                values.len() - 1
            }
        };
        table.insert(vec![j], Value::Point(1, k));
    }
    let n = horizon + 1;
    let discrete = (0..n)
        .map(|a| (0..n).map(|b| if a == b { rational::zero() } else { rational::one() }).collect())
        .collect();
    let index = SortData {
        name: sym.index_sort.clone(),
        points: (0..n).map(NetSymbols::index_constant).collect(),
        metric: discrete,
        anchor: 0,
    };
    let value = SortData {
        name: sym.value_sort.clone(),
        points: (0..values.len()).map(|k| format!("x{k}")).collect(),
        metric: values.iter().map(|a| values.iter().map(|b| a.dist(b)).collect()).collect(),
        anchor: 0,
    };
    let mut functions = BTreeMap::new();
    functions.insert(
        sym.net.clone(),
        FunctionData {
            domain: vec![0],
            range: Sort::Base(sym.value_sort.clone()),
            table,
        },
    );
    FiniteStructure::new(vec![index, value], functions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directed::{sampling_from_function, IncreasingFn};
    use crate::henson::{approx_satisfies, satisfies, weak_negation, Assignment};
    use crate::netcore::{check_rate, Tail};
    use crate::rational::{int, ratio};

    fn shift(c: usize) -> Sampling {
        sampling_from_function(IncreasingFn::shift(c)).unwrap()
    }

    #[test]
    fn pair_enumeration() {
        let sym = NetSymbols::default();
        let f = xi_formula(&shift(1), 3, &ratio(1, 2), &sym).unwrap();
        assert_eq!(f, Formula::le(sym.spread(3, 4), ratio(1, 2)));
        assert_eq!(f.to_string(), "d(s(c3), s(c4)) <= 1/2");
        let g = xi_formula(&shift(2), 0, &int(1), &sym).unwrap();
        let atom = |j, k| Formula::le(sym.spread(j, k), int(1));
        assert_eq!(g, Formula::and(atom(0, 1), Formula::and(atom(0, 2), atom(1, 2))));
    }

    #[test]
    fn singleton_windows_keep_one_reflexive_atom() {
        let sym = NetSymbols::default();
        let eta = Sampling::explicit(
            [(0, [0].into_iter().collect())].into_iter().collect(),
            crate::directed::DirectedSet::Nat,
        );
        assert_eq!(
            xi_formula(&eta, 0, &int(0), &sym).unwrap(),
            Formula::le(sym.spread(0, 0), int(0))
        );
    }

    #[test]
    fn weak_negation_matches_wneg_xi() {
        let sym = NetSymbols::default();
        for i in 0..4 {
            let eta = shift(3);
            let t = ratio(1, 3);
            assert_eq!(
                weak_negation(&xi_formula(&eta, i, &t, &sym).unwrap()),
                wneg_xi(&eta, i, &t, &sym).unwrap()
            );
        }
    }

    #[test]
    fn singleton_rate_is_the_window_formula() {
        let sym = NetSymbols::default();
        let eta = shift(2);
        assert_eq!(
            xi_e(&eta, &RateSet::from([5]), &int(1), &sym).unwrap(),
            xi_formula(&eta, 5, &int(1), &sym).unwrap()
        );
        assert!(matches!(xi_e(&eta, &RateSet::new(), &int(1), &sym), Err(LogicError::EmptyRate)));
    }

    #[test]
    fn dropping_reflexive_pairs_keeps_meaning() {
        let sym = NetSymbols::default();
        let seq = SequenceSpec::scalar(vec![int(0), ratio(1, 2), int(2), int(1)], Tail::Periodic(2)).unwrap();
        let eta = shift(2);
        let m = net_structure(&seq, 8, &sym).unwrap();
        for i in 0..6 {
            let w = eta.window(i).unwrap().to_vec();
            let full: Vec<Formula> = w
                .iter()
                .flat_map(|&j| w.iter().map(move |&k| (j, k)))
                .map(|(j, k)| Formula::le(sym.spread(j, k), ratio(3, 2)))
                .collect();
            let full = Formula::conjunction(full).unwrap();
            let short = xi_formula(&eta, i, &ratio(3, 2), &sym).unwrap();
            let none = Assignment::new();
            assert_eq!(satisfies(&m, &full, &none).unwrap(), satisfies(&m, &short, &none).unwrap());
        }
    }

    #[test]
    fn logic_agrees_with_check_rate() {
        let sym = NetSymbols::default();
        let seq = SequenceSpec::scalar(
            vec![int(0), ratio(3, 10), ratio(1, 2), ratio(3, 5), ratio(13, 20)],
            Tail::Constant,
        )
        .unwrap();
        let eta = shift(1);
        let e = RateSet::from([0, 1, 2]);
        let m = net_structure(&seq, 3, &sym).unwrap();
        for eps in [ratio(1, 20), ratio(1, 10), ratio(2, 5)] {
            let phi = xi_e(&eta, &e, &eps, &sym).unwrap();
            assert_eq!(
                approx_satisfies(&m, &phi, &Assignment::new()).unwrap(),
                check_rate(&seq, &eps, &eta, &e).unwrap(),
                "ε = {eps}"
            );
        }
    }
}
