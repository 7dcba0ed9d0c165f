use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};

use num::Signed;
use rayon::prelude::*;

use super::oscillation::{osc_segment, require_nat, within};
use super::sequence::{Net, Point};
use super::NetError;
use crate::directed::{IncreasingFn, Index, Sampling};
use crate::rational::{self, Rational};

/// A finite set of candidate witnesses `E ∈ Pfin(ℕ)`.
pub type RateSet = BTreeSet<Index>;

/// `{0, 1, …, m}`.
pub fn prefix_rate(m: Index) -> RateSet {
    (0..=m).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RateKind {
    Single(RateSet),
    PerEpsilon(BTreeMap<Rational, RateSet>),
    /// Keyed by ε and a sampling identifier (e.g. `"n+1"`).
    PerEpsilonEta(BTreeMap<(Rational, String), RateSet>),
}

/// A rate of metastability above the threshold `r`.
///
/// A classical Cauchy modulus `M_ε` is the special case `E_{ε,η} = {M_ε}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateSpec {
    kind: RateKind,
    r: Rational,
}

impl RateSpec {
    pub fn new(kind: RateKind, r: Rational) -> Result<Self, NetError> {
        if r.is_negative() {
            return Err(NetError::InvalidRate("threshold r must be nonnegative".into()));
        }
        let sets: Vec<&RateSet> = match &kind {
            RateKind::Single(e) => vec![e],
            RateKind::PerEpsilon(m) => {
                if let Some(eps) = m.keys().find(|eps| **eps <= r) {
                    return Err(NetError::InvalidRate(format!(
                        "ε = {} does not exceed r = {}",
                        rational::format(eps),
                        rational::format(&r)
                    )));
                }
                m.values().collect()
            }
            RateKind::PerEpsilonEta(m) => {
                if let Some((eps, _)) = m.keys().find(|(eps, _)| *eps <= r) {
                    return Err(NetError::InvalidRate(format!(
                        "ε = {} does not exceed r = {}",
                        rational::format(eps),
                        rational::format(&r)
                    )));
                }
                m.values().collect()
            }
        };
        if sets.iter().any(|e| e.is_empty()) {
            return Err(NetError::EmptyRate);
        }
        Ok(RateSpec { kind, r })
    }

    pub fn single(e: RateSet) -> Result<Self, NetError> {
        RateSpec::new(RateKind::Single(e), rational::zero())
    }

    pub fn per_epsilon(map: BTreeMap<Rational, RateSet>, r: Rational) -> Result<Self, NetError> {
        RateSpec::new(RateKind::PerEpsilon(map), r)
    }

    /// Rate `E_{ε,η} = {M_ε}` from a Cauchy modulus.
    pub fn from_cauchy_modulus(moduli: BTreeMap<Rational, Index>) -> Result<Self, NetError> {
        let map = moduli.into_iter().map(|(e, m)| (e, BTreeSet::from([m]))).collect();
        RateSpec::per_epsilon(map, rational::zero())
    }

    pub fn kind(&self) -> &RateKind {
        &self.kind
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    /// The set to use at `ε` (and sampling id `eta`, for the doubly indexed form).
    pub fn rate_for(&self, eps: &Rational, eta: Option<&str>) -> Option<&RateSet> {
        match &self.kind {
            RateKind::Single(e) => Some(e),
            RateKind::PerEpsilon(m) => m.get(eps),
            RateKind::PerEpsilonEta(m) => eta.and_then(|id| m.get(&(eps.clone(), id.to_owned()))),
        }
    }

    /// The ε values this rate is defined at (empty for `Single`).
    pub fn epsilons(&self) -> Vec<Rational> {
        match &self.kind {
            RateKind::Single(_) => Vec::new(),
            RateKind::PerEpsilon(m) => m.keys().cloned().collect(),
            RateKind::PerEpsilonEta(m) => {
                let set: BTreeSet<Rational> = m.keys().map(|(e, _)| e.clone()).collect();
                set.into_iter().collect()
            }
        }
    }
}

/// A view that refuses to evaluate past `limit`.
struct Horizon<'a, N: ?Sized> {
    inner: &'a N,
    limit: Index,
}

impl<N: Net + ?Sized> Net for Horizon<'_, N> {
    fn point(&self, n: Index) -> Cow<'_, Point> {
        assert!(
            n <= self.limit,
            "internal error: rate check evaluated a_{n} beyond its finite horizon {}",
            self.limit
        );
        self.inner.point(n)
    }

    fn tolerance(&self) -> Option<&Rational> {
        self.inner.tolerance()
    }
}

/// The least `i ∈ E` witnessing `[ε,η]`-metastability, if any.
///
/// Only `a_0 … a_H` with `H = max_{i∈E} max η_i` are ever evaluated; going past
/// `H` is an internal error.
pub fn first_witness_in<N: Net + ?Sized>(
    net: &N,
    eps: &Rational,
    eta: &Sampling,
    rate: &RateSet,
) -> Result<Option<Index>, NetError> {
    if rate.is_empty() {
        return Err(NetError::EmptyRate);
    }
    if eps.is_negative() {
        return Err(NetError::NegativeEpsilon);
    }
    require_nat(eta)?;
    let windows = rate
        .iter()
        .map(|&i| eta.window(i).map(|w| (i, w)))
        .collect::<Result<Vec<_>, _>>()?;
    let limit = windows
        .iter()
        .filter_map(|(_, w)| w.max())
        .max()
        .unwrap_or(0);
    let view = Horizon { inner: net, limit };
    for (i, w) in &windows {
        if within(&view, &osc_segment(&view, w.iter()), eps) {
            return Ok(Some(*i));
        }
    }
    Ok(None)
}

/// Whether `E` is a rate of `[ε,η]`-metastability: some `i ∈ E` is a witness.
pub fn check_rate<N: Net + ?Sized>(
    net: &N,
    eps: &Rational,
    eta: &Sampling,
    rate: &RateSet,
) -> Result<bool, NetError> {
    first_witness_in(net, eps, eta, rate).map(|w| w.is_some())
}

/// `F^(k)(0)` with `k = ⌈1/ε⌉`.
pub fn monotone_rate_bound(eps: &Rational, f: &IncreasingFn) -> Result<Index, NetError> {
    if !eps.is_positive() {
        return Err(NetError::NonpositiveEpsilon);
    }
    let k = rational::ceil_u64(&eps.recip()).ok_or(NetError::NonpositiveEpsilon)?;
    Ok(f.iterate_from_zero(k)?)
}

/// `E_{ε,F} = {m : m ≤ F^(k)(0)}`, `k = ⌈1/ε⌉`: a uniform rate for every
/// nondecreasing sequence in `[0, 1]`. Among the `k` consecutive differences
/// `a_{F^{(j+1)}(0)} - a_{F^{(j)}(0)}` at least one is `≤ ε`.
pub fn monotone_uniform_rate(eps: &Rational, f: &IncreasingFn) -> Result<RateSet, NetError> {
    monotone_rate_bound(eps, f).map(prefix_rate)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuditOutcome {
    AllPass,
    /// The first member (by index) without a witness in `E`.
    Counterexample { index: usize },
}

/// Checks `E` against every member of a finite family. Members are checked in
/// parallel; the reported counterexample is always the lowest index.
pub fn uniform_rate_audit<N: Net + Sync>(
    family: &[N],
    eps: &Rational,
    eta: &Sampling,
    rate: &RateSet,
) -> Result<AuditOutcome, NetError> {
    if rate.is_empty() {
        return Err(NetError::EmptyRate);
    }
    let verdicts = family
        .par_iter()
        .map(|net| check_rate(net, eps, eta, rate))
        .collect::<Result<Vec<bool>, NetError>>()?;
    Ok(match verdicts.iter().position(|ok| !ok) {
        Some(index) => AuditOutcome::Counterexample { index },
        None => AuditOutcome::AllPass,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MinRate {
    /// `E = {0, …, m}`, the smallest prefix set that works for the whole family.
    Found(RateSet),
    /// Member `index` has no witness at or below the horizon.
    Infeasible { index: usize },
}

impl MinRate {
    pub fn rate(&self) -> Option<&RateSet> {
        match self {
            MinRate::Found(e) => Some(e),
            MinRate::Infeasible { .. } => None,
        }
    }
}

/// Smallest `m ≤ horizon` such that `{0, …, m}` is a uniform rate for the family.
///
/// A prefix set `{0..m}` works for a member iff its least witness is `≤ m`, so
/// the answer is the largest least witness; every index up to the horizon is
/// scanned for each member.
pub fn brute_min_uniform_rate<N: Net + Sync>(
    family: &[N],
    eps: &Rational,
    eta: &Sampling,
    horizon: Index,
) -> Result<MinRate, NetError> {
    if eps.is_negative() {
        return Err(NetError::NegativeEpsilon);
    }
    require_nat(eta)?;
    let firsts = family
        .par_iter()
        .map(|net| super::metastable_witness(net, eps, eta, horizon))
        .collect::<Result<Vec<Option<Index>>, NetError>>()?;
    let mut m = 0;
    for (index, w) in firsts.into_iter().enumerate() {
        match w {
            Some(w) => m = m.max(w),
            None => return Ok(MinRate::Infeasible { index }),
        }
    }
    Ok(MinRate::Found(prefix_rate(m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directed::{sampling_from_function, Window};
    use crate::netcore::{SequenceSpec, Tail};
    use crate::rational::{int, ratio};

    fn shift(c: usize) -> Sampling {
        sampling_from_function(IncreasingFn::shift(c)).unwrap()
    }

    fn step_at(m: usize) -> SequenceSpec {
        // a_n = 0 for n ≤ m, 1 afterwards
        let mut v = vec![int(0); m + 1];
        v.push(int(1));
        SequenceSpec::scalar(v, Tail::Constant).unwrap()
    }

    #[test]
    fn step_sequence_defeats_singleton_rate() {
        let m = 6;
        let eta = shift(1);
        // η_M = {M, M+1} straddles the step
        assert_eq!(eta.window(m).unwrap(), Window::Interval { lo: m, hi: m + 1 });
        for eps in [ratio(1, 10), ratio(1, 2), ratio(99, 100)] {
            assert!(!check_rate(&step_at(m), &eps, &eta, &BTreeSet::from([m])).unwrap());
        }
    }

    #[test]
    fn constant_and_monotone_examples() {
        let c = SequenceSpec::scalar(vec![int(2)], Tail::Constant).unwrap();
        assert!(check_rate(&c, &int(0), &shift(3), &BTreeSet::from([0])).unwrap());

        let mono = SequenceSpec::scalar(
            vec![int(0), ratio(3, 10), ratio(1, 2), ratio(3, 5), ratio(13, 20)],
            Tail::Constant,
        )
        .unwrap();
        let e = BTreeSet::from([0, 1, 2]);
        assert_eq!(first_witness_in(&mono, &ratio(2, 5), &shift(1), &e).unwrap(), Some(0));
        assert!(check_rate(&mono, &ratio(2, 5), &shift(1), &e).unwrap());
        // with ε = 1/10 the first two windows fail and η_2 = {2,3} has spread 1/10
        assert_eq!(first_witness_in(&mono, &ratio(1, 10), &shift(1), &e).unwrap(), Some(2));
    }

    #[test]
    fn empty_rate_is_an_error() {
        let c = SequenceSpec::scalar(vec![int(2)], Tail::Constant).unwrap();
        assert_eq!(
            check_rate(&c, &int(1), &shift(1), &BTreeSet::new()),
            Err(NetError::EmptyRate)
        );
    }

    #[test]
    fn monotone_rate_examples() {
        assert_eq!(monotone_uniform_rate(&int(1), &IncreasingFn::shift(1)).unwrap(), prefix_rate(1));
        assert_eq!(
            monotone_uniform_rate(&ratio(2, 5), &IncreasingFn::affine(2, 1)).unwrap(),
            prefix_rate(7)
        );
        assert_eq!(
            monotone_uniform_rate(&ratio(1, 2), &IncreasingFn::shift(1)).unwrap(),
            prefix_rate(2)
        );
        assert_eq!(
            monotone_uniform_rate(&int(0), &IncreasingFn::shift(1)),
            Err(NetError::NonpositiveEpsilon)
        );
    }

    #[test]
    fn audit_examples() {
        let eta = shift(1);
        let empty: Vec<SequenceSpec> = Vec::new();
        assert_eq!(
            uniform_rate_audit(&empty, &ratio(1, 2), &eta, &prefix_rate(0)).unwrap(),
            AuditOutcome::AllPass
        );
        let fam = vec![
            SequenceSpec::scalar(vec![int(0)], Tail::Constant).unwrap(),
            step_at(4),
            step_at(3),
        ];
        assert_eq!(
            uniform_rate_audit(&fam, &ratio(1, 2), &eta, &BTreeSet::from([4])).unwrap(),
            AuditOutcome::Counterexample { index: 1 }
        );
    }

    #[test]
    fn brute_minimum_examples() {
        let eta = shift(1);
        let consts: Vec<_> = (0..4)
            .map(|k| SequenceSpec::scalar(vec![int(k)], Tail::Constant).unwrap())
            .collect();
        assert_eq!(
            brute_min_uniform_rate(&consts, &ratio(1, 2), &eta, 10).unwrap(),
            MinRate::Found(prefix_rate(0))
        );
        let alternating = SequenceSpec::scalar(vec![int(1), int(-1)], Tail::Periodic(2)).unwrap();
        let fam = vec![consts[0].clone(), alternating];
        assert_eq!(
            brute_min_uniform_rate(&fam, &ratio(19, 10), &eta, 50).unwrap(),
            MinRate::Infeasible { index: 1 }
        );
    }

    #[test]
    fn rate_spec_validation() {
        assert_eq!(RateSpec::single(BTreeSet::new()), Err(NetError::EmptyRate));
        let bad = BTreeMap::from([(ratio(1, 4), prefix_rate(1))]);
        assert!(RateSpec::per_epsilon(bad, ratio(1, 2)).is_err());
        let ok = RateSpec::from_cauchy_modulus(BTreeMap::from([(ratio(1, 2), 7)])).unwrap();
        assert_eq!(ok.rate_for(&ratio(1, 2), None), Some(&BTreeSet::from([7])));
        assert_eq!(ok.rate_for(&ratio(1, 3), None), None);
        let both = RateSpec::new(
            RateKind::PerEpsilonEta(BTreeMap::from([((ratio(1, 2), "n+1".to_string()), prefix_rate(2))])),
            rational::zero(),
        )
        .unwrap();
        assert_eq!(both.rate_for(&ratio(1, 2), Some("n+1")), Some(&prefix_rate(2)));
        assert_eq!(both.epsilons(), vec![ratio(1, 2)]);
    }
}
