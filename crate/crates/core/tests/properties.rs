use std::collections::BTreeSet;

use metastable_core::dct::{dct_inequality_check, integral_sequence, DirectedFamily};
use metastable_core::gen::{self, FamilyGen, FormulaGen, SequenceGen, StructureGen};
use metastable_core::henson::{
    approx_satisfies, gap, is_approximation, net_structure, parse_formula, relax, satisfies, weak_negation, xi_e,
    Assignment, NetSymbols,
};
use metastable_core::measure::{integrate, Algebra, LInfFunction, MeasureKind, MeasureStructure, TvMode};
use metastable_core::netcore::{
    check_rate, eps_cauchy_exact, exactness_horizon, metastable_witness, monotone_uniform_rate, osc_eta_exact,
    osc_eta_upper, osc_total_exact, RateSet, SequenceSpec,
};
use metastable_core::rational::{int, ratio};
use metastable_core::{make_nat, sampling_from_function, validate_sampling, IncreasingFn, Rational};
use num::{Signed, Zero};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-8i64..=8, 1i64..=6).prop_map(|(n, d)| ratio(n, d))
}

fn eps() -> impl Strategy<Value = Rational> {
    (0i64..=12).prop_map(|k| ratio(k, 4))
}

fn sequence(seed: u64) -> SequenceSpec {
    let mut rng = gen::rng(seed);
    let dim = if seed.is_multiple_of(3) { 2 } else { 1 };
    SequenceGen {
        dim,
        denom: 2,
        lo: -2,
        hi: 2,
        ..SequenceGen::default()
    }
    .sample(&mut rng)
}

fn rate_set(raw: Vec<usize>) -> RateSet {
    raw.into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn affine_samplings_are_valid(slope in 1usize..=4, offset in 0usize..=5) {
        let f = IncreasingFn::affine(slope, offset);
        prop_assume!(f.validate().is_ok());
        let eta = sampling_from_function(f).unwrap();
        let support: Vec<usize> = (0..60).collect();
        prop_assert!(validate_sampling(&eta, &make_nat(), Some(&support)).is_valid());
        for i in support {
            let w = eta.window(i).unwrap();
            prop_assert!(!w.is_empty());
            prop_assert!(w.min().unwrap() >= i);
        }
    }

    #[test]
    fn witnesses_persist_under_weaker_requests(
        seed in any::<u64>(),
        e in eps(),
        extra in 0i64..=4,
        base in proptest::collection::vec(0usize..10, 1..4),
        more in proptest::collection::vec(0usize..10, 0..4),
    ) {
        let seq = sequence(seed);
        let eta = gen::affine_tail_sampling(&mut gen::rng(seed ^ 1), 3);
        let small = rate_set(base.clone());
        let big = rate_set(base.into_iter().chain(more).collect());
        let looser = &e + ratio(extra, 4);
        if check_rate(&seq, &e, &eta, &small).unwrap() {
            prop_assert!(check_rate(&seq, &looser, &eta, &big).unwrap());
        }
    }

    #[test]
    fn osc_eta_is_the_metastability_threshold(seed in any::<u64>(), e in eps()) {
        let seq = sequence(seed);
        let eta = gen::affine_tail_sampling(&mut gen::rng(seed ^ 2), 3);
        let exact = osc_eta_exact(&seq, &eta).unwrap();
        let horizon = exactness_horizon(&seq, &eta).unwrap();
        let mut above: Vec<Rational> = (0..10).map(|k| &e + ratio(1, 1 << k)).collect();
        if exact > e {
            above.push(&e + (&exact - &e) / int(2));
        }
        let all = above
            .iter()
            .all(|e2| metastable_witness(&seq, e2, &eta, horizon).unwrap().is_some());
        prop_assert_eq!(exact <= e, all);
    }

    #[test]
    fn osc_eta_upper_decreases_to_the_exact_value(seed in any::<u64>()) {
        let seq = sequence(seed);
        let eta = gen::affine_tail_sampling(&mut gen::rng(seed ^ 3), 3);
        let exact = osc_eta_exact(&seq, &eta).unwrap();
        let horizon = exactness_horizon(&seq, &eta).unwrap();
        let values: Vec<Rational> =
            (0..=horizon + 4).map(|b| osc_eta_upper(&seq, &eta, b).unwrap().value).collect();
        prop_assert!(values.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(values.iter().all(|v| v >= &exact));
        prop_assert_eq!(&values[horizon], &exact);
    }

    #[test]
    fn cauchy_iff_total_oscillation_iff_every_osc_eta(seed in any::<u64>(), e in eps()) {
        let seq = sequence(seed);
        let total = osc_total_exact(&seq);
        let probes = [1usize, 2, 3, 20];
        let every = probes.iter().all(|&w| {
            osc_eta_exact(&seq, &sampling_from_function(IncreasingFn::shift(w)).unwrap()).unwrap() <= e
        });
        prop_assert_eq!(eps_cauchy_exact(&seq, &e), total <= e);
        prop_assert_eq!(total <= e, every);
    }

    #[test]
    fn zero_oscillation_means_constant_valued_tail(seed in any::<u64>()) {
        let seq = sequence(seed);
        let t = seq.tail_start();
        let flat = (t..t + seq.period()).all(|j| seq.value(j) == seq.value(t));
        prop_assert_eq!(osc_total_exact(&seq).is_zero(), flat);
        prop_assert_eq!(seq.has_constant_valued_tail(), flat);
    }

    #[test]
    fn declared_bound_dominates_oscillation(seed in any::<u64>(), slack in 0i64..=8) {
        let seq = sequence(seed);
        let bounded = seq.clone().with_bound(seq.bound() + ratio(slack, 4)).unwrap();
        prop_assert!(&osc_total_exact(&bounded) <= bounded.bound());
    }

    #[test]
    fn monotone_rate_works(seed in any::<u64>(), len in 1usize..30, denom in 1i64..=20, fi in 0usize..3, ei in 0usize..5) {
        let seq = gen::monotone_sequence(&mut gen::rng(seed), len, denom);
        let f = [IncreasingFn::shift(1), IncreasingFn::shift(2), IncreasingFn::affine(2, 1)][fi].clone();
        let e = [int(1), ratio(1, 2), ratio(2, 5), ratio(1, 4), ratio(1, 10)][ei].clone();
        let rate = monotone_uniform_rate(&e, &f).unwrap();
        prop_assert!(check_rate(&seq, &e, &sampling_from_function(f).unwrap(), &rate).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn weak_negation_reverses_approximation(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let m = StructureGen::default().sample(&mut rng);
        let fg = FormulaGen::default();
        let phi = fg.sample(&mut rng, &m);
        let psi = fg.perturb(&mut rng, &phi);
        prop_assert_eq!(
            is_approximation(&phi, &psi),
            is_approximation(&weak_negation(&psi), &weak_negation(&phi))
        );
        prop_assert!(is_approximation(&phi, &relax(&phi, &ratio(1, 8)).unwrap()));
    }

    #[test]
    fn satisfaction_implies_approximate_satisfaction(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let m = StructureGen::default().sample(&mut rng);
        let phi = FormulaGen::default().sample(&mut rng, &m);
        let none = Assignment::new();
        if satisfies(&m, &phi, &none).unwrap() {
            prop_assert!(approx_satisfies(&m, &phi, &none).unwrap());
        }
    }

    #[test]
    fn relaxation_is_stable_below_the_gap(seed in any::<u64>(), a in 1i64..100, b in 1i64..100) {
        let mut rng = gen::rng(seed);
        let m = StructureGen::default().sample(&mut rng);
        let phi = FormulaGen::default().sample(&mut rng, &m);
        let none = Assignment::new();
        let g = gap(&m, &phi, &none).unwrap();
        let s1 = satisfies(&m, &relax(&phi, &(&g * ratio(a, 100))).unwrap(), &none).unwrap();
        let s2 = satisfies(&m, &relax(&phi, &(&g * ratio(b, 100))).unwrap(), &none).unwrap();
        prop_assert_eq!(s1, s2);
    }

    #[test]
    fn failure_is_witnessed_by_a_weak_negation(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let m = StructureGen::default().sample(&mut rng);
        let phi = FormulaGen::default().sample(&mut rng, &m);
        let none = Assignment::new();
        let g = gap(&m, &phi, &none).unwrap();
        let witness = weak_negation(&relax(&phi, &(&g / int(2))).unwrap());
        prop_assert_eq!(
            !approx_satisfies(&m, &phi, &none).unwrap(),
            approx_satisfies(&m, &witness, &none).unwrap()
        );
    }

    #[test]
    fn printed_formulas_parse_back(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let m = StructureGen::default().sample(&mut rng);
        let phi = FormulaGen::default().sample(&mut rng, &m);
        let text = phi.to_string();
        let back = parse_formula(&text, m.signature()).unwrap();
        prop_assert_eq!(back, phi, "{}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn xi_formulas_agree_with_check_rate(
        seed in any::<u64>(),
        raw in proptest::collection::vec(0usize..6, 1..4),
        k in 0i64..=4,
    ) {
        let seq = SequenceGen { max_prefix: 6, max_period: 3, denom: 4, lo: 0, hi: 4, ..SequenceGen::default() }
            .sample(&mut gen::rng(seed));
        let eta = gen::affine_tail_sampling(&mut gen::rng(seed ^ 4), 2);
        let rate = rate_set(raw);
        let e = ratio(k, 4);
        let horizon = rate.iter().map(|&i| eta.window(i).unwrap().max().unwrap()).max().unwrap();
        let sym = NetSymbols::default();
        let m = net_structure(&seq, horizon, &sym).unwrap();
        let logical = (0..8).all(|j| {
            let xi = xi_e(&eta, &rate, &(&e + ratio(1, 8 << j)), &sym).unwrap();
            approx_satisfies(&m, &xi, &Assignment::new()).unwrap()
        });
        prop_assert_eq!(logical, check_rate(&seq, &e, &eta, &rate).unwrap());
    }
}

fn weights(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(small_rational(), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn total_variation_modes_agree(w in (1usize..=6).prop_flat_map(weights)) {
        let m = MeasureStructure::from_weights(w.clone(), MeasureKind::Signed).unwrap();
        let fast = m.total_variation(TvMode::Fast).unwrap();
        prop_assert_eq!(&fast, &m.total_variation(TvMode::Audit).unwrap());
        prop_assert_eq!(fast, w.iter().map(|x| x.abs()).sum::<Rational>());
    }

    #[test]
    fn total_variation_modes_agree_on_partition_algebras(
        w in weights(6),
        blocks in proptest::collection::vec(0usize..3, 6),
    ) {
        let masks: Vec<u64> = (0..3)
            .map(|b| blocks.iter().enumerate().filter(|(_, &x)| x == b).map(|(k, _)| 1u64 << k).sum())
            .filter(|&m| m != 0)
            .collect();
        let sets: BTreeSet<u64> = (0..1u64 << masks.len())
            .map(|pick| (0..masks.len()).filter(|j| pick >> j & 1 == 1).map(|j| masks[j]).sum())
            .collect();
        let omega = (0..6).map(|k| format!("w{k}")).collect();
        let m = MeasureStructure::new(omega, 0, w, Algebra::Explicit(sets.into_iter().collect()), MeasureKind::Signed)
            .unwrap();
        prop_assert_eq!(m.total_variation(TvMode::Fast).unwrap(), m.total_variation(TvMode::Audit).unwrap());
    }

    #[test]
    fn measure_is_modular(w in (1usize..=6).prop_flat_map(weights)) {
        let m = MeasureStructure::from_weights(w, MeasureKind::Signed).unwrap();
        for a in m.sets().unwrap() {
            for b in m.sets().unwrap() {
                prop_assert_eq!(
                    m.measure_of(a | b) + m.measure_of(a & b),
                    m.measure_of(a) + m.measure_of(b)
                );
            }
        }
    }

    #[test]
    fn positive_and_negative_parts(f in proptest::collection::vec(small_rational(), 1..8)) {
        let f = LInfFunction::new(f);
        prop_assert!(f.pos().is_nonnegative() && f.neg().is_nonnegative());
        prop_assert_eq!(f.pos().sub(&f.neg()), f.clone());
        prop_assert_eq!(f.pos().add(&f.neg()), f.abs());
    }

    #[test]
    fn integration_is_the_weighted_sum(
        (w, f) in (1usize..=6).prop_flat_map(|n| (weights(n), proptest::collection::vec(small_rational(), n))),
    ) {
        let m = MeasureStructure::from_weights(w.clone(), MeasureKind::Signed).unwrap();
        let f = LInfFunction::new(f);
        let expect: Rational = f.values().iter().zip(&w).map(|(a, b)| a * b).sum();
        prop_assert_eq!(integrate(&m, &f).unwrap(), expect);
        for a in m.sets().unwrap() {
            prop_assert_eq!(integrate(&m, &LInfFunction::indicator(w.len(), a)).unwrap(), m.measure_of(a));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dominated_oscillation(seed in any::<u64>()) {
        let fam = FamilyGen::default().sample(&mut gen::rng(seed));
        let c = dct_inequality_check(&fam).unwrap();
        prop_assert!(c.holds);
        prop_assert!(c.lhs <= c.rhs);
    }

    #[test]
    fn integral_sequence_is_pointwise(seed in any::<u64>()) {
        let fam = FamilyGen::default().sample(&mut gen::rng(seed));
        let i = integral_sequence(&fam).unwrap();
        for j in 0..30 {
            prop_assert_eq!(i.scalar_value(j).unwrap(), &integrate(fam.measure(), &fam.at(j)).unwrap());
        }
    }

    #[test]
    fn scaling_the_measure_scales_the_inequality(seed in any::<u64>(), n in 1i64..=9, d in 1i64..=5) {
        let fam: DirectedFamily = FamilyGen::default().sample(&mut gen::rng(seed));
        let lambda = ratio(n, d);
        let a = dct_inequality_check(&fam).unwrap();
        let b = dct_inequality_check(&fam.scale_measure(&lambda).unwrap()).unwrap();
        prop_assert_eq!(b.lhs, &lambda * &a.lhs);
        prop_assert_eq!(b.rhs, &lambda * &a.rhs);
    }
}
