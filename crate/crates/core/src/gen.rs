//! Seeded random instances for property tests, acceptance runs and benches.
//!
//! All generators draw from a caller-supplied [`rand::Rng`]; [`rng`] builds
//! the ChaCha8 stream used throughout, and [`seed_from_env`] honours
//! `METASTABLE_SEED`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dct::DirectedFamily;
use crate::directed::{sampling_from_function, IncreasingFn, Sampling};
use crate::henson::{FiniteStructure, Formula, Func, FunctionData, SortData, Sort, Term, Value};
use crate::measure::{MeasureKind, MeasureStructure};
use crate::netcore::{Point, SequenceSpec, Tail};
use crate::rational::{self, int, ratio, Rational};

pub const SEED_VAR: &str = "METASTABLE_SEED";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `METASTABLE_SEED` if set and numeric, else `default`.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var(SEED_VAR)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}

fn grid<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64, denom: i64) -> Rational {
    ratio(rng.gen_range(lo..=hi), denom)
}

/// Tail-structured sequences with values on a `1/denom` grid.
#[derive(Debug, Clone)]
pub struct SequenceGen {
    pub max_prefix: usize,
    pub max_period: usize,
    pub denom: i64,
    /// Values are `k/denom` with `lo ≤ k ≤ hi`.
    pub lo: i64,
    pub hi: i64,
    pub dim: usize,
    /// Chance that a periodic tail repeats a single value.
    pub flat_tail: f64,
}

impl Default for SequenceGen {
    fn default() -> Self {
        SequenceGen {
            max_prefix: 8,
            max_period: 4,
            denom: 4,
            lo: -4,
            hi: 4,
            dim: 1,
            flat_tail: 0.2,
        }
    }
}

impl SequenceGen {
    fn value<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point((0..self.dim).map(|_| grid(rng, self.lo, self.hi, self.denom)).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SequenceSpec {
        let period = rng.gen_range(1..=self.max_period.min(self.max_prefix));
        let len = rng.gen_range(period..=self.max_prefix);
        let mut prefix: Vec<Point> = (0..len).map(|_| self.value(rng)).collect();
        let tail = if period == 1 && rng.gen_bool(0.5) {
            Tail::Constant
        } else {
            if rng.gen_bool(self.flat_tail) {
                let v = prefix[len - 1].clone();
                prefix[len - period..].fill(v);
            }
            Tail::Periodic(period)
        };
        SequenceSpec::new(prefix, tail).expect("generated prefix fits its tail")
    }
}

/// A nondecreasing sequence in `[0, 1]` on a `1/denom` grid, constant after `len` terms.
pub fn monotone_sequence<R: Rng + ?Sized>(rng: &mut R, len: usize, denom: i64) -> SequenceSpec {
    let mut ks: Vec<i64> = (0..len).map(|_| rng.gen_range(0..=denom)).collect();
    ks.sort_unstable();
    let values = ks.into_iter().map(|k| ratio(k, denom)).collect();
    SequenceSpec::scalar(values, Tail::Constant).expect("nonempty")
}

/// `F(n) = n + w`, or a short strictly increasing head followed by `n + w`.
pub fn affine_tail_fn<R: Rng + ?Sized>(rng: &mut R, max_width: usize) -> IncreasingFn {
    let width = rng.gen_range(1..=max_width);
    if rng.gen_bool(0.5) {
        return IncreasingFn::shift(width);
    }
    loop {
        let h = rng.gen_range(1..=3);
        let mut head = Vec::with_capacity(h);
        let mut last = 0;
        for n in 0..h {
            let v = (n + 1).max(last + 1) + rng.gen_range(0..=max_width);
            head.push(v);
            last = v;
        }
        let f = IncreasingFn::Tabulated { head, width };
        if f.validate().is_ok() {
            return f;
        }
    }
}

pub fn affine_tail_sampling<R: Rng + ?Sized>(rng: &mut R, max_width: usize) -> Sampling {
    sampling_from_function(affine_tail_fn(rng, max_width)).expect("validated")
}

/// Families of scalar slices over a random measure, with a tight `‖φ‖`.
#[derive(Debug, Clone)]
pub struct FamilyGen {
    pub max_omega: usize,
    pub slices: SequenceGen,
    pub weight_denom: i64,
    /// Chance that every slice has a constant tail.
    pub constant_tails: f64,
}

impl Default for FamilyGen {
    fn default() -> Self {
        FamilyGen {
            max_omega: 5,
            slices: SequenceGen::default(),
            weight_denom: 6,
            constant_tails: 0.2,
        }
    }
}

impl FamilyGen {
    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> MeasureStructure {
        let d = self.weight_denom;
        let kind = *[MeasureKind::Probability, MeasureKind::Finite, MeasureKind::Signed]
            .choose(rng)
            .expect("nonempty");
        let weights = match kind {
            MeasureKind::Probability => {
                let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=d)).collect();
                let total: i64 = raw.iter().sum();
                match total {
                    0 => (0..n).map(|_| ratio(1, n as i64)).collect(),
                    _ => raw.into_iter().map(|k| ratio(k, total)).collect(),
                }
            }
            MeasureKind::Finite => (0..n).map(|_| grid(rng, 0, 2 * d, d)).collect(),
            MeasureKind::Signed => (0..n).map(|_| grid(rng, -d, d, d)).collect(),
        };
        MeasureStructure::from_weights(weights, kind).expect("well-formed weights")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DirectedFamily {
        let n = rng.gen_range(1..=self.max_omega);
        let m = self.measure(rng, n);
        let constant = rng.gen_bool(self.constant_tails);
        let slices = (0..n)
            .map(|_| {
                let s = self.slices.sample(rng);
                if constant {
                    let mut prefix = s.prefix().to_vec();
                    prefix.truncate(prefix.len() - s.period() + 1);
                    SequenceSpec::new(prefix, Tail::Constant).expect("nonempty")
                } else {
                    s
                }
            })
            .collect();
        DirectedFamily::tight(m, slices).expect("shapes agree")
    }
}

/// Families over `|Ω| = omega` whose slices are nondecreasing on the grid
/// `{0, 1/levels, …, 1}`, each with `len` terms then constant, weighted by a
/// probability measure whose first atom has a weight from `first_weights`.
///
/// The class is finite; [`MonotoneSliceClass::enumerate`] lists every member
/// and [`MonotoneSliceClass::sample`] draws one at random. Needs `omega ≥ 2`.
#[derive(Debug, Clone)]
pub struct MonotoneSliceClass {
    pub omega: usize,
    pub levels: i64,
    pub len: usize,
    pub first_weights: Vec<Rational>,
}

impl Default for MonotoneSliceClass {
    fn default() -> Self {
        MonotoneSliceClass {
            omega: 2,
            levels: 4,
            len: 4,
            first_weights: vec![ratio(1, 4), ratio(1, 2), ratio(3, 4)],
        }
    }
}

impl MonotoneSliceClass {
    fn measure(&self, w: &Rational) -> MeasureStructure {
        let rest = (rational::one() - w) / int(self.omega as i64 - 1);
        let mut weights = vec![w.clone()];
        weights.resize(self.omega, rest);
        MeasureStructure::from_weights(weights, MeasureKind::Probability).expect("probability weights")
    }

    fn slice(&self, ks: &[i64]) -> SequenceSpec {
        SequenceSpec::scalar(ks.iter().map(|&k| ratio(k, self.levels)).collect(), Tail::Constant).expect("nonempty")
    }

    fn monotone_tuples(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for _ in 0..self.len {
            out = out
                .into_iter()
                .flat_map(|t: Vec<i64>| {
                    let from = t.last().copied().unwrap_or(0);
                    (from..=self.levels).map(move |k| {
                        let mut t = t.clone();
                        t.push(k);
                        t
                    })
                })
                .collect();
        }
        out
    }

    pub fn size(&self) -> usize {
        self.monotone_tuples().len().pow(self.omega as u32) * self.first_weights.len()
    }

    pub fn enumerate(&self) -> Vec<DirectedFamily> {
        let tuples = self.monotone_tuples();
        let mut choices: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..self.omega {
            choices = choices
                .into_iter()
                .flat_map(|c| {
                    (0..tuples.len()).map(move |k| {
                        let mut c = c.clone();
                        c.push(k);
                        c
                    })
                })
                .collect();
        }
        let mut out = Vec::with_capacity(choices.len() * self.first_weights.len());
        for w in &self.first_weights {
            let m = self.measure(w);
            for c in &choices {
                let slices = c.iter().map(|&k| self.slice(&tuples[k])).collect();
                out.push(DirectedFamily::new(m.clone(), slices, rational::one()).expect("slices in [0, 1]"));
            }
        }
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DirectedFamily {
        let w = self.first_weights.choose(rng).expect("nonempty weight list");
        let slices = (0..self.omega)
            .map(|_| {
                let mut ks: Vec<i64> = (0..self.len).map(|_| rng.gen_range(0..=self.levels)).collect();
                ks.sort_unstable();
                self.slice(&ks)
            })
            .collect();
        DirectedFamily::new(self.measure(w), slices, rational::one()).expect("slices in [0, 1]")
    }
}

/// One-sorted structures: points `p0, p1, …` at distinct positions of a
/// `1/denom` grid on `[0, 2]` (anchor `p0`), a real function `f` and a map `g`.
#[derive(Debug, Clone)]
pub struct StructureGen {
    pub max_points: usize,
    pub denom: i64,
}

impl Default for StructureGen {
    fn default() -> Self {
        StructureGen { max_points: 4, denom: 4 }
    }
}

pub const SORT: &str = "M";

impl StructureGen {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FiniteStructure {
        let n = rng.gen_range(1..=self.max_points);
        let mut slots: Vec<i64> = (0..=2 * self.denom).collect();
        slots.shuffle(rng);
        let pos: Vec<Rational> = slots[..n].iter().map(|&k| ratio(k, self.denom)).collect();
        let metric = pos
            .iter()
            .map(|a| pos.iter().map(|b| num::abs(a - b)).collect())
            .collect();
        let sort = SortData {
            name: SORT.into(),
            points: (0..n).map(|k| format!("p{k}")).collect(),
            metric,
            anchor: 0,
        };
        let f = FunctionData {
            domain: vec![0],
            range: Sort::Real,
            table: (0..n)
                .map(|k| (vec![k], Value::Real(grid(rng, -self.denom, self.denom, self.denom))))
                .collect(),
        };
        let g = FunctionData {
            domain: vec![0],
            range: Sort::base(SORT),
            table: (0..n).map(|k| (vec![k], Value::Point(0, rng.gen_range(0..n)))).collect(),
        };
        let functions = BTreeMap::from([("f".to_owned(), f), ("g".to_owned(), g)]);
        FiniteStructure::new(vec![sort], functions).expect("generated structure is valid")
    }
}

/// Closed formulas over the signature of [`StructureGen`].
#[derive(Debug, Clone)]
pub struct FormulaGen {
    pub max_depth: usize,
    pub denom: i64,
}

impl Default for FormulaGen {
    fn default() -> Self {
        FormulaGen { max_depth: 3, denom: 4 }
    }
}

impl FormulaGen {
    fn point<R: Rng + ?Sized>(&self, rng: &mut R, points: usize, scope: &[String]) -> Term {
        let base = if !scope.is_empty() && rng.gen_bool(0.7) {
            Term::var(scope.choose(rng).expect("nonempty").clone(), Sort::base(SORT))
        } else {
            Term::constant(format!("p{}", rng.gen_range(0..points)), SORT)
        };
        match rng.gen_bool(0.2) {
            true => Term::app(Func::User("g".into()), vec![base]),
            false => base,
        }
    }

    fn real<R: Rng + ?Sized>(&self, rng: &mut R, points: usize, scope: &[String]) -> Term {
        let mut p = || self.point(rng, points, scope);
        let (a, b) = (p(), p());
        let f = |t: Term| Term::app(Func::User("f".into()), vec![t]);
        match rng.gen_range(0..4) {
            0 | 1 => Term::metric(SORT, a, b),
            2 => f(a),
            _ => Term::app(Func::Abs, vec![Term::app(Func::Sub, vec![f(a), f(b)])]),
        }
    }

    fn build<R: Rng + ?Sized>(&self, rng: &mut R, points: usize, depth: usize, scope: &mut Vec<String>) -> Formula {
        let d = self.denom;
        if depth == 0 || rng.gen_bool(0.3) {
            let t = self.real(rng, points, scope);
            let r = grid(rng, -d / 2, 2 * d, d);
            return match rng.gen_bool(0.5) {
                true => Formula::le(t, r),
                false => Formula::ge(t, r),
            };
        }
        match rng.gen_range(0..4) {
            0 => Formula::and(self.build(rng, points, depth - 1, scope), self.build(rng, points, depth - 1, scope)),
            1 => Formula::or(self.build(rng, points, depth - 1, scope), self.build(rng, points, depth - 1, scope)),
            q => {
                let var = format!("x{}", scope.len());
                let radius = grid(rng, 1, 2 * d, d);
                scope.push(var.clone());
                let body = self.build(rng, points, depth - 1, scope);
                scope.pop();
                match q {
                    2 => Formula::exists(radius, var, Sort::base(SORT), body),
                    _ => Formula::forall(radius, var, Sort::base(SORT), body),
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, m: &FiniteStructure) -> Formula {
        let points = m.sort(SORT).map_or(1, |s| s.points.len());
        self.build(rng, points, self.max_depth, &mut Vec::new())
    }

    /// Moves each bound independently: mostly in the relaxing direction,
    /// sometimes not at all or the other way.
    pub fn perturb<R: Rng + ?Sized>(&self, rng: &mut R, phi: &Formula) -> Formula {
        let step = |rng: &mut R| ratio(rng.gen_range(-1..=4), 2 * self.denom);
        match phi {
            Formula::Le(t, r) => Formula::le(t.clone(), r + step(rng)),
            Formula::Ge(t, r) => Formula::ge(t.clone(), r - step(rng)),
            Formula::And(a, b) => Formula::and(self.perturb(rng, a), self.perturb(rng, b)),
            Formula::Or(a, b) => Formula::or(self.perturb(rng, a), self.perturb(rng, b)),
            Formula::Exists { radius, var, sort, body } => {
                let r = (radius + step(rng)).max(ratio(1, 4 * self.denom));
                Formula::exists(r, var.clone(), sort.clone(), self.perturb(rng, body))
            }
            Formula::Forall { radius, var, sort, body } => {
                let r = (radius - step(rng)).max(ratio(1, 4 * self.denom));
                Formula::forall(r, var.clone(), sort.clone(), self.perturb(rng, body))
            }
        }
    }
}
