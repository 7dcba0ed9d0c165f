use num::{Signed, Zero};

use super::sequence::{Net, SequenceSpec};
use super::NetError;
use crate::directed::{Index, Sampling};
use crate::rational::{self, Rational};

/// `osc_S(a) = max_{m,n ∈ S} d(a_m, a_n)`; 0 for a singleton (and for `S = ∅`).
pub fn osc_segment<N: Net + ?Sized>(net: &N, indices: impl IntoIterator<Item = Index>) -> Rational {
    // Under the sup metric the diameter is the widest coordinate range.
    let mut lo: Vec<Rational> = Vec::new();
    let mut hi: Vec<Rational> = Vec::new();
    for n in indices {
        let p = net.point(n);
        if lo.is_empty() {
            lo = p.0.clone();
            hi = p.0.clone();
            continue;
        }
        for (k, q) in p.0.iter().enumerate() {
            if k >= lo.len() {
                // ragged dimensions: fall back on zero-padding
                lo.push(rational::zero().min(q.clone()));
                hi.push(rational::zero().max(q.clone()));
                continue;
            }
            if q < &lo[k] {
                lo[k] = q.clone();
            }
            if q > &hi[k] {
                hi[k] = q.clone();
            }
        }
    }
    lo.iter()
        .zip(&hi)
        .map(|(a, b)| b - a)
        .max()
        .unwrap_or_else(rational::zero)
}

pub(crate) fn within<N: Net + ?Sized>(net: &N, value: &Rational, eps: &Rational) -> bool {
    match net.tolerance() {
        None => value <= eps,
        Some(tol) => value <= &(eps + tol),
    }
}

pub(crate) fn require_nat(eta: &Sampling) -> Result<(), NetError> {
    if eta.domain().is_nat() {
        Ok(())
    } else {
        Err(NetError::NotOverNat)
    }
}

/// Smallest `i ≤ search_bound` with `osc_{η_i}(a) ≤ ε`.
pub fn metastable_witness<N: Net + ?Sized>(
    net: &N,
    eps: &Rational,
    eta: &Sampling,
    search_bound: Index,
) -> Result<Option<Index>, NetError> {
    if eps.is_negative() {
        return Err(NetError::NegativeEpsilon);
    }
    require_nat(eta)?;
    for i in 0..=search_bound {
        let w = eta.window(i)?;
        if within(net, &osc_segment(net, w.iter()), eps) {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Past this index both the sequence tail and the affine part of the
/// sampling are in force, so `i ↦ osc_{η_i}` is periodic with period `p`
/// from `max(T, T′)` on; `[0, horizon]` covers a full period beyond that.
pub fn exactness_horizon(seq: &SequenceSpec, eta: &Sampling) -> Result<Index, NetError> {
    require_nat(eta)?;
    let tail = eta.affine_tail().ok_or(NetError::UnsupportedSampling)?;
    let start = seq.tail_start().max(tail.from);
    Ok(start + seq.period() * (tail.width + 1))
}

/// Exact `osc_η(a) = inf_i osc_{η_i}(a)` for a tail-structured sequence and
/// an affine-tail sampling.
pub fn osc_eta_exact(seq: &SequenceSpec, eta: &Sampling) -> Result<Rational, NetError> {
    let horizon = exactness_horizon(seq, eta)?;
    let mut best: Option<Rational> = None;
    for i in 0..=horizon {
        let v = osc_segment(seq, eta.window(i)?.iter());
        if v.is_zero() {
            return Ok(v);
        }
        if best.as_ref().is_none_or(|b| &v < b) {
            best = Some(v);
        }
    }
    Ok(best.expect("horizon range is nonempty"))
}


/// A value known only to bound the true quantity from above.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlaggedBound {
    pub value: Rational,
    pub upper_bound_only: bool,
}

/// `min_{i ≤ budget} osc_{η_i}(a)`, an upper bound on `osc_η(a)`.
pub fn osc_eta_upper<N: Net + ?Sized>(
    net: &N,
    eta: &Sampling,
    budget: Index,
) -> Result<FlaggedBound, NetError> {
    require_nat(eta)?;
    let mut best: Option<Rational> = None;
    for i in 0..=budget {
        let v = osc_segment(net, eta.window(i)?.iter());
        if best.as_ref().is_none_or(|b| &v < b) {
            best = Some(v);
        }
    }
    Ok(FlaggedBound {
        value: best.expect("budget range is nonempty"),
        upper_bound_only: true,
    })
}

/// Exact `osc(a)`: the diameter of the repeating tail values. The prefix never
/// matters because `osc` only sees what happens beyond every index.
pub fn osc_total_exact(seq: &SequenceSpec) -> Rational {
    super::sequence::diameter(seq.tail_values())
}

/// `a` is ε-Cauchy iff `osc(a) ≤ ε`.
pub fn eps_cauchy_exact(seq: &SequenceSpec, eps: &Rational) -> bool {
    within(seq, &osc_total_exact(seq), eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directed::{sampling_from_function, IncreasingFn};
    use crate::netcore::{FnNet, Point, Tail};
    use crate::rational::{int, ratio};

    fn seq(v: &[Rational], tail: Tail) -> SequenceSpec {
        SequenceSpec::scalar(v.to_vec(), tail).unwrap()
    }

    fn alternating() -> SequenceSpec {
        seq(&[int(1), int(-1)], Tail::Periodic(2))
    }

    fn shift(c: usize) -> Sampling {
        sampling_from_function(IncreasingFn::shift(c)).unwrap()
    }

    fn harmonic() -> FnNet<impl Fn(Index) -> Point + Sync> {
        FnNet::new(|n| Point::scalar(ratio(1, n as i64 + 1)))
    }

    #[test]
    fn segment_examples() {
        let c = seq(&[int(4)], Tail::Constant);
        assert_eq!(osc_segment(&c, 0..10), int(0));
        assert_eq!(osc_segment(&alternating(), [3, 4]), int(2));
        assert_eq!(osc_segment(&harmonic(), 0..5), ratio(4, 5));
        assert_eq!(osc_segment(&harmonic(), [7]), int(0));
    }

    #[test]
    fn witness_examples() {
        let c = seq(&[int(4)], Tail::Constant);
        assert_eq!(metastable_witness(&c, &int(0), &shift(1), 10).unwrap(), Some(0));
        assert_eq!(metastable_witness(&alternating(), &int(1), &shift(1), 100).unwrap(), None);
        let mut v = vec![int(0); 5];
        v.push(int(1));
        let step = seq(&v, Tail::Constant);
        assert_eq!(metastable_witness(&step, &ratio(1, 2), &shift(1), 10).unwrap(), Some(0));
        assert!(matches!(
            metastable_witness(&step, &int(-1), &shift(1), 10),
            Err(NetError::NegativeEpsilon)
        ));
    }

    #[test]
    fn exact_eta_examples() {
        let c = seq(&[int(3), int(2), int(2)], Tail::Constant);
        assert_eq!(osc_eta_exact(&c, &shift(1)).unwrap(), int(0));
        assert_eq!(osc_eta_exact(&alternating(), &shift(1)).unwrap(), int(2));
        let s = seq(&[int(0), int(10), int(0), int(1)], Tail::Periodic(2));
        assert_eq!(osc_eta_exact(&s, &shift(1)).unwrap(), int(1));
        let doubling = sampling_from_function(IncreasingFn::affine(2, 1)).unwrap();
        assert!(matches!(osc_eta_exact(&s, &doubling), Err(NetError::UnsupportedSampling)));
    }

    #[test]
    fn upper_bound_examples() {
        let singleton = crate::directed::Sampling::explicit(
            [(0, [0].into_iter().collect())].into_iter().collect(),
            crate::directed::DirectedSet::Nat,
        );
        let b = osc_eta_upper(&alternating(), &singleton, 0).unwrap();
        assert_eq!(b.value, int(0));
        assert!(b.upper_bound_only);

        // min over i ≤ 10 of 1/(i+1) - 1/(i+2) is attained at i = 10: 1/11 - 1/12
        let b = osc_eta_upper(&harmonic(), &shift(1), 10).unwrap();
        assert_eq!(b.value, ratio(1, 132));

        let b = osc_eta_upper(&alternating(), &shift(1), 50).unwrap();
        assert_eq!(b.value, int(2));
        assert_eq!(b.value, osc_eta_exact(&alternating(), &shift(1)).unwrap());
    }

    #[test]
    fn total_oscillation_examples() {
        assert_eq!(osc_total_exact(&seq(&[int(9), int(1)], Tail::Constant)), int(0));
        let p = seq(&[int(0), int(1), ratio(1, 2)], Tail::Periodic(3));
        assert_eq!(osc_total_exact(&p), int(1));
        assert_eq!(osc_total_exact(&seq(&[int(3), int(3)], Tail::Periodic(2))), int(0));
    }

    #[test]
    fn cauchy_examples() {
        assert!(eps_cauchy_exact(&seq(&[int(5)], Tail::Constant), &int(0)));
        let p = seq(&[int(0), int(1)], Tail::Periodic(2));
        assert!(eps_cauchy_exact(&p, &int(1)));
        assert!(!eps_cauchy_exact(&p, &ratio(9, 10)));
        let thirds = seq(&[int(0), ratio(1, 3), ratio(2, 3)], Tail::Periodic(3));
        assert!(eps_cauchy_exact(&thirds, &ratio(2, 3)));
    }

    #[test]
    fn float_mode_uses_tolerance() {
        let s = SequenceSpec::from_floats(&[0.0, 0.1], Tail::Periodic(2), None).unwrap();
        // 0.1 as a double is slightly above 1/10
        assert!(osc_total_exact(&s) > ratio(1, 10));
        assert!(eps_cauchy_exact(&s, &ratio(1, 10)));
        let exact = s.clone().with_mode(crate::netcore::NumericMode::Exact);
        assert!(!eps_cauchy_exact(&exact, &ratio(1, 10)));
    }
}
