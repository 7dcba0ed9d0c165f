use std::borrow::Cow;

use num::Signed;

use super::NetError;
use crate::directed::Index;
use crate::rational::{self, Rational};

/// A point of `ℚ^k` under the sup metric. Scalars are 1-tuples.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(pub Vec<Rational>);

impl Point {
    pub fn scalar(q: Rational) -> Self {
        Point(vec![q])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The single coordinate of a scalar point.
    pub fn as_scalar(&self) -> Option<&Rational> {
        match self.0.as_slice() {
            [q] => Some(q),
            _ => None,
        }
    }

    /// Sup-metric distance. Missing coordinates count as 0.
    pub fn dist(&self, other: &Point) -> Rational {
        let n = self.dim().max(other.dim());
        let zero = rational::zero();
        (0..n)
            .map(|k| {
                let a = self.0.get(k).unwrap_or(&zero);
                let b = other.0.get(k).unwrap_or(&zero);
                (a - b).abs()
            })
            .max()
            .unwrap_or_else(rational::zero)
    }
}

impl From<Rational> for Point {
    fn from(q: Rational) -> Self {
        Point::scalar(q)
    }
}

/// How the last values of a prefix repeat forever.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// The last prefix value repeats.
    Constant,
    /// The last `p` prefix values repeat verbatim, `p ≥ 1`.
    Periodic(usize),
}

impl Tail {
    pub fn window(&self) -> usize {
        match self {
            Tail::Constant => 1,
            Tail::Periodic(p) => *p,
        }
    }
}

/// Exact values, or measured values compared with slack `tolerance`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NumericMode {
    Exact,
    Float { tolerance: Rational },
}

impl NumericMode {
    pub fn float_default() -> Self {
        NumericMode::Float {
            tolerance: rational::ratio(1, 1_000_000_000_000),
        }
    }

    pub fn tolerance(&self) -> Option<&Rational> {
        match self {
            NumericMode::Exact => None,
            NumericMode::Float { tolerance } => Some(tolerance),
        }
    }
}

/// A net over ℕ, i.e. a sequence `a_0, a_1, …` of points.
pub trait Net: Sync {
    fn point(&self, n: Index) -> Cow<'_, Point>;

    /// Comparison slack for metastability checks (`≤ ε + τ`); `None` is exact.
    fn tolerance(&self) -> Option<&Rational> {
        None
    }
}

impl<N: Net + ?Sized> Net for &N {
    fn point(&self, n: Index) -> Cow<'_, Point> {
        (**self).point(n)
    }

    fn tolerance(&self) -> Option<&Rational> {
        (**self).tolerance()
    }
}

/// A sequence given by an arbitrary function of the index. Only the bounded
/// operations apply to it; exact limits need a [`SequenceSpec`].
pub struct FnNet<F> {
    f: F,
}

impl<F: Fn(Index) -> Point + Sync> FnNet<F> {
    pub fn new(f: F) -> Self {
        FnNet { f }
    }
}

impl<F: Fn(Index) -> Point + Sync> Net for FnNet<F> {
    fn point(&self, n: Index) -> Cow<'_, Point> {
        Cow::Owned((self.f)(n))
    }
}

/// A finite prefix plus a declared constant or periodic tail.
///
/// With tail window length `w` (1 for constant, `p` for periodic) the tail
/// starts at `T = prefix.len() - w` and `a_n = prefix[T + (n - T) mod w]` for
/// `n ≥ T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSpec {
    prefix: Vec<Point>,
    tail: Tail,
    bound: Rational,
    anchor: Option<Point>,
    mode: NumericMode,
}

impl SequenceSpec {
    /// Declared bound defaults to the diameter of the values.
    pub fn new(prefix: Vec<Point>, tail: Tail) -> Result<Self, NetError> {
        if prefix.is_empty() {
            return Err(NetError::EmptyPrefix);
        }
        let window = tail.window();
        if window == 0 {
            return Err(NetError::ZeroPeriod);
        }
        if window > prefix.len() {
            return Err(NetError::TailLongerThanPrefix {
                period: window,
                len: prefix.len(),
            });
        }
        let dim = prefix[0].dim();
        if let Some(n) = prefix.iter().position(|p| p.dim() != dim) {
            return Err(NetError::DimensionMismatch { index: n });
        }
        let bound = diameter(&prefix);
        Ok(SequenceSpec {
            prefix,
            tail,
            bound,
            anchor: None,
            mode: NumericMode::Exact,
        })
    }

    pub fn scalar(values: Vec<Rational>, tail: Tail) -> Result<Self, NetError> {
        SequenceSpec::new(values.into_iter().map(Point::scalar).collect(), tail)
    }

    /// Measured data: floats are converted exactly and compared with `tolerance`.
    pub fn from_floats(values: &[f64], tail: Tail, tolerance: Option<Rational>) -> Result<Self, NetError> {
        let values = values
            .iter()
            .enumerate()
            .map(|(i, x)| rational::from_f64(*x).ok_or(NetError::NonFinite { index: i }))
            .collect::<Result<Vec<_>, _>>()?;
        let mode = match tolerance {
            Some(tolerance) => NumericMode::Float { tolerance },
            None => NumericMode::float_default(),
        };
        Ok(SequenceSpec::scalar(values, tail)?.with_mode(mode))
    }

    /// Declares `C` with all pairwise distances `≤ C`.
    pub fn with_bound(mut self, bound: Rational) -> Result<Self, NetError> {
        if bound < self.bound {
            return Err(NetError::BoundViolated {
                bound: rational::format(&bound),
                detail: format!("diameter is {}", rational::format(&self.bound)),
            });
        }
        self.bound = bound;
        Ok(self)
    }

    /// Declares `C` together with an anchor `x₀`, requiring `d(a_i, x₀) ≤ C/2`.
    pub fn with_anchor(mut self, anchor: Point, bound: Rational) -> Result<Self, NetError> {
        let radius = rational::half(&bound);
        if let Some(i) = self.prefix.iter().position(|p| p.dist(&anchor) > radius) {
            return Err(NetError::BoundViolated {
                bound: rational::format(&bound),
                detail: format!("a_{i} lies farther than C/2 from the anchor"),
            });
        }
        self.bound = bound;
        self.anchor = Some(anchor);
        Ok(self)
    }

    pub fn with_mode(mut self, mode: NumericMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn prefix(&self) -> &[Point] {
        &self.prefix
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    pub fn anchor(&self) -> Option<&Point> {
        self.anchor.as_ref()
    }

    pub fn mode(&self) -> &NumericMode {
        &self.mode
    }

    pub fn dim(&self) -> usize {
        self.prefix[0].dim()
    }

    /// `T`, the first index of the repeating window.
    pub fn tail_start(&self) -> Index {
        self.prefix.len() - self.tail.window()
    }

    /// `p`; 1 for a constant tail.
    pub fn period(&self) -> usize {
        self.tail.window()
    }

    pub fn tail_values(&self) -> &[Point] {
        &self.prefix[self.tail_start()..]
    }

    pub fn value(&self, n: Index) -> &Point {
        let t = self.tail_start();
        if n < self.prefix.len() {
            &self.prefix[n]
        } else {
            &self.prefix[t + (n - t) % self.period()]
        }
    }

    /// The scalar value `a_n`, for one-dimensional sequences.
    pub fn scalar_value(&self, n: Index) -> Option<&Rational> {
        self.value(n).as_scalar()
    }

    /// Whether every tail value coincides (constant tail or constant-valued period).
    pub fn has_constant_valued_tail(&self) -> bool {
        let tail = self.tail_values();
        tail.iter().all(|p| p == &tail[0])
    }

    /// The same sequence described with tail start `start ≥ T` and a period
    /// that is a multiple of the current one.
    pub fn relayout(&self, start: Index, period: usize) -> Result<SequenceSpec, NetError> {
        if start < self.tail_start() || period == 0 || !period.is_multiple_of(self.period()) {
            return Err(NetError::Relayout {
                start,
                period,
                tail_start: self.tail_start(),
                own_period: self.period(),
            });
        }
        let prefix = (0..start + period).map(|n| self.value(n).clone()).collect();
        let tail = if period == 1 { Tail::Constant } else { Tail::Periodic(period) };
        let mut out = SequenceSpec::new(prefix, tail)?;
        out.bound = self.bound.clone();
        out.anchor = self.anchor.clone();
        out.mode = self.mode.clone();
        Ok(out)
    }
}

impl Net for SequenceSpec {
    fn point(&self, n: Index) -> Cow<'_, Point> {
        Cow::Borrowed(self.value(n))
    }

    fn tolerance(&self) -> Option<&Rational> {
        self.mode.tolerance()
    }
}

/// Largest pairwise sup distance.
pub(crate) fn diameter(points: &[Point]) -> Rational {
    let Some(first) = points.first() else {
        return rational::zero();
    };
    (0..first.dim())
        .map(|k| {
            let lo = points.iter().map(|p| &p.0[k]).min().unwrap();
            let hi = points.iter().map(|p| &p.0[k]).max().unwrap();
            hi - lo
        })
        .max()
        .unwrap_or_else(rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn scalars(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn tail_indexing() {
        // 0, 10 | 0, 1, 0, 1, ...
        let s = SequenceSpec::scalar(scalars(&[0, 10, 0, 1]), Tail::Periodic(2)).unwrap();
        assert_eq!(s.tail_start(), 2);
        let got: Vec<_> = (0..8).map(|n| s.scalar_value(n).unwrap().clone()).collect();
        assert_eq!(got, scalars(&[0, 10, 0, 1, 0, 1, 0, 1]));

        let c = SequenceSpec::scalar(scalars(&[3, 5]), Tail::Constant).unwrap();
        assert_eq!(c.scalar_value(1000), Some(&int(5)));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(SequenceSpec::new(vec![], Tail::Constant), Err(NetError::EmptyPrefix)));
        assert!(matches!(
            SequenceSpec::scalar(scalars(&[1]), Tail::Periodic(2)),
            Err(NetError::TailLongerThanPrefix { .. })
        ));
        assert!(matches!(
            SequenceSpec::scalar(scalars(&[1]), Tail::Periodic(0)),
            Err(NetError::ZeroPeriod)
        ));
        let mixed = vec![Point::scalar(int(0)), Point(vec![int(0), int(1)])];
        assert!(matches!(
            SequenceSpec::new(mixed, Tail::Constant),
            Err(NetError::DimensionMismatch { index: 1 })
        ));
    }

    #[test]
    fn bounds() {
        let s = SequenceSpec::scalar(scalars(&[0, 3, 1]), Tail::Constant).unwrap();
        assert_eq!(s.bound(), &int(3));
        assert!(s.clone().with_bound(int(2)).is_err());
        assert!(s.clone().with_bound(int(4)).is_ok());
        assert!(s.clone().with_anchor(Point::scalar(ratio(3, 2)), int(3)).is_ok());
        assert!(s.with_anchor(Point::scalar(int(0)), int(3)).is_err());
    }

    #[test]
    fn relayout_preserves_values() {
        let s = SequenceSpec::scalar(scalars(&[7, 1, 2]), Tail::Periodic(2)).unwrap();
        let r = s.relayout(3, 4).unwrap();
        assert_eq!(r.tail_start(), 3);
        assert_eq!(r.period(), 4);
        for n in 0..40 {
            assert_eq!(s.value(n), r.value(n));
        }
        assert!(s.relayout(0, 2).is_err());
        assert!(s.relayout(3, 3).is_err());
    }

    #[test]
    fn sup_metric() {
        let a = Point(vec![int(0), int(5)]);
        let b = Point(vec![int(2), int(1)]);
        assert_eq!(a.dist(&b), int(4));
        assert_eq!(diameter(&[a.clone(), b.clone(), Point(vec![int(1), int(3)])]), int(4));
    }

    #[test]
    fn floats_are_ingested_exactly() {
        let s = SequenceSpec::from_floats(&[0.5, 0.25], Tail::Constant, None).unwrap();
        assert_eq!(s.scalar_value(0), Some(&ratio(1, 2)));
        assert!(s.tolerance().is_some());
        assert!(SequenceSpec::from_floats(&[f64::NAN], Tail::Constant, None).is_err());
    }
}
