//! Pointed directed sets and samplings over them.
//!
//! ℕ is kept symbolic: nothing here ever enumerates it. Operations that need
//! to look at "all" indices take an explicit finite support.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

pub type Index = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DirectedError {
    #[error("elements `{0}` and `{1}` have no common upper bound")]
    NotDirected(String, String),
    #[error("relation is not a partial order: {0}")]
    NotPartialOrder(String),
    #[error("anchor `{anchor}` is not below `{element}`")]
    AnchorNotLeast { anchor: String, element: String },
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("directed set has no elements")]
    Empty,
    #[error("sampling function is not strictly increasing with F(n) > n at n = {at} (F(n) = {value})")]
    NotStrictlyIncreasing { at: Index, value: Index },
    #[error("sampling function overflows at n = {0}")]
    Overflow(Index),
    #[error("explicit sampling is undefined at index {0}")]
    OutsideSupport(Index),
    #[error("index {0} is not an element of the directed set")]
    NotAnElement(Index),
}

/// A directed set with a least element (the anchor).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DirectedSet {
    /// ℕ with its usual order, anchored at 0.
    Nat,
    Finite(FiniteDirected),
}

/// A finite directed set; elements are addressed by position in `labels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDirected {
    labels: Vec<String>,
    leq: Vec<Vec<bool>>,
    anchor: Index,
}

pub fn make_nat() -> DirectedSet {
    DirectedSet::Nat
}

/// Builds and validates a finite directed set from `(a, b)` pairs meaning `a ≤ b`.
/// Reflexive pairs must be listed.
pub fn make_finite_directed<S: AsRef<str>>(
    elements: &[S],
    leq_pairs: &[(S, S)],
    anchor: &str,
) -> Result<DirectedSet, DirectedError> {
    if elements.is_empty() {
        return Err(DirectedError::Empty);
    }
    let labels: Vec<String> = elements.iter().map(|e| e.as_ref().to_owned()).collect();
    let mut position = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        if position.insert(l.as_str(), i).is_some() {
            return Err(DirectedError::DuplicateElement(l.clone()));
        }
    }
    let lookup = |s: &str| {
        position
            .get(s)
            .copied()
            .ok_or_else(|| DirectedError::UnknownElement(s.to_owned()))
    };
    let n = labels.len();
    let mut leq = vec![vec![false; n]; n];
    for (a, b) in leq_pairs {
        leq[lookup(a.as_ref())?][lookup(b.as_ref())?] = true;
    }
    let anchor = lookup(anchor)?;

    for i in 0..n {
        if !leq[i][i] {
            return Err(DirectedError::NotPartialOrder(format!(
                "`{}` ≤ `{}` missing (reflexivity)",
                labels[i], labels[i]
            )));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && leq[i][j] && leq[j][i] {
                return Err(DirectedError::NotPartialOrder(format!(
                    "`{}` and `{}` are mutually below each other (antisymmetry)",
                    labels[i], labels[j]
                )));
            }
            for k in 0..n {
                if leq[i][j] && leq[j][k] && !leq[i][k] {
                    return Err(DirectedError::NotPartialOrder(format!(
                        "`{}` ≤ `{}` ≤ `{}` but not `{}` ≤ `{}` (transitivity)",
                        labels[i], labels[j], labels[k], labels[i], labels[k]
                    )));
                }
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !(0..n).any(|k| leq[i][k] && leq[j][k]) {
                return Err(DirectedError::NotDirected(labels[i].clone(), labels[j].clone()));
            }
        }
    }
    if let Some(e) = (0..n).find(|&e| !leq[anchor][e]) {
        return Err(DirectedError::AnchorNotLeast {
            anchor: labels[anchor].clone(),
            element: labels[e].clone(),
        });
    }
    Ok(DirectedSet::Finite(FiniteDirected { labels, leq, anchor }))
}

impl DirectedSet {
    pub fn is_nat(&self) -> bool {
        matches!(self, DirectedSet::Nat)
    }

    pub fn anchor(&self) -> Index {
        match self {
            DirectedSet::Nat => 0,
            DirectedSet::Finite(f) => f.anchor,
        }
    }

    /// Number of elements, `None` for ℕ.
    pub fn len(&self) -> Option<usize> {
        match self {
            DirectedSet::Nat => None,
            DirectedSet::Finite(f) => Some(f.labels.len()),
        }
    }

    /// Always `false`: every directed set has an anchor.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: Index) -> bool {
        match self {
            DirectedSet::Nat => true,
            DirectedSet::Finite(f) => i < f.labels.len(),
        }
    }

    /// `i ≤ j`. Out-of-range indices of a finite set compare as `false`.
    pub fn leq(&self, i: Index, j: Index) -> bool {
        match self {
            DirectedSet::Nat => i <= j,
            DirectedSet::Finite(f) => {
                i < f.labels.len() && j < f.labels.len() && f.leq[i][j]
            }
        }
    }

    pub fn upper_bound(&self, i: Index, j: Index) -> Option<Index> {
        match self {
            DirectedSet::Nat => Some(i.max(j)),
            DirectedSet::Finite(f) => {
                (0..f.labels.len()).find(|&k| self.leq(i, k) && self.leq(j, k))
            }
        }
    }

    pub fn label(&self, i: Index) -> String {
        match self {
            DirectedSet::Nat => i.to_string(),
            DirectedSet::Finite(f) => f.labels.get(i).cloned().unwrap_or_else(|| format!("#{i}")),
        }
    }

    pub fn index_of(&self, label: &str) -> Option<Index> {
        match self {
            DirectedSet::Nat => label.trim().parse().ok(),
            DirectedSet::Finite(f) => f.labels.iter().position(|l| l == label),
        }
    }

    /// All elements of a finite set, `None` for ℕ.
    pub fn elements(&self) -> Option<std::ops::Range<Index>> {
        self.len().map(|n| 0..n)
    }

    /// The `(a, b)` pairs with `a ≤ b`, for serialization.
    pub fn leq_pairs(&self) -> Vec<(String, String)> {
        match self {
            DirectedSet::Nat => Vec::new(),
            DirectedSet::Finite(f) => {
                let n = f.labels.len();
                let mut pairs = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        if f.leq[i][j] {
                            pairs.push((f.labels[i].clone(), f.labels[j].clone()));
                        }
                    }
                }
                pairs
            }
        }
    }
}

/// Declaration that `F(i) = i + width` for every `i ≥ from`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffineTail {
    pub from: Index,
    pub width: Index,
}

type StepFn = Arc<dyn Fn(Index) -> Index + Send + Sync>;

/// A strictly increasing `F: ℕ → ℕ` with `F(n) > n`, generating `η_n = [n, F(n)]`.
#[derive(Clone)]
pub enum IncreasingFn {
    /// `F(n) = slope·n + offset`.
    Affine { slope: Index, offset: Index },
    /// `F(n) = head[n]` for `n < head.len()`, then `n + width`.
    Tabulated { head: Vec<Index>, width: Index },
    /// An arbitrary function, checked only at the points where it is evaluated.
    Custom {
        name: String,
        f: StepFn,
        affine_tail: Option<AffineTail>,
    },
}

impl fmt::Debug for IncreasingFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IncreasingFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IncreasingFn::Affine { slope, offset } => match slope {
                1 => write!(f, "n+{offset}"),
                _ => write!(f, "{slope}n+{offset}"),
            },
            IncreasingFn::Tabulated { head, width } => write!(f, "{head:?} then n+{width}"),
            IncreasingFn::Custom { name, .. } => f.write_str(name),
        }
    }
}

impl PartialEq for IncreasingFn {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                IncreasingFn::Affine { slope: a, offset: b },
                IncreasingFn::Affine { slope: c, offset: d },
            ) => a == c && b == d,
            (
                IncreasingFn::Tabulated { head: a, width: b },
                IncreasingFn::Tabulated { head: c, width: d },
            ) => a == c && b == d,
            (IncreasingFn::Custom { f: a, .. }, IncreasingFn::Custom { f: b, .. }) => {
                Arc::ptr_eq(a, b)
            }
            _ => false,
        }
    }
}

impl IncreasingFn {
    /// `F(n) = n + c`.
    pub fn shift(c: Index) -> Self {
        IncreasingFn::Affine { slope: 1, offset: c }
    }

    /// `F(n) = slope·n + offset`.
    pub fn affine(slope: Index, offset: Index) -> Self {
        IncreasingFn::Affine { slope, offset }
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(Index) -> Index + Send + Sync + 'static,
        affine_tail: Option<AffineTail>,
    ) -> Self {
        IncreasingFn::Custom {
            name: name.into(),
            f: Arc::new(f),
            affine_tail,
        }
    }

    fn raw(&self, n: Index) -> Result<Index, DirectedError> {
        match self {
            IncreasingFn::Affine { slope, offset } => slope
                .checked_mul(n)
                .and_then(|v| v.checked_add(*offset))
                .ok_or(DirectedError::Overflow(n)),
            IncreasingFn::Tabulated { head, width } => match head.get(n) {
                Some(v) => Ok(*v),
                None => n.checked_add(*width).ok_or(DirectedError::Overflow(n)),
            },
            IncreasingFn::Custom { f, .. } => Ok(f(n)),
        }
    }

    /// `F(n)`, checking `F(n) > n` and `F(n) > F(n-1)` at the evaluated point.
    pub fn eval(&self, n: Index) -> Result<Index, DirectedError> {
        let v = self.raw(n)?;
        if v <= n {
            return Err(DirectedError::NotStrictlyIncreasing { at: n, value: v });
        }
        if n > 0 && self.raw(n - 1)? >= v {
            return Err(DirectedError::NotStrictlyIncreasing { at: n, value: v });
        }
        Ok(v)
    }

    /// The k-fold iterate `F^(k)(0)`.
    pub fn iterate_from_zero(&self, k: u64) -> Result<Index, DirectedError> {
        let mut x = 0;
        for _ in 0..k {
            x = self.eval(x)?;
        }
        Ok(x)
    }

    /// Where `F(i) = i + w` is known to hold from some point on.
    pub fn affine_tail(&self) -> Option<AffineTail> {
        match self {
            IncreasingFn::Affine { slope: 1, offset } => Some(AffineTail { from: 0, width: *offset }),
            IncreasingFn::Affine { .. } => None,
            IncreasingFn::Tabulated { head, width } => Some(AffineTail {
                from: head.len(),
                width: *width,
            }),
            IncreasingFn::Custom { affine_tail, .. } => *affine_tail,
        }
    }

    /// Eager validation of the finitely described variants; custom functions
    /// are only probed at 0.
    pub fn validate(&self) -> Result<(), DirectedError> {
        match self {
            IncreasingFn::Affine { slope, offset } => {
                if *slope == 0 || (*slope == 1 && *offset == 0) {
                    return Err(DirectedError::NotStrictlyIncreasing {
                        at: 0,
                        value: *offset,
                    });
                }
                self.eval(0).map(|_| ())
            }
            IncreasingFn::Tabulated { head, width } => {
                if *width == 0 {
                    return Err(DirectedError::NotStrictlyIncreasing {
                        at: head.len(),
                        value: head.len(),
                    });
                }
                for n in 0..=head.len() {
                    self.eval(n)?;
                }
                Ok(())
            }
            IncreasingFn::Custom { .. } => self.eval(0).map(|_| ()),
        }
    }
}

/// A finite nonempty window `η_i ⊆ D≥i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Window {
    /// `{lo, lo+1, …, hi}`.
    Interval { lo: Index, hi: Index },
    /// Sorted, deduplicated.
    Set(Vec<Index>),
}

impl Window {
    pub fn iter(&self) -> Box<dyn Iterator<Item = Index> + '_> {
        match self {
            Window::Interval { lo, hi } => Box::new(*lo..=*hi),
            Window::Set(v) => Box::new(v.iter().copied()),
        }
    }

    pub fn min(&self) -> Option<Index> {
        match self {
            Window::Interval { lo, .. } => Some(*lo),
            Window::Set(v) => v.first().copied(),
        }
    }

    pub fn max(&self) -> Option<Index> {
        match self {
            Window::Interval { hi, .. } => Some(*hi),
            Window::Set(v) => v.last().copied(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Window::Interval { lo, hi } => hi - lo + 1,
            Window::Set(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_vec(&self) -> Vec<Index> {
        self.iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SamplingKind {
    FromFunction(IncreasingFn),
    Explicit(BTreeMap<Index, BTreeSet<Index>>),
}

/// A sampling `η = (η_i : i ∈ D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampling {
    kind: SamplingKind,
    domain: DirectedSet,
}

/// `η_N = [N, F(N)]` over ℕ.
pub fn sampling_from_function(f: IncreasingFn) -> Result<Sampling, DirectedError> {
    f.validate()?;
    Ok(Sampling {
        kind: SamplingKind::FromFunction(f),
        domain: DirectedSet::Nat,
    })
}

impl Sampling {
    /// An explicit table `i ↦ η_i`. Not validated; see [`validate_sampling`].
    pub fn explicit(map: BTreeMap<Index, BTreeSet<Index>>, domain: DirectedSet) -> Self {
        Sampling {
            kind: SamplingKind::Explicit(map),
            domain,
        }
    }

    pub fn kind(&self) -> &SamplingKind {
        &self.kind
    }

    pub fn domain(&self) -> &DirectedSet {
        &self.domain
    }

    pub fn function(&self) -> Option<&IncreasingFn> {
        match &self.kind {
            SamplingKind::FromFunction(f) => Some(f),
            SamplingKind::Explicit(_) => None,
        }
    }

    pub fn affine_tail(&self) -> Option<AffineTail> {
        self.function().and_then(IncreasingFn::affine_tail)
    }

    /// `η_i`.
    pub fn window(&self, i: Index) -> Result<Window, DirectedError> {
        match &self.kind {
            SamplingKind::FromFunction(f) => Ok(Window::Interval { lo: i, hi: f.eval(i)? }),
            SamplingKind::Explicit(map) => map
                .get(&i)
                .map(|s| Window::Set(s.iter().copied().collect()))
                .ok_or(DirectedError::OutsideSupport(i)),
        }
    }

    /// The indices an explicit table is defined on.
    pub fn explicit_support(&self) -> Option<Vec<Index>> {
        match &self.kind {
            SamplingKind::Explicit(map) => Some(map.keys().copied().collect()),
            SamplingKind::FromFunction(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationReason {
    NotAnElement,
    Undefined,
    Empty,
    /// `j ∈ η_i` but not `i ≤ j`.
    OutsideTail(Index),
    Function(DirectedError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingViolation {
    pub index: Index,
    pub reason: ViolationReason,
}

impl fmt::Display for SamplingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.reason {
            ViolationReason::NotAnElement => write!(f, "{} is not an element", self.index),
            ViolationReason::Undefined => write!(f, "η_{} is undefined", self.index),
            ViolationReason::Empty => write!(f, "η_{} is empty", self.index),
            ViolationReason::OutsideTail(j) => write!(f, "{j} ∈ η_{} lies outside D≥{}", self.index, self.index),
            ViolationReason::Function(e) => write!(f, "η_{}: {e}", self.index),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingReport {
    pub checked: usize,
    pub violation: Option<SamplingViolation>,
}

impl SamplingReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks the sampling clauses at every index of `support`, stopping at the
/// first violation. For a finite `domain`, pass `None` to check every element;
/// over ℕ a support is required (`None` checks nothing but an explicit table's keys).
pub fn validate_sampling(
    eta: &Sampling,
    domain: &DirectedSet,
    support: Option<&[Index]>,
) -> SamplingReport {
    let indices: Vec<Index> = match support {
        Some(s) => s.to_vec(),
        None => match (domain.elements(), eta.explicit_support()) {
            (Some(all), _) => all.collect(),
            (None, Some(keys)) => keys,
            (None, None) => Vec::new(),
        },
    };
    let mut checked = 0;
    for i in indices {
        checked += 1;
        let fail = |reason| SamplingReport {
            checked,
            violation: Some(SamplingViolation { index: i, reason }),
        };
        if !domain.contains(i) {
            return fail(ViolationReason::NotAnElement);
        }
        let window = match eta.window(i) {
            Ok(w) => w,
            Err(DirectedError::OutsideSupport(_)) => return fail(ViolationReason::Undefined),
            Err(e) => return fail(ViolationReason::Function(e)),
        };
        if window.is_empty() {
            return fail(ViolationReason::Empty);
        }
        let outside = window.iter().find(|&j| !domain.contains(j) || !domain.leq(i, j));
        if let Some(j) = outside {
            return fail(ViolationReason::OutsideTail(j));
        }
    }
    SamplingReport {
        checked,
        violation: None,
    }
}
