use num::Signed;

use crate::rational::{self, Rational};

/// A bounded function `Ω → ℚ`, stored pointwise in the order of `Ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LInfFunction(pub Vec<Rational>);

impl LInfFunction {
    pub fn new(values: Vec<Rational>) -> Self {
        LInfFunction(values)
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        LInfFunction(vec![c; n])
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(n, rational::zero())
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, rational::one())
    }

    /// `χ_A` for a bitmask `A`.
    pub fn indicator(n: usize, set: u64) -> Self {
        LInfFunction(
            (0..n)
                .map(|k| if set >> k & 1 == 1 { rational::one() } else { rational::zero() })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    /// `‖f‖ = max |f(ω)|`.
    pub fn norm(&self) -> Rational {
        self.0.iter().map(|q| q.abs()).max().unwrap_or_else(rational::zero)
    }

    pub fn sup(&self) -> Rational {
        self.0.iter().max().cloned().unwrap_or_else(rational::zero)
    }

    pub fn inf(&self) -> Rational {
        self.0.iter().min().cloned().unwrap_or_else(rational::zero)
    }

    fn map(&self, f: impl Fn(&Rational) -> Rational) -> Self {
        LInfFunction(self.0.iter().map(f).collect())
    }

    fn zip(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        assert_eq!(self.len(), other.len(), "functions on different sample spaces");
        LInfFunction(self.0.iter().zip(&other.0).map(|(a, b)| f(a, b)).collect())
    }

    /// `f₊ = max(f, 0)`.
    pub fn pos(&self) -> Self {
        self.map(|q| q.clone().max(rational::zero()))
    }

    /// `f₋ = max(−f, 0)`, so `f = f₊ − f₋` and `|f| = f₊ + f₋`.
    pub fn neg(&self) -> Self {
        self.map(|q| (-q).max(rational::zero()))
    }

    pub fn abs(&self) -> Self {
        self.map(|q| q.abs())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|q| q * c)
    }

    /// Pointwise `f ∧ g`.
    pub fn meet(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.min(b).clone())
    }

    /// Pointwise `f ∨ g`.
    pub fn join(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.max(b).clone())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|q| !q.is_negative())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn decomposition() {
        let f = LInfFunction::new(vec![int(2), int(-3), ratio(1, 2), int(0)]);
        assert_eq!(f.pos().sub(&f.neg()), f);
        assert_eq!(f.pos().add(&f.neg()), f.abs());
        assert!(f.pos().is_nonnegative() && f.neg().is_nonnegative());
        assert_eq!(f.norm(), int(3));
        assert_eq!(f.sup(), int(2));
        assert_eq!(f.inf(), int(-3));
    }

    #[test]
    fn lattice_operations() {
        let f = LInfFunction::new(vec![int(1), int(4)]);
        let g = LInfFunction::new(vec![int(3), int(2)]);
        assert_eq!(f.meet(&g), LInfFunction::new(vec![int(1), int(2)]));
        assert_eq!(f.join(&g), LInfFunction::new(vec![int(3), int(4)]));
        assert_eq!(f.mul(&g), LInfFunction::new(vec![int(3), int(8)]));
        assert_eq!(LInfFunction::indicator(3, 0b101), LInfFunction::new(vec![int(1), int(0), int(1)]));
    }
}
