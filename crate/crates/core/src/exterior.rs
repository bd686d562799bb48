//! The exterior algebra Λ(h) on generators α¹,…,α^{2N}, paired as
//! (α^{2n−1}, α^{2n}).
//!
//! Monomials are bitmasks: bit `k−1` is set iff α^k occurs. The stored mask
//! stands for the product in ascending generator order.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::scalars::Ring;

/// Masks are `u32`, so at most 16 pairs fit.
pub const MAX_PAIRS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExteriorError {
    #[error("dimension mismatch: {left} vs {right} pairs")]
    DimensionMismatch { left: usize, right: usize },
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("{0} pairs exceed the supported maximum of {MAX_PAIRS}")]
    TooManyPairs(usize),
    #[error("element has odd-degree terms")]
    OddInput,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub u32);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn top(pairs: usize) -> Monomial {
        Monomial(full_mask(pairs))
    }

    pub fn degree(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_even(self) -> bool {
        self.degree() % 2 == 0
    }

    /// Generator indices (1-based) in ascending order.
    pub fn generators(self) -> Vec<usize> {
        (0..32).filter(|b| self.0 >> b & 1 == 1).map(|b| b as usize + 1).collect()
    }

    /// Bits of pair `n` (1-based) as a two-bit value: bit 0 is α^{2n−1},
    /// bit 1 is α^{2n}.
    pub fn pair_bits(self, n: usize) -> u32 {
        (self.0 >> (2 * (n - 1))) & 0b11
    }

    /// All 2^{2N} monomials in mask order.
    pub fn all(pairs: usize) -> impl Iterator<Item = Monomial> {
        (0..=full_mask(pairs)).map(Monomial)
    }

    pub fn all_even(pairs: usize) -> impl Iterator<Item = Monomial> {
        Self::all(pairs).filter(|m| m.is_even())
    }
}

fn full_mask(pairs: usize) -> u32 {
    if pairs == 0 {
        0
    } else {
        u32::MAX >> (32 - 2 * pairs)
    }
}

/// Sign of `a ∧ b` relative to the sorted product, or `None` when a
/// generator repeats.
pub fn wedge_sign(a: Monomial, b: Monomial) -> Option<bool> {
    if a.0 & b.0 != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = b.0;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a.0 >> j).count_ones();
        rest &= rest - 1;
    }
    Some(swaps % 2 == 1)
}

/// Element of Λ(h) for a fixed number of pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtElement<S> {
    pairs: usize,
    terms: BTreeMap<Monomial, S>,
}

impl<S: Ring> ExtElement<S> {
    pub fn zero(pairs: usize) -> Self {
        assert!(pairs <= MAX_PAIRS, "at most {MAX_PAIRS} pairs");
        ExtElement { pairs, terms: BTreeMap::new() }
    }

    pub fn one(pairs: usize) -> Self {
        Self::monomial(pairs, Monomial::ONE, S::one())
    }

    pub fn monomial(pairs: usize, m: Monomial, coeff: S) -> Self {
        let mut out = Self::zero(pairs);
        out.add_term(m, coeff);
        out
    }

    /// α^k for 1 ≤ k ≤ 2N.
    pub fn generator(pairs: usize, k: usize) -> Result<Self, ExteriorError> {
        check_index(k, 2 * pairs)?;
        Ok(Self::monomial(pairs, Monomial(1 << (k - 1)), S::one()))
    }

    /// The ordered product α^{k₁} ∧ ⋯ ∧ α^{k_s}.
    pub fn product_of_generators(pairs: usize, ks: &[usize]) -> Result<Self, ExteriorError> {
        let mut out = Self::one(pairs);
        for &k in ks {
            out = out.mul(&Self::generator(pairs, k)?);
        }
        Ok(out)
    }

    /// α¹α²⋯α^{2N}.
    pub fn top(pairs: usize) -> Self {
        Self::monomial(pairs, Monomial::top(pairs), S::one())
    }

    /// γ_j = α^{2j} α^{2j−1} = −α^{2j−1} α^{2j}.
    pub fn gamma(pairs: usize, j: usize) -> Result<Self, ExteriorError> {
        check_index(j, pairs)?;
        Ok(Self::monomial(pairs, Monomial(0b11 << (2 * (j - 1))), -S::one()))
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, &S)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: Monomial) -> S {
        self.terms.get(&m).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.is_even())
    }

    pub fn add_term(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(m, sum);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn wedge(&self, other: &Self) -> Result<Self, ExteriorError> {
        if self.pairs != other.pairs {
            return Err(ExteriorError::DimensionMismatch { left: self.pairs, right: other.pairs });
        }
        Ok(self.mul(other))
    }

    /// Wedge product; both operands must have the same number of pairs.
    pub(crate) fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.pairs, other.pairs);
        let mut out = Self::zero(self.pairs);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some(neg) = wedge_sign(*a, *b) {
                    let c = ca.clone() * cb.clone();
                    out.add_term(Monomial(a.0 | b.0), if neg { -c } else { c });
                }
            }
        }
        out
    }

    /// ω(x) = (−1)^{|x|} x.
    pub fn parity_involution(&self) -> Self {
        self.map_terms(|m, c| if m.is_even() { c.clone() } else { -c.clone() })
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zero(self.pairs);
        }
        self.map_terms(|_, c| c.clone() * s.clone())
    }

    pub fn even_part(&self) -> Self {
        self.filter(|m| m.is_even())
    }

    pub fn odd_part(&self) -> Self {
        self.filter(|m| !m.is_even())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.pairs, other.pairs);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_terms(|_, c| -c.clone())
    }

    /// Applies `f` coefficient-wise and converts to another ring.
    pub fn map_coeffs<T: Ring>(&self, f: impl Fn(&S) -> T) -> ExtElement<T> {
        let mut out = ExtElement::zero(self.pairs);
        for (m, c) in &self.terms {
            out.add_term(*m, f(c));
        }
        out
    }

    fn map_terms(&self, f: impl Fn(Monomial, &S) -> S) -> Self {
        let mut out = Self::zero(self.pairs);
        for (m, c) in &self.terms {
            out.add_term(*m, f(*m, c));
        }
        out
    }

    fn filter(&self, keep: impl Fn(Monomial) -> bool) -> Self {
        ExtElement {
            pairs: self.pairs,
            terms: self.terms.iter().filter(|(m, _)| keep(**m)).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }
}

fn check_index(index: usize, max: usize) -> Result<(), ExteriorError> {
    if index == 0 || index > max {
        Err(ExteriorError::IndexOutOfRange { index, max })
    } else {
        Ok(())
    }
}

impl<S: Ring + fmt::Display> fmt::Display for ExtElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let gens = m.generators();
            if gens.is_empty() {
                write!(f, "({c})")?;
            } else {
                let names: Vec<String> = gens.iter().map(|k| format!("a{k}")).collect();
                write!(f, "({c}) * {}", names.join("^"))?;
            }
        }
        Ok(())
    }
}
