//! The endomorphism algebra E = E₀ ⊕ E₁ with E₀ = Λ(h) ⋊ ℂℤ₂ and
//! E₁ = ℂe_T ⋊ ℂℤ₂, its centre, central forms, and the Hattori–Stallings
//! trace of finite-dimensional projective modules.
//!
//! Canonical basis of E (used for coordinates and central forms): the
//! monomials λ of Λ(h) in mask order, then the λκ, then e_T and κe_T. Its
//! dimension is 2·4^N + 2.

use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::exterior::{ExtElement, ExteriorError, Monomial};
use crate::linalg::{self, LinAlgError};
use crate::scalars::{Ring, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error("element is not central: {0}")]
    NotCentral(String),
    #[error("the pairing induced by the form is degenerate")]
    NonDegenerateRequired,
    #[error("pi . iota is not the identity on P")]
    SectionInvalid,
    #[error("map does not commute with the algebra action")]
    NotModuleMap,
    #[error("{what} is limited to N <= {max}, got N = {pairs}")]
    TooLarge { what: &'static str, max: usize, pairs: usize },
}

pub type Matrix<S> = Vec<Vec<S>>;

/// Element λ + μκ + a·e_T + b·κe_T of E.
#[derive(Clone, Debug, PartialEq)]
pub struct EElement<S> {
    pub u_plus: ExtElement<S>,
    pub u_kappa: ExtElement<S>,
    pub t_plus: S,
    pub t_kappa: S,
}

pub fn basis_dim(pairs: usize) -> usize {
    2 * (1 << (2 * pairs)) + 2
}

impl<S: Ring> EElement<S> {
    pub fn zero(pairs: usize) -> Self {
        EElement {
            u_plus: ExtElement::zero(pairs),
            u_kappa: ExtElement::zero(pairs),
            t_plus: S::zero(),
            t_kappa: S::zero(),
        }
    }

    /// 1_E = 1_Λ + e_T.
    pub fn one(pairs: usize) -> Self {
        EElement { t_plus: S::one(), ..Self::one_lambda(pairs) }
    }

    pub fn one_lambda(pairs: usize) -> Self {
        Self::from_lambda(ExtElement::one(pairs))
    }

    pub fn from_lambda(l: ExtElement<S>) -> Self {
        let pairs = l.pairs();
        EElement { u_plus: l, ..Self::zero(pairs) }
    }

    /// λκ.
    pub fn lambda_kappa(l: ExtElement<S>) -> Self {
        let pairs = l.pairs();
        EElement { u_kappa: l, ..Self::zero(pairs) }
    }

    /// κ acting on the untwisted summand.
    pub fn kappa(pairs: usize) -> Self {
        Self::lambda_kappa(ExtElement::one(pairs))
    }

    pub fn e_t(pairs: usize) -> Self {
        EElement { t_plus: S::one(), ..Self::zero(pairs) }
    }

    pub fn kappa_e_t(pairs: usize) -> Self {
        EElement { t_kappa: S::one(), ..Self::zero(pairs) }
    }

    pub fn generator(pairs: usize, k: usize) -> Result<Self, AlgebraError> {
        Ok(Self::from_lambda(ExtElement::generator(pairs, k)?))
    }

    pub fn pairs(&self) -> usize {
        self.u_plus.pairs()
    }

    pub fn is_zero(&self) -> bool {
        self.u_plus.is_zero() && self.u_kappa.is_zero() && self.t_plus.is_zero() && self.t_kappa.is_zero()
    }

    /// Product in E; E₀ · E₁ = 0 and κλ = ω(λ)κ.
    pub fn e_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        if self.pairs() != other.pairs() {
            return Err(ExteriorError::DimensionMismatch { left: self.pairs(), right: other.pairs() }.into());
        }
        Ok(self.mul(other))
    }

    pub(crate) fn mul(&self, other: &Self) -> Self {
        let (l1, m1) = (&self.u_plus, &self.u_kappa);
        let (l2, m2) = (&other.u_plus, &other.u_kappa);
        let mut u_plus = l1.mul(l2);
        let mut u_kappa = l1.mul(m2);
        if !m1.is_zero() {
            u_plus = u_plus.add(&m1.mul(&m2.parity_involution()));
            u_kappa = u_kappa.add(&m1.mul(&l2.parity_involution()));
        }
        let (a, b) = (&self.t_plus, &self.t_kappa);
        let (c, d) = (&other.t_plus, &other.t_kappa);
        EElement {
            u_plus,
            u_kappa,
            t_plus: a.clone() * c.clone() + b.clone() * d.clone(),
            t_kappa: a.clone() * d.clone() + b.clone() * c.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        EElement {
            u_plus: self.u_plus.add(&other.u_plus),
            u_kappa: self.u_kappa.add(&other.u_kappa),
            t_plus: self.t_plus.clone() + other.t_plus.clone(),
            t_kappa: self.t_kappa.clone() + other.t_kappa.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        EElement {
            u_plus: self.u_plus.scale(s),
            u_kappa: self.u_kappa.scale(s),
            t_plus: self.t_plus.clone() * s.clone(),
            t_kappa: self.t_kappa.clone() * s.clone(),
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// The canonical basis element with index `idx`.
    pub fn basis(pairs: usize, idx: usize) -> Self {
        let half = 1usize << (2 * pairs);
        if idx < half {
            Self::from_lambda(ExtElement::monomial(pairs, Monomial(idx as u32), S::one()))
        } else if idx < 2 * half {
            Self::lambda_kappa(ExtElement::monomial(pairs, Monomial((idx - half) as u32), S::one()))
        } else if idx == 2 * half {
            Self::e_t(pairs)
        } else {
            assert_eq!(idx, 2 * half + 1, "basis index out of range");
            Self::kappa_e_t(pairs)
        }
    }

    /// Nonzero coordinates in the canonical basis.
    pub fn coord_terms(&self) -> Vec<(usize, S)> {
        let half = 1usize << (2 * self.pairs());
        let mut out: Vec<(usize, S)> = self.u_plus.terms().map(|(m, c)| (m.0 as usize, c.clone())).collect();
        out.extend(self.u_kappa.terms().map(|(m, c)| (half + m.0 as usize, c.clone())));
        if !self.t_plus.is_zero() {
            out.push((2 * half, self.t_plus.clone()));
        }
        if !self.t_kappa.is_zero() {
            out.push((2 * half + 1, self.t_kappa.clone()));
        }
        out
    }

    pub fn coords(&self) -> Vec<S> {
        let mut v = vec![S::zero(); basis_dim(self.pairs())];
        for (i, c) in self.coord_terms() {
            v[i] = c;
        }
        v
    }

    pub fn from_coords(pairs: usize, v: &[S]) -> Self {
        let half = 1usize << (2 * pairs);
        let mut out = Self::zero(pairs);
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if i < half {
                out.u_plus.add_term(Monomial(i as u32), c.clone());
            } else if i < 2 * half {
                out.u_kappa.add_term(Monomial((i - half) as u32), c.clone());
            } else if i == 2 * half {
                out.t_plus = c.clone();
            } else {
                out.t_kappa = c.clone();
            }
        }
        out
    }

    pub fn map_coeffs<T: Ring>(&self, f: impl Fn(&S) -> T) -> EElement<T> {
        EElement {
            u_plus: self.u_plus.map_coeffs(&f),
            u_kappa: self.u_kappa.map_coeffs(&f),
            t_plus: f(&self.t_plus),
            t_kappa: f(&self.t_kappa),
        }
    }
}

impl<S: Ring + fmt::Display> fmt::Display for EElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.u_plus.is_zero() {
            parts.push(format!("[{}]", self.u_plus));
        }
        if !self.u_kappa.is_zero() {
            parts.push(format!("[{}]*k", self.u_kappa));
        }
        if !self.t_plus.is_zero() {
            parts.push(format!("({})*eT", self.t_plus));
        }
        if !self.t_kappa.is_zero() {
            parts.push(format!("({})*k*eT", self.t_kappa));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Algebra generators α¹,…,α^{2N}, κ, e_T, κe_T.
pub fn generators<S: Ring>(pairs: usize) -> Vec<EElement<S>> {
    let mut g: Vec<EElement<S>> =
        (1..=2 * pairs).map(|k| EElement::generator(pairs, k).expect("index in range")).collect();
    g.push(EElement::kappa(pairs));
    g.push(EElement::e_t(pairs));
    g.push(EElement::kappa_e_t(pairs));
    g
}

pub fn is_central<S: Ring>(x: &EElement<S>) -> bool {
    generators::<S>(x.pairs()).iter().all(|g| x.commutator(g).is_zero())
}

// ---------------------------------------------------------------------------
// Centre
// ---------------------------------------------------------------------------

/// Central element z_Λ + a·z₁ + b·z₂ + c·z₃ with z_Λ ∈ Λ(h)_ev,
/// z₁ = α¹⋯α^{2N}κ, z₂ = e_T(κ+1), z₃ = e_T(κ−1).
#[derive(Clone, Debug, PartialEq)]
pub struct ZElement<S> {
    pub z_lambda: ExtElement<S>,
    pub z_p: [S; 3],
}

/// dim Z(E) = 2^{2N−1} + 3.
pub fn centre_dim(pairs: usize) -> usize {
    (1 << (2 * pairs - 1)) + 3
}

impl<S: Ring> ZElement<S> {
    pub fn zero(pairs: usize) -> Self {
        ZElement { z_lambda: ExtElement::zero(pairs), z_p: [S::zero(), S::zero(), S::zero()] }
    }

    pub fn from_lambda(z: ExtElement<S>) -> Result<Self, AlgebraError> {
        if !z.is_even() {
            return Err(ExteriorError::OddInput.into());
        }
        let pairs = z.pairs();
        Ok(ZElement { z_lambda: z, ..Self::zero(pairs) })
    }

    pub fn from_p(pairs: usize, z_p: [S; 3]) -> Self {
        ZElement { z_lambda: ExtElement::zero(pairs), z_p }
    }

    pub fn pairs(&self) -> usize {
        self.z_lambda.pairs()
    }

    pub fn is_zero(&self) -> bool {
        self.z_lambda.is_zero() && self.z_p.iter().all(Zero::is_zero)
    }

    pub fn to_e(&self) -> EElement<S> {
        let n = self.pairs();
        let [a, b, c] = &self.z_p;
        EElement {
            u_plus: self.z_lambda.clone(),
            u_kappa: ExtElement::top(n).scale(a),
            t_plus: b.clone() - c.clone(),
            t_kappa: b.clone() + c.clone(),
        }
    }

    /// Reads off Z(E) coordinates; fails when `x` is not of the central shape.
    pub fn from_e(x: &EElement<S>) -> Result<Self, AlgebraError> {
        let n = x.pairs();
        let top = Monomial::top(n);
        if !x.u_plus.is_even() || x.u_kappa.terms().any(|(m, _)| m != top) {
            return Err(AlgebraError::NotCentral(format!("{x:?}")));
        }
        let half = S::from_ratio(1, 2);
        Ok(ZElement {
            z_lambda: x.u_plus.clone(),
            z_p: [
                x.u_kappa.coeff(top),
                (x.t_plus.clone() + x.t_kappa.clone()) * half.clone(),
                (x.t_kappa.clone() - x.t_plus.clone()) * half,
            ],
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        ZElement {
            z_lambda: self.z_lambda.add(&other.z_lambda),
            z_p: [0, 1, 2].map(|i| self.z_p[i].clone() + other.z_p[i].clone()),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        ZElement { z_lambda: self.z_lambda.scale(s), z_p: [0, 1, 2].map(|i| self.z_p[i].clone() * s.clone()) }
    }

    /// Product in E, re-read as a central element.
    pub fn mul(&self, other: &Self) -> Self {
        Self::from_e(&self.to_e().mul(&other.to_e())).expect("Z(E) is a subalgebra")
    }

    /// Coordinates in the closed-form centre basis: even monomials in mask
    /// order, then z₁, z₂, z₃.
    pub fn coords(&self) -> Vec<S> {
        let n = self.pairs();
        let mut v: Vec<S> = Monomial::all_even(n).map(|m| self.z_lambda.coeff(m)).collect();
        v.extend(self.z_p.iter().cloned());
        v
    }

    pub fn from_coords(pairs: usize, v: &[S]) -> Self {
        let mut z = Self::zero(pairs);
        let evens: Vec<Monomial> = Monomial::all_even(pairs).collect();
        for (m, c) in evens.iter().zip(v) {
            z.z_lambda.add_term(*m, c.clone());
        }
        let k = evens.len();
        z.z_p = [v[k].clone(), v[k + 1].clone(), v[k + 2].clone()];
        z
    }

    pub fn map_coeffs<T: Ring>(&self, f: impl Fn(&S) -> T) -> ZElement<T> {
        ZElement { z_lambda: self.z_lambda.map_coeffs(&f), z_p: [0, 1, 2].map(|i| f(&self.z_p[i])) }
    }
}

impl<S: Ring + fmt::Display> fmt::Display for ZElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_e())
    }
}

/// Basis of Z(E): Λ(h)_ev ⊕ ℂα¹⋯α^{2N}κ ⊕ E₁, each element checked for
/// centrality.
pub fn center_closed_form<S: Ring>(pairs: usize) -> Result<Vec<ZElement<S>>, AlgebraError> {
    let dim = centre_dim(pairs);
    let basis: Vec<ZElement<S>> = (0..dim)
        .map(|i| {
            let mut v = vec![S::zero(); dim];
            v[i] = S::one();
            ZElement::from_coords(pairs, &v)
        })
        .collect();
    for z in &basis {
        if !is_central(&z.to_e()) {
            return Err(AlgebraError::NotCentral(format!("{:?}", z.to_e())));
        }
    }
    Ok(basis)
}

pub const BRUTE_FORCE_MAX_PAIRS: usize = 3;

/// Solves x·g = g·x for every generator g and returns an echelonised basis
/// of the solution space.
pub fn center_brute_force<S: Ring>(pairs: usize) -> Result<Vec<EElement<S>>, AlgebraError> {
    if pairs > BRUTE_FORCE_MAX_PAIRS {
        return Err(AlgebraError::TooLarge { what: "brute-force centre", max: BRUTE_FORCE_MAX_PAIRS, pairs });
    }
    let dim = basis_dim(pairs);
    let gens = generators::<S>(pairs);
    // columns[j] = [b_j, g] stacked over generators
    let mut rows = vec![vec![S::zero(); dim]; gens.len() * dim];
    for j in 0..dim {
        let b = EElement::<S>::basis(pairs, j);
        for (gi, g) in gens.iter().enumerate() {
            for (i, c) in b.commutator(g).coord_terms() {
                rows[gi * dim + i][j] = c;
            }
        }
    }
    rows.retain(|r| r.iter().any(|c| !c.is_zero()));
    let mut basis = linalg::nullspace(rows, dim);
    linalg::echelonize(&mut basis, dim);
    Ok(basis.iter().map(|v| EElement::from_coords(pairs, v)).collect())
}

/// True when the two families span the same subspace of E.
pub fn same_span<S: Ring>(a: &[EElement<S>], b: &[EElement<S>]) -> bool {
    let ra = linalg::rank(a.iter().map(EElement::coords).collect());
    let rb = linalg::rank(b.iter().map(EElement::coords).collect());
    let rab = linalg::rank(a.iter().chain(b).map(EElement::coords).collect());
    ra == rb && ra == rab
}

// ---------------------------------------------------------------------------
// Central forms
// ---------------------------------------------------------------------------

/// Linear form on E stored by its values on the canonical basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralForm<S> {
    pub pairs: usize,
    pub values: Vec<S>,
}

impl<S: Ring> CentralForm<S> {
    pub fn zero(pairs: usize) -> Self {
        CentralForm { pairs, values: vec![S::zero(); basis_dim(pairs)] }
    }

    pub fn apply(&self, x: &EElement<S>) -> S {
        x.coord_terms().into_iter().fold(S::zero(), |acc, (i, c)| {
            if self.values[i].is_zero() {
                acc
            } else {
                acc + c * self.values[i].clone()
            }
        })
    }

    /// Gram matrix (a, b) ↦ φ(ab) on the canonical basis.
    pub fn gram(&self) -> Matrix<S> {
        let dim = basis_dim(self.pairs);
        let basis: Vec<EElement<S>> = (0..dim).map(|i| EElement::basis(self.pairs, i)).collect();
        basis.iter().map(|a| basis.iter().map(|b| self.apply(&a.mul(b))).collect()).collect()
    }

    pub fn is_nondegenerate(&self) -> bool {
        linalg::rank(self.gram()) == basis_dim(self.pairs)
    }

    /// φ(ab) = φ(ba) on all basis pairs.
    pub fn is_central(&self) -> bool {
        let g = self.gram();
        (0..g.len()).all(|i| (0..i).all(|j| g[i][j] == g[j][i]))
    }
}

/// ε: 1 on α¹⋯α^{2N}κ and on e_Tκ, zero on the remaining basis elements.
pub fn eps_form<S: Ring>(pairs: usize) -> CentralForm<S> {
    let mut f = CentralForm::zero(pairs);
    let half = 1usize << (2 * pairs);
    f.values[half + Monomial::top(pairs).0 as usize] = S::one();
    f.values[2 * half + 1] = S::one();
    f
}

/// δ: (2π)^{−N} on α¹⋯α^{2N}κ and 2^{−N} on e_Tκ.
pub fn delta_form<S: Scalar>(pairs: usize) -> CentralForm<S> {
    let mut f = CentralForm::zero(pairs);
    let half = 1usize << (2 * pairs);
    let n = pairs as i32;
    f.values[half + Monomial::top(pairs).0 as usize] = crate::scalars::two_pi_pow(-n);
    f.values[2 * half + 1] = crate::scalars::two_pow(-n);
    f
}

/// ẑ = form(z · −).
pub fn hat_iso<S: Ring>(z: &ZElement<S>, form: &CentralForm<S>) -> CentralForm<S> {
    let n = z.pairs();
    let ze = z.to_e();
    let values = (0..basis_dim(n)).map(|i| form.apply(&ze.mul(&EElement::basis(n, i)))).collect();
    CentralForm { pairs: n, values }
}

/// The central z with form(z · −) = φ.
pub fn hat_iso_inv<S: Ring>(phi: &CentralForm<S>, form: &CentralForm<S>) -> Result<ZElement<S>, AlgebraError> {
    let n = phi.pairs;
    let centre = center_closed_form::<S>(n)?;
    let images: Vec<CentralForm<S>> = centre.iter().map(|c| hat_iso(c, form)).collect();
    let a: Matrix<S> = (0..basis_dim(n)).map(|i| images.iter().map(|f| f.values[i].clone()).collect()).collect();
    match linalg::solve(&a, &phi.values) {
        Ok(x) => Ok(ZElement::from_coords(n, &x)),
        Err(LinAlgError::NonUnique { .. }) => Err(AlgebraError::NonDegenerateRequired),
        Err(e) => Err(e.into()),
    }
}

// ---------------------------------------------------------------------------
// Irreducibles
// ---------------------------------------------------------------------------

/// The four simple objects in the order (1, Π1, T, ΠT).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Irr {
    One,
    PiOne,
    T,
    PiT,
}

impl Irr {
    pub const ALL: [Irr; 4] = [Irr::One, Irr::PiOne, Irr::T, Irr::PiT];

    pub fn label(self) -> &'static str {
        match self {
            Irr::One => "1",
            Irr::PiOne => "Pi1",
            Irr::T => "T",
            Irr::PiT => "PiT",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    fn kappa_sign(self) -> i64 {
        match self {
            Irr::One | Irr::T => 1,
            Irr::PiOne | Irr::PiT => -1,
        }
    }

    fn twisted(self) -> bool {
        matches!(self, Irr::T | Irr::PiT)
    }
}

/// c_1 = α¹⋯α^{2N}(κ+1), c_{Π1} = α¹⋯α^{2N}(κ−1), c_T = e_T(κ+1),
/// c_{ΠT} = e_T(κ−1).
pub fn phi_irr<S: Ring>(pairs: usize) -> [ZElement<S>; 4] {
    Irr::ALL.map(|u| irr_element(pairs, u, S::one(), S::one()))
}

/// φ_U = (2π)^N c_U for U untwisted and 2^N c_U for U twisted.
pub fn phi_basis<S: Scalar>(pairs: usize) -> [ZElement<S>; 4] {
    let n = pairs as i32;
    Irr::ALL.map(|u| irr_element(pairs, u, crate::scalars::two_pi_pow::<S>(n), crate::scalars::two_pow::<S>(n)))
}

fn irr_element<S: Ring>(pairs: usize, u: Irr, untwisted: S, twisted: S) -> ZElement<S> {
    let sign = S::from_int(u.kappa_sign());
    if u.twisted() {
        // e_T(κ ± 1) is z₂ or z₃
        let mut z_p = [S::zero(), S::zero(), S::zero()];
        z_p[if u == Irr::T { 1 } else { 2 }] = twisted;
        ZElement::from_p(pairs, z_p)
    } else {
        ZElement {
            z_lambda: ExtElement::top(pairs).scale(&(sign * untwisted.clone())),
            z_p: [untwisted, S::zero(), S::zero()],
        }
    }
}

/// Trace form of the one-dimensional simple E-module for `u`: the positive
/// degree part of Λ(h) acts by zero and κ by ±1 on the summand of `u`.
pub fn simple_module<S: Ring>(pairs: usize, u: Irr) -> FDModule<S> {
    let dim = basis_dim(pairs);
    let half = 1usize << (2 * pairs);
    let sign = S::from_int(u.kappa_sign());
    let action = (0..dim)
        .map(|i| {
            let v = match (u.twisted(), i) {
                (false, 0) => S::one(),
                (false, i) if i == half => sign.clone(),
                (true, i) if i == 2 * half => S::one(),
                (true, i) if i == 2 * half + 1 => sign.clone(),
                _ => S::zero(),
            };
            vec![vec![v]]
        })
        .collect();
    FDModule { dim: 1, action }
}

// ---------------------------------------------------------------------------
// Modules and the Hattori–Stallings trace
// ---------------------------------------------------------------------------

/// Finite-dimensional left E-module; `action[i]` is the matrix of the i-th
/// canonical basis element.
#[derive(Clone, Debug, PartialEq)]
pub struct FDModule<S> {
    pub dim: usize,
    pub action: Vec<Matrix<S>>,
}

/// Surjection π: E ⊗ X → P with section ι. Basis of E ⊗ X is ordered
/// X-major: index = k·dim E + a.
#[derive(Clone, Debug, PartialEq)]
pub struct Presentation<S> {
    pub x_dim: usize,
    pub pi: Matrix<S>,
    pub iota: Matrix<S>,
}

pub fn mat_mul<S: Ring>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(S::zero(), |acc, k| {
                        if row[k].is_zero() || b[k][j].is_zero() {
                            acc
                        } else {
                            acc + row[k].clone() * b[k][j].clone()
                        }
                    })
                })
                .collect()
        })
        .collect()
}

pub fn identity<S: Ring>(n: usize) -> Matrix<S> {
    (0..n).map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect()
}

/// Block-diagonal sum of `m` copies.
pub fn block_diag<S: Ring>(m: &Matrix<S>, copies: usize) -> Matrix<S> {
    let n = m.len();
    let c = m.first().map_or(0, Vec::len);
    let mut out = vec![vec![S::zero(); c * copies]; n * copies];
    for k in 0..copies {
        for i in 0..n {
            for j in 0..c {
                out[k * n + i][k * c + j] = m[i][j].clone();
            }
        }
    }
    out
}

impl<S: Ring> FDModule<S> {
    /// E acting on itself by left multiplication.
    pub fn regular(pairs: usize) -> Self {
        let dim = basis_dim(pairs);
        let basis: Vec<EElement<S>> = (0..dim).map(|i| EElement::basis(pairs, i)).collect();
        let action = basis
            .iter()
            .map(|a| {
                let mut m = vec![vec![S::zero(); dim]; dim];
                for (j, b) in basis.iter().enumerate() {
                    for (i, c) in a.mul(b).coord_terms() {
                        m[i][j] = c;
                    }
                }
                m
            })
            .collect();
        FDModule { dim, action }
    }

    /// E ⊗ k^copies, i.e. `copies` copies of `self`.
    pub fn tensor_identity(&self, copies: usize) -> Self {
        FDModule { dim: self.dim * copies, action: self.action.iter().map(|m| block_diag(m, copies)).collect() }
    }

    /// a ↦ tr_M(a).
    pub fn trace_form(&self, pairs: usize) -> CentralForm<S> {
        let values =
            self.action.iter().map(|m| (0..self.dim).fold(S::zero(), |acc, i| acc + m[i][i].clone())).collect();
        CentralForm { pairs, values }
    }

    /// f: self → target commutes with the action.
    pub fn is_module_map(&self, target: &FDModule<S>, f: &Matrix<S>) -> bool {
        self.action.iter().zip(&target.action).all(|(a_src, a_tgt)| mat_mul(a_tgt, f) == mat_mul(f, a_src))
    }
}

impl<S: Ring> Presentation<S> {
    /// X = k, π = ι = id for P = E.
    pub fn free_rank_one(pairs: usize) -> Self {
        let dim = basis_dim(pairs);
        Presentation { x_dim: 1, pi: identity(dim), iota: identity(dim) }
    }

    /// The presentation of P ⊗ W obtained from X ⊗ W, π ⊗ id, ι ⊗ id.
    pub fn tensor_identity(&self, w_dim: usize) -> Self {
        Presentation { x_dim: self.x_dim * w_dim, pi: block_diag(&self.pi, w_dim), iota: block_diag(&self.iota, w_dim) }
    }
}

/// Right multiplication a ↦ a·g on E, as a matrix in the canonical basis.
pub fn right_mul_matrix<S: Ring>(g: &EElement<S>) -> Matrix<S> {
    let n = g.pairs();
    let dim = basis_dim(n);
    let mut m = vec![vec![S::zero(); dim]; dim];
    for j in 0..dim {
        for (i, c) in EElement::basis(n, j).mul(g).coord_terms() {
            m[i][j] = c;
        }
    }
    m
}

/// t^φ_P(f): the image of 1 under E → E⊗X⊗X* → P⊗X* → P⊗X* → E⊗X⊗X* → E → k.
pub fn hs_trace<S: Ring>(
    phi: &CentralForm<S>,
    p: &FDModule<S>,
    pres: &Presentation<S>,
    f: &Matrix<S>,
) -> Result<S, AlgebraError> {
    let n = phi.pairs;
    let dim_a = basis_dim(n);
    if mat_mul(&pres.pi, &pres.iota) != identity(p.dim) {
        return Err(AlgebraError::SectionInvalid);
    }
    if !p.is_module_map(p, f) {
        return Err(AlgebraError::NotModuleMap);
    }
    let free = FDModule::<S>::regular(n).tensor_identity(pres.x_dim);
    if !free.is_module_map(p, &pres.pi) || !p.is_module_map(&free, &pres.iota) {
        return Err(AlgebraError::NotModuleMap);
    }
    let m = mat_mul(&pres.iota, &mat_mul(f, &pres.pi));
    let unit = EElement::<S>::one(n).coords();
    let mut diag = vec![S::zero(); dim_a];
    for k in 0..pres.x_dim {
        // image of 1 ⊗ x_k, projected back onto the x_k component
        for (a, d) in diag.iter_mut().enumerate() {
            let row = &m[k * dim_a + a];
            let v = (0..dim_a).fold(S::zero(), |acc, b| {
                if unit[b].is_zero() || row[k * dim_a + b].is_zero() {
                    acc
                } else {
                    acc + row[k * dim_a + b].clone() * unit[b].clone()
                }
            });
            *d = d.clone() + v;
        }
    }
    Ok(phi.apply(&EElement::from_coords(n, &diag)))
}

/// Partial trace over W of an endomorphism of P ⊗ W (W-major blocks).
pub fn partial_trace<S: Ring>(f: &Matrix<S>, p_dim: usize, w_dim: usize) -> Matrix<S> {
    let mut out = vec![vec![S::zero(); p_dim]; p_dim];
    for w in 0..w_dim {
        for i in 0..p_dim {
            for j in 0..p_dim {
                out[i][j] = out[i][j].clone() + f[w * p_dim + i][w * p_dim + j].clone();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{two_pi_pow, two_pow, ExactScalar};
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type X = ExactScalar;
    type E = EElement<X>;

    fn a(n: usize, k: usize) -> E {
        E::generator(n, k).unwrap()
    }

    fn random_e(n: usize, rng: &mut ChaCha8Rng) -> E {
        let v: Vec<X> = (0..basis_dim(n))
            .map(|_| if rng.gen_bool(0.5) { X::from_int(rng.gen_range(-3..=3)) } else { X::zero() })
            .collect();
        E::from_coords(n, &v)
    }

    fn random_central(n: usize, rng: &mut ChaCha8Rng) -> ZElement<X> {
        let v: Vec<X> =
            (0..centre_dim(n)).map(|_| X::from_int(rng.gen_range(-3..=3)) * X::pi_pow(rng.gen_range(-1..=1))).collect();
        ZElement::from_coords(n, &v)
    }

    #[test]
    fn semidirect_relations() {
        let k = E::kappa(1);
        assert_eq!(k.mul(&a(1, 1)), a(1, 1).mul(&k).scale(&-X::one()));
        assert_eq!(k.mul(&k), E::one_lambda(1));
        let c = E::e_t(1).add(&E::kappa_e_t(1));
        assert_eq!(c.mul(&c), c.scale(&X::from_int(2)));
        assert!(E::e_t(1).mul(&a(1, 2)).is_zero());
        let one = E::one(2);
        let x = a(2, 3).add(&E::kappa_e_t(2));
        assert_eq!(one.mul(&x), x);
        assert_eq!(x.mul(&one), x);
        assert!(E::one(1).e_mul(&E::one(2)).is_err());
    }

    #[test]
    fn closed_form_centre() {
        for (n, d) in [(1, 5), (2, 11), (3, 35)] {
            let c = center_closed_form::<X>(n).unwrap();
            assert_eq!(c.len(), d);
            assert!(c.iter().all(|z| z.to_e().mul(&a(n, 1)) == a(n, 1).mul(&z.to_e())));
        }
    }

    #[test]
    fn brute_force_centre_matches() {
        for n in 1..=2 {
            let brute = center_brute_force::<X>(n).unwrap();
            assert_eq!(brute.len(), centre_dim(n));
            let closed: Vec<E> = center_closed_form::<X>(n).unwrap().iter().map(ZElement::to_e).collect();
            assert!(same_span(&brute, &closed));
        }
        assert!(matches!(center_brute_force::<X>(4), Err(AlgebraError::TooLarge { .. })));
    }

    #[test]
    fn centre_round_trip_through_e() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = random_central(2, &mut rng);
        assert_eq!(ZElement::from_e(&z.to_e()).unwrap(), z);
        assert!(ZElement::from_e(&a(2, 1)).is_err());
    }

    #[test]
    fn eps_values() {
        let eps = eps_form::<X>(1);
        let top_k = E::lambda_kappa(ExtElement::top(1));
        assert_eq!(eps.apply(&top_k), X::one());
        assert_eq!(eps.apply(&E::kappa_e_t(1)), X::one());
        assert_eq!(eps.apply(&E::one_lambda(1)), X::zero());
        assert_eq!(eps.apply(&E::e_t(1)), X::zero());
    }

    #[test]
    fn eps_gram_is_signed_permutation() {
        for n in 1..=2 {
            let g = eps_form::<X>(n).gram();
            for row in &g {
                let nz: Vec<&X> = row.iter().filter(|c| !c.is_zero()).collect();
                assert_eq!(nz.len(), 1);
                assert!(*nz[0] == X::one() || *nz[0] == -X::one());
            }
            assert!(eps_form::<X>(n).is_nondegenerate());
            assert!(eps_form::<X>(n).is_central());
        }
    }

    #[test]
    fn hat_iso_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=2 {
            let eps = eps_form::<X>(n);
            assert_eq!(hat_iso(&ZElement::from_e(&E::one(n)).unwrap(), &eps), eps);
            for _ in 0..3 {
                let z = random_central(n, &mut rng);
                let phi = hat_iso(&z, &eps);
                assert!(phi.is_central());
                assert_eq!(hat_iso_inv(&phi, &eps).unwrap(), z);
            }
        }
    }

    #[test]
    fn delta_transport_multiplies_by_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=2 {
            let (eps, delta) = (eps_form::<X>(n), delta_form::<X>(n));
            let ni = n as i32;
            let m = E::one_lambda(n).scale(&two_pi_pow(ni)).add(&E::e_t(n).scale(&two_pow(ni)));
            let z = random_central(n, &mut rng);
            let back = hat_iso_inv(&hat_iso(&z, &eps), &delta).unwrap();
            assert_eq!(back.to_e(), m.mul(&z.to_e()));
        }
    }

    #[test]
    fn degenerate_form_rejected() {
        let f = CentralForm::<X>::zero(1);
        assert!(!f.is_nondegenerate());
        assert_eq!(hat_iso_inv(&f, &f), Err(AlgebraError::NonDegenerateRequired));
    }

    #[test]
    fn irreducible_elements() {
        for n in 1..=3 {
            let c = phi_irr::<X>(n);
            assert_eq!(c[Irr::T.index()].z_p, [X::zero(), X::one(), X::zero()]);
            assert!(c[Irr::T.index()].z_lambda.is_zero());
            let sum = c[0].add(&c[1]);
            assert_eq!(sum.to_e(), E::lambda_kappa(ExtElement::top(n)).scale(&X::from_int(2)));
            assert!(c.iter().all(|z| is_central(&z.to_e())));
        }
    }

    #[test]
    fn simple_module_traces_match_irreducible_forms() {
        for n in 1..=2 {
            let eps = eps_form::<X>(n);
            let c = phi_irr::<X>(n);
            for u in Irr::ALL {
                let m = simple_module::<X>(n, u);
                assert!(m.is_module_map(&m, &identity(1)));
                assert_eq!(m.trace_form(n), hat_iso(&c[u.index()], &eps), "{u:?}");
            }
        }
    }

    #[test]
    fn regular_module_is_a_representation() {
        let m = FDModule::<X>::regular(1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let (x, y) = (random_e(1, &mut rng), random_e(1, &mut rng));
            let act = |e: &E| -> Matrix<X> {
                let mut out = vec![vec![X::zero(); m.dim]; m.dim];
                for (i, c) in e.coord_terms() {
                    for r in 0..m.dim {
                        for s in 0..m.dim {
                            out[r][s] = out[r][s].clone() + c.clone() * m.action[i][r][s].clone();
                        }
                    }
                }
                out
            };
            assert_eq!(mat_mul(&act(&x), &act(&y)), act(&x.mul(&y)));
        }
    }

    /// Cover of E by E ⊗ k² with π(a, b) = a + b·c and ι(a) = (a·u, a·v).
    fn fattened(n: usize, c: &E, v: &E) -> Presentation<X> {
        let u = E::one(n).sub(&v.mul(c));
        let (rc, ru, rv) = (right_mul_matrix(c), right_mul_matrix(&u), right_mul_matrix(v));
        let pi = (0..basis_dim(n)).map(|i| [identity::<X>(basis_dim(n))[i].clone(), rc[i].clone()].concat()).collect();
        let iota = [ru, rv].concat();
        Presentation { x_dim: 2, pi, iota }
    }

    #[test]
    fn hs_trace_free_and_fattened() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 1;
        let p = FDModule::<X>::regular(n);
        let phi = hat_iso(&random_central(n, &mut rng), &eps_form(n));
        for _ in 0..3 {
            let g = random_e(n, &mut rng);
            let f = right_mul_matrix(&g);
            let free = hs_trace(&phi, &p, &Presentation::free_rank_one(n), &f).unwrap();
            assert_eq!(free, phi.apply(&g));
            let pres = fattened(n, &random_e(n, &mut rng), &random_e(n, &mut rng));
            assert_eq!(hs_trace(&phi, &p, &pres, &f).unwrap(), free);
        }
    }

    #[test]
    fn hs_trace_rejects_bad_input() {
        let n = 1;
        let p = FDModule::<X>::regular(n);
        let phi = eps_form::<X>(n);
        let mut bad = Presentation::free_rank_one(n);
        bad.iota[0][0] = X::from_int(2);
        assert_eq!(hs_trace(&phi, &p, &bad, &identity(p.dim)), Err(AlgebraError::SectionInvalid));
        // left multiplication by α¹ is not E-linear
        let left = p.action[1].clone();
        assert_eq!(hs_trace(&phi, &p, &Presentation::free_rank_one(n), &left), Err(AlgebraError::NotModuleMap));
    }

    #[test]
    fn hs_trace_cyclic_and_partial() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 1;
        let dim = basis_dim(n);
        let p = FDModule::<X>::regular(n);
        let q = p.tensor_identity(2);
        let phi = hat_iso(&random_central(n, &mut rng), &eps_form(n));
        let g: Vec<E> = (0..4).map(|_| random_e(n, &mut rng)).collect();
        let f_pq: Matrix<X> = [right_mul_matrix(&g[0]), right_mul_matrix(&g[1])].concat();
        let g_qp: Matrix<X> = (0..dim)
            .map(|i| [right_mul_matrix(&g[2])[i].clone(), right_mul_matrix(&g[3])[i].clone()].concat())
            .collect();
        let pres_q = Presentation { x_dim: 2, pi: identity(2 * dim), iota: identity(2 * dim) };
        let lhs = hs_trace(&phi, &q, &pres_q, &mat_mul(&f_pq, &g_qp)).unwrap();
        let rhs = hs_trace(&phi, &p, &Presentation::free_rank_one(n), &mat_mul(&g_qp, &f_pq)).unwrap();
        assert_eq!(lhs, rhs);

        // P ⊗ k² with a fattened cover of P
        let pres = fattened(n, &g[0], &g[1]);
        let blocks: Vec<Matrix<X>> = g.iter().map(right_mul_matrix).collect();
        let f: Matrix<X> = (0..2 * dim)
            .map(|i| {
                let (w, r) = (i / dim, i % dim);
                [blocks[2 * w][r].clone(), blocks[2 * w + 1][r].clone()].concat()
            })
            .collect();
        let whole = hs_trace(&phi, &p.tensor_identity(2), &pres.tensor_identity(2), &f).unwrap();
        let part = hs_trace(&phi, &p, &pres, &partial_trace(&f, dim, 2)).unwrap();
        assert_eq!(whole, part);
    }
}
