//! Fusion rings from modular data.
//!
//! [`fusion_sf`] runs the non-semisimple procedure for N pairs of symplectic
//! fermions: transport φ_A and φ_B with S_Z, multiply in E, transport back and
//! read off integer coefficients in the φ-basis. [`fusion_semisimple`] is the
//! ordinary Verlinde formula for an invertible S-matrix.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{ComplexField, DMatrix, RealField};
use num_complex::Complex;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::endalg::{self, delta_form, eps_form, hat_iso, phi_basis, AlgebraError, CentralForm, Irr, ZElement};
use crate::linalg::{self, LinAlgError};
use crate::scalars::ExactScalar;
use crate::smod;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerlindeError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("element is not in the span of the phi-basis")]
    NotInPhiSpan,
    #[error("coefficient {0} is not an integer")]
    NonIntegerCoefficient(String),
    #[error("N_{{{a},{b}}}^{c} = {value} deviates from an integer by {deviation:e}")]
    NotIntegral { a: String, b: String, c: String, value: f64, deviation: f64 },
    #[error("N_{{{a},{b}}}^{c} rounds to the negative value {value}")]
    NegativeFusion { a: String, b: String, c: String, value: i64 },
    #[error("S-matrix is not invertible")]
    NotInvertible,
    #[error("vacuum row of the S-matrix vanishes in column {0}")]
    ZeroVacuumEntry(String),
    #[error("malformed S-matrix: {0}")]
    BadInput(String),
    #[error("transported form differs from the closed-form delta")]
    DeltaMismatch,
}

/// Structure constants N_{AB}^C over an ordered label set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FusionTableJson", into = "FusionTableJson")]
pub struct FusionTable {
    labels: Vec<String>,
    /// `n_abc[a][b][c]`
    n_abc: Vec<Vec<Vec<i64>>>,
}

#[derive(Serialize, Deserialize)]
struct FusionTableJson {
    labels: Vec<String>,
    table: BTreeMap<String, Vec<i64>>,
}

impl From<FusionTable> for FusionTableJson {
    fn from(t: FusionTable) -> Self {
        let mut table = BTreeMap::new();
        for (a, la) in t.labels.iter().enumerate() {
            for (b, lb) in t.labels.iter().enumerate() {
                table.insert(format!("{la},{lb}"), t.n_abc[a][b].clone());
            }
        }
        FusionTableJson { labels: t.labels, table }
    }
}

impl TryFrom<FusionTableJson> for FusionTable {
    type Error = VerlindeError;

    fn try_from(j: FusionTableJson) -> Result<Self, Self::Error> {
        let n_abc = j
            .labels
            .iter()
            .map(|la| {
                j.labels
                    .iter()
                    .map(|lb| {
                        j.table
                            .get(&format!("{la},{lb}"))
                            .cloned()
                            .ok_or_else(|| VerlindeError::BadInput(format!("missing entry {la},{lb}")))
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        FusionTable::new(j.labels, n_abc)
    }
}

impl FusionTable {
    pub fn new(labels: Vec<String>, n_abc: Vec<Vec<Vec<i64>>>) -> Result<Self, VerlindeError> {
        let d = labels.len();
        if n_abc.len() != d || n_abc.iter().any(|r| r.len() != d || r.iter().any(|v| v.len() != d)) {
            return Err(VerlindeError::BadInput("table shape does not match labels".into()));
        }
        Ok(FusionTable { labels, n_abc })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The vector (N_{AB}^C)_C.
    pub fn product(&self, a: usize, b: usize) -> &[i64] {
        &self.n_abc[a][b]
    }

    pub fn coeff(&self, a: usize, b: usize, c: usize) -> i64 {
        self.n_abc[a][b][c]
    }

    /// (N_A)_{B,C} = N_{AB}^C.
    pub fn fusion_matrix(&self, a: usize) -> Vec<Vec<i64>> {
        self.n_abc[a].clone()
    }

    pub fn is_commutative(&self) -> bool {
        let d = self.dim();
        (0..d).all(|a| (0..d).all(|b| self.n_abc[a][b] == self.n_abc[b][a]))
    }

    pub fn is_non_negative(&self) -> bool {
        self.n_abc.iter().flatten().flatten().all(|&k| k >= 0)
    }

    /// N_{uB}^C = δ_{BC}.
    pub fn has_unit(&self, u: usize) -> bool {
        let d = self.dim();
        (0..d).all(|b| (0..d).all(|c| self.n_abc[u][b][c] == i64::from(b == c)))
    }

    /// Σ_D N_{AB}^D N_{DC}^E = Σ_D N_{BC}^D N_{AD}^E for all A, B, C, E.
    pub fn is_associative(&self) -> bool {
        let d = self.dim();
        let r = 0..d;
        r.clone().all(|a| {
            r.clone().all(|b| {
                r.clone().all(|c| {
                    r.clone().all(|e| {
                        let lhs: i64 = (0..d).map(|x| self.n_abc[a][b][x] * self.n_abc[x][c][e]).sum();
                        let rhs: i64 = (0..d).map(|x| self.n_abc[b][c][x] * self.n_abc[a][x][e]).sum();
                        lhs == rhs
                    })
                })
            })
        })
    }
}

impl fmt::Display for FusionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                let terms: Vec<String> = self.n_abc[a][b]
                    .iter()
                    .zip(&self.labels)
                    .filter(|(k, _)| **k != 0)
                    .map(|(k, l)| if *k == 1 { format!("[{l}]") } else { format!("{k}[{l}]") })
                    .collect();
                let rhs = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
                writeln!(f, "[{}] * [{}] = {}", self.labels[a], self.labels[b], rhs)?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Symplectic fermions
// ---------------------------------------------------------------------------

/// Integer coordinates of `z` in (φ_1, φ_{Π1}, φ_T, φ_{ΠT}).
pub fn expand_in_phi_basis(z: &ZElement<ExactScalar>) -> Result<[i64; 4], VerlindeError> {
    let n = z.pairs();
    let phis: Vec<Vec<ExactScalar>> = phi_basis::<ExactScalar>(n).iter().map(ZElement::coords).collect();
    let target = z.coords();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (i, t) in target.iter().enumerate() {
        let row: Vec<ExactScalar> = phis.iter().map(|p| p[i].clone()).collect();
        if row.iter().all(Zero::is_zero) {
            if !t.is_zero() {
                return Err(VerlindeError::NotInPhiSpan);
            }
            continue;
        }
        rows.push(row);
        rhs.push(t.clone());
    }
    let k = linalg::solve(&rows, &rhs).map_err(|e| match e {
        LinAlgError::Inconsistent => VerlindeError::NotInPhiSpan,
        e => VerlindeError::Algebra(e.into()),
    })?;
    let mut out = [0i64; 4];
    for (o, c) in out.iter_mut().zip(&k) {
        *o = c
            .to_integer()
            .and_then(|b| b.to_i64())
            .ok_or_else(|| VerlindeError::NonIntegerCoefficient(c.to_string()))?;
    }
    Ok(out)
}

/// S_Z^{−1}(S_Z(φ_A)·S_Z(φ_B)) expanded in the φ-basis.
pub fn fuse_sf(pairs: usize, a: Irr, b: Irr) -> Result<[i64; 4], VerlindeError> {
    let phi = phi_basis::<ExactScalar>(pairs);
    let sa = smod::s_z(&phi[a.index()])?;
    let sb = smod::s_z(&phi[b.index()])?;
    let prod = sa.to_e().e_mul(&sb.to_e()).map_err(VerlindeError::from)?;
    let back = smod::s_z_inv(&ZElement::from_e(&prod)?)?;
    expand_in_phi_basis(&back)
}

pub fn irr_labels() -> Vec<String> {
    Irr::ALL.iter().map(|u| u.label().to_string()).collect()
}

/// The Grothendieck ring of the even symplectic fermions with N pairs.
pub fn fusion_sf(pairs: usize) -> Result<FusionTable, VerlindeError> {
    let pairs_ab: Vec<(Irr, Irr)> = Irr::ALL.iter().flat_map(|&a| Irr::ALL.map(|b| (a, b))).collect();
    let products: Vec<[i64; 4]> = pairs_ab.par_iter().map(|&(a, b)| fuse_sf(pairs, a, b)).collect::<Result<_, _>>()?;
    let n_abc = (0..4).map(|a| (0..4).map(|b| products[4 * a + b].to_vec()).collect()).collect();
    FusionTable::new(irr_labels(), n_abc)
}

/// δ = ε(S̃_Z(c_1)·−), checked against the closed form and for
/// non-degeneracy.
pub fn delta_from_s(pairs: usize) -> Result<CentralForm<ExactScalar>, VerlindeError> {
    let c1 = &endalg::phi_irr::<ExactScalar>(pairs)[Irr::One.index()];
    let delta = hat_iso(&smod::s_tilde_z(c1)?, &eps_form(pairs));
    if delta != delta_form(pairs) {
        return Err(VerlindeError::DeltaMismatch);
    }
    if !delta.is_nondegenerate() {
        return Err(AlgebraError::NonDegenerateRequired.into());
    }
    Ok(delta)
}

// ---------------------------------------------------------------------------
// Semisimple Verlinde formula
// ---------------------------------------------------------------------------

/// S-matrix input, JSON `{"labels": [...], "unit": 0, "re": [[...]], "im": [[...]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SMatrixInput {
    pub labels: Vec<String>,
    pub unit: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

pub const DEFAULT_SEMISIMPLE_TOL: f64 = 1e-9;

impl SMatrixInput {
    pub fn from_complex<T: RealField + Copy + ToPrimitive>(
        labels: Vec<String>,
        unit: usize,
        s: &DMatrix<Complex<T>>,
    ) -> Self {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        let rows = 0..s.nrows();
        SMatrixInput {
            labels,
            unit,
            re: rows.clone().map(|i| (0..s.ncols()).map(|j| f(s[(i, j)].re)).collect()).collect(),
            im: rows.map(|i| (0..s.ncols()).map(|j| f(s[(i, j)].im)).collect()).collect(),
        }
    }

    fn validate(&self) -> Result<usize, VerlindeError> {
        let d = self.labels.len();
        let square = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d);
        if d == 0 || !square(&self.re) || !(self.im.is_empty() || square(&self.im)) {
            return Err(VerlindeError::BadInput(format!("expected {d}x{d} re/im matrices")));
        }
        if self.unit >= d {
            return Err(VerlindeError::BadInput(format!("unit index {} out of range", self.unit)));
        }
        Ok(d)
    }

    pub fn matrix<T: RealField + Copy>(&self) -> Result<DMatrix<Complex<T>>, VerlindeError> {
        let d = self.validate()?;
        let im = |i: usize, j: usize| if self.im.is_empty() { 0.0 } else { self.im[i][j] };
        Ok(DMatrix::from_fn(d, d, |i, j| Complex::new(nalgebra::convert(self.re[i][j]), nalgebra::convert(im(i, j)))))
    }
}

/// N_{AB}^C = Σ_X S_{AX} S_{BX} (S^{−1})_{XC} / S_{1X}, before rounding.
pub fn raw_fusion_coefficients<T: RealField + Copy>(
    s: &SMatrixInput,
) -> Result<Vec<Vec<Vec<Complex<T>>>>, VerlindeError> {
    let m = s.matrix::<T>()?;
    let d = m.nrows();
    let inv = m.clone().try_inverse().ok_or(VerlindeError::NotInvertible)?;
    let scale = m.iter().map(|z| z.modulus()).fold(T::zero(), |a, b| a.max(b));
    let eps: T = nalgebra::convert(1e-12);
    for x in 0..d {
        if m[(s.unit, x)].modulus() <= eps * scale {
            return Err(VerlindeError::ZeroVacuumEntry(s.labels[x].clone()));
        }
    }
    Ok((0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    (0..d)
                        .map(|c| {
                            (0..d).fold(Complex::new(T::zero(), T::zero()), |acc, x| {
                                acc + m[(a, x)] * m[(b, x)] * inv[(x, c)] / m[(s.unit, x)]
                            })
                        })
                        .collect()
                })
                .collect()
        })
        .collect())
}

/// Rounds the Verlinde coefficients; returns the table and the largest
/// distance to the nearest integer.
pub fn fusion_semisimple_with<T: RealField + Copy + ToPrimitive>(
    s: &SMatrixInput,
    tol: T,
) -> Result<(FusionTable, T), VerlindeError> {
    let raw = raw_fusion_coefficients::<T>(s)?;
    let d = raw.len();
    let mut max_dev = T::zero();
    let mut n_abc = vec![vec![vec![0i64; d]; d]; d];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let v = raw[a][b][c];
                let k = v.re.round();
                let dev = (v - Complex::new(k, T::zero())).modulus();
                let label = |i: usize| s.labels[i].clone();
                if dev > tol {
                    return Err(VerlindeError::NotIntegral {
                        a: label(a),
                        b: label(b),
                        c: label(c),
                        value: v.re.to_f64().unwrap_or(f64::NAN),
                        deviation: dev.to_f64().unwrap_or(f64::NAN),
                    });
                }
                let k = k.to_i64().ok_or(VerlindeError::NotInvertible)?;
                if k < 0 {
                    return Err(VerlindeError::NegativeFusion { a: label(a), b: label(b), c: label(c), value: k });
                }
                max_dev = max_dev.max(dev);
                n_abc[a][b][c] = k;
            }
        }
    }
    Ok((FusionTable::new(s.labels.clone(), n_abc)?, max_dev))
}

pub fn fusion_semisimple(s: &SMatrixInput, tol: f64) -> Result<FusionTable, VerlindeError> {
    fusion_semisimple_with::<f64>(s, tol).map(|(t, _)| t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::endalg::phi_basis;
    use crate::exterior::ExtElement;
    use crate::scalars::{two_pi_pow, Ring, Scalar};

    type X = ExactScalar;

    #[test]
    fn phi_expansion() {
        for n in 1..=3 {
            let phi = phi_basis::<X>(n);
            assert_eq!(expand_in_phi_basis(&phi[2]).unwrap(), [0, 0, 1, 0]);
            let k = 1i64 << (2 * n - 1);
            let z = phi[0].add(&phi[1]).scale(&X::from_int(k));
            assert_eq!(expand_in_phi_basis(&z).unwrap(), [k, k, 0, 0]);
            let one = ZElement::from_lambda(ExtElement::one(n)).unwrap();
            assert_eq!(expand_in_phi_basis(&one), Err(VerlindeError::NotInPhiSpan));
            let half = phi[3].scale(&X::from_ratio(1, 2));
            assert!(matches!(expand_in_phi_basis(&half), Err(VerlindeError::NonIntegerCoefficient(_))));
            let with_pi = phi[3].scale(&X::pi_pow(1));
            assert!(matches!(expand_in_phi_basis(&with_pi), Err(VerlindeError::NonIntegerCoefficient(_))));
        }
    }

    #[test]
    fn sf_ring_for_one_pair() {
        let t = fusion_sf(1).unwrap();
        let i = |l: &str| t.index_of(l).unwrap();
        assert_eq!(t.product(i("T"), i("T")), &[2, 2, 0, 0]);
        assert_eq!(t.product(i("Pi1"), i("Pi1")), &[1, 0, 0, 0]);
        assert_eq!(t.product(i("Pi1"), i("T")), &[0, 0, 0, 1]);
        assert!(t.has_unit(0) && t.is_commutative() && t.is_associative() && t.is_non_negative());
    }

    #[test]
    fn sf_twisted_square_for_three_pairs() {
        assert_eq!(fuse_sf(3, Irr::PiT, Irr::PiT).unwrap(), [32, 32, 0, 0]);
    }

    #[test]
    fn delta_normalisation() {
        let d1 = delta_from_s(1).unwrap();
        let top_k = endalg::EElement::lambda_kappa(ExtElement::<X>::top(1));
        assert_eq!(d1.apply(&top_k), two_pi_pow::<X>(-1));
        let d2 = delta_from_s(2).unwrap();
        assert_eq!(d2.apply(&endalg::EElement::kappa_e_t(2)), X::from_ratio(1, 4));
        // same kernel as ε on the canonical basis
        let eps = eps_form::<X>(2);
        assert!(d2.values.iter().zip(&eps.values).all(|(a, b)| a.is_zero() == b.is_zero()));
    }

    fn input(labels: &[&str], re: Vec<Vec<f64>>) -> SMatrixInput {
        SMatrixInput { labels: labels.iter().map(|s| s.to_string()).collect(), unit: 0, re, im: vec![] }
    }

    #[test]
    fn trivial_and_fibonacci() {
        let t = fusion_semisimple(&input(&["1"], vec![vec![1.0]]), DEFAULT_SEMISIMPLE_TOL).unwrap();
        assert_eq!(t.product(0, 0), &[1]);

        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let c = 1.0 / (2.0 + phi).sqrt();
        let s = input(&["1", "tau"], vec![vec![c, c * phi], vec![c * phi, -c]]);
        let (t, dev) = fusion_semisimple_with::<f64>(&s, DEFAULT_SEMISIMPLE_TOL).unwrap();
        assert_eq!(t.product(1, 1), &[1, 1]);
        assert!(dev < 1e-12);
        // single precision works with a looser tolerance
        let (t32, _) = fusion_semisimple_with::<f32>(&s, 1e-4).unwrap();
        assert_eq!(t32, t);
    }

    #[test]
    fn semisimple_errors() {
        let singular = input(&["a", "b"], vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(fusion_semisimple(&singular, 1e-9), Err(VerlindeError::NotInvertible));
        let zero_vac = input(&["a", "b"], vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(fusion_semisimple(&zero_vac, 1e-9), Err(VerlindeError::ZeroVacuumEntry(_))));
        let skew = input(&["a", "b"], vec![vec![1.0, 1.0], vec![0.3, -1.0]]);
        assert!(matches!(
            fusion_semisimple(&skew, 1e-9),
            Err(VerlindeError::NotIntegral { .. } | VerlindeError::NegativeFusion { .. })
        ));
        assert!(matches!(
            fusion_semisimple(&input(&["a"], vec![vec![1.0, 2.0]]), 1e-9),
            Err(VerlindeError::BadInput(_))
        ));
    }

    #[test]
    fn table_json_round_trip() {
        let t = fusion_sf(1).unwrap();
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(json["table"]["T,T"], serde_json::json!([2, 2, 0, 0]));
        let back: FusionTable = serde_json::from_value(json).unwrap();
        assert_eq!(back, t);
        assert!(t.to_string().contains("[T] * [T] = 2[1] + 2[Pi1]"));
    }
}
