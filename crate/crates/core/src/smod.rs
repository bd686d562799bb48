//! The modular S-action on Z(E).
//!
//! On Z_Λ = Λ(h)_ev it is σ^{⊗N} under Λ(ℂ²)^{⊗N} ≅ Λ(h), β¹ ↦ α^{2n−1},
//! β² ↦ α^{2n}. On Z_P it is a fixed 3×3 involution. Two versions are
//! exposed: `s_tilde_z` in the basis (z₁, z₂, z₃) and `s_z` with the same
//! Z_P matrix read in the φ-basis.

use crate::endalg::{AlgebraError, CentralForm, Matrix, ZElement};
use crate::exterior::{ExtElement, ExteriorError, Monomial};
use crate::linalg;
use crate::scalars::{minus_i_pow, minus_two_pi_pow, two_pi_pow, two_pow, Ring, Scalar};

/// σ in the basis (1, β¹, β², β²β¹); column j is the image of basis vector j.
pub fn sigma_matrix<S: Scalar>() -> [[S; 4]; 4] {
    let z = || S::zero();
    let mi = -S::imag_unit();
    [
        [z(), z(), z(), minus_two_pi_pow(-1)],
        [z(), mi.clone(), z(), z()],
        [z(), z(), mi, z()],
        [minus_two_pi_pow(1), z(), z(), z()],
    ]
}

/// Image of one pair factor with sorted bits `bits` (bit 0 = β¹, bit 1 =
/// β²). In sorted form β¹β² = −β²β¹, so σ(1) = 2πβ¹β² and σ(β¹β²) = (2π)^{−1}.
fn pair_image<S: Scalar>(bits: u32, inverse: bool) -> (u32, S) {
    match bits {
        0b00 => (0b11, two_pi_pow(1)),
        0b11 => (0b00, two_pi_pow(-1)),
        b => (b, if inverse { S::imag_unit() } else { -S::imag_unit() }),
    }
}

fn apply_per_pair<S: Scalar>(z: &ExtElement<S>, inverse: bool) -> Result<ExtElement<S>, AlgebraError> {
    if !z.is_even() {
        return Err(ExteriorError::OddInput.into());
    }
    let n = z.pairs();
    let mut out = ExtElement::zero(n);
    for (m, c) in z.terms() {
        let mut mask = 0u32;
        let mut coeff = c.clone();
        for p in 1..=n {
            let (bits, f) = pair_image::<S>(m.pair_bits(p), inverse);
            mask |= bits << (2 * (p - 1));
            coeff = coeff * f;
        }
        out.add_term(Monomial(mask), coeff);
    }
    Ok(out)
}

/// S on Z_Λ: σ applied factor-wise.
pub fn s_lambda<S: Scalar>(z: &ExtElement<S>) -> Result<ExtElement<S>, AlgebraError> {
    apply_per_pair(z, false)
}

/// σ^{−1} applied factor-wise.
pub fn s_lambda_inv<S: Scalar>(z: &ExtElement<S>) -> Result<ExtElement<S>, AlgebraError> {
    apply_per_pair(z, true)
}

/// The Z_P block in (z₁, z₂, z₃) = (½(c_1 + c_{Π1}), c_T, c_{ΠT}).
pub fn sp_matrix<S: Ring>(pairs: usize) -> [[S; 3]; 3] {
    let n = pairs as i32;
    let half = S::from_ratio(1, 2);
    let q = two_pow::<S>(-n - 1);
    [[S::zero(), two_pow(n), -two_pow::<S>(n)], [q.clone(), half.clone(), half.clone()], [-q, half.clone(), half]]
}

pub fn s_p<S: Ring>(v: &[S; 3], pairs: usize) -> [S; 3] {
    let m = sp_matrix::<S>(pairs);
    [0, 1, 2].map(|i| (0..3).fold(S::zero(), |acc, j| acc + m[i][j].clone() * v[j].clone()))
}

/// S̃_Z: the S-action in the basis (z₁, z₂, z₃).
pub fn s_tilde_z<S: Scalar>(z: &ZElement<S>) -> Result<ZElement<S>, AlgebraError> {
    Ok(ZElement { z_lambda: s_lambda(&z.z_lambda)?, z_p: s_p(&z.z_p, z.pairs()) })
}

pub fn s_tilde_z_inv<S: Scalar>(z: &ZElement<S>) -> Result<ZElement<S>, AlgebraError> {
    Ok(ZElement { z_lambda: s_lambda_inv(&z.z_lambda)?, z_p: s_p(&z.z_p, z.pairs()) })
}

/// Scale factors ((2π)^N, 2^N, 2^N) between (z₁, z₂, z₃) and
/// (½(φ_1 + φ_{Π1}), φ_T, φ_{ΠT}).
fn phi_scales<S: Scalar>(pairs: usize) -> [S; 3] {
    let n = pairs as i32;
    [two_pi_pow(n), two_pow(n), two_pow(n)]
}

fn in_phi_basis<S: Scalar>(v: &[S; 3], pairs: usize) -> Result<[S; 3], AlgebraError> {
    let s = phi_scales::<S>(pairs);
    let mut out = [S::zero(), S::zero(), S::zero()];
    for i in 0..3 {
        out[i] = v[i].try_div(&s[i]).ok_or(AlgebraError::NonDegenerateRequired)?;
    }
    Ok(out)
}

fn from_phi_basis<S: Scalar>(v: &[S; 3], pairs: usize) -> [S; 3] {
    let s = phi_scales::<S>(pairs);
    [0, 1, 2].map(|i| v[i].clone() * s[i].clone())
}

fn s_z_with<S: Scalar>(
    z: &ZElement<S>,
    on_lambda: fn(&ExtElement<S>) -> Result<ExtElement<S>, AlgebraError>,
) -> Result<ZElement<S>, AlgebraError> {
    let n = z.pairs();
    let p = s_p(&in_phi_basis(&z.z_p, n)?, n);
    Ok(ZElement { z_lambda: on_lambda(&z.z_lambda)?, z_p: from_phi_basis(&p, n) })
}

/// S_Z: σ^{⊗N} on Z_Λ and the Z_P block in the φ-basis.
pub fn s_z<S: Scalar>(z: &ZElement<S>) -> Result<ZElement<S>, AlgebraError> {
    s_z_with(z, s_lambda)
}

pub fn s_z_inv<S: Scalar>(z: &ZElement<S>) -> Result<ZElement<S>, AlgebraError> {
    s_z_with(z, s_lambda_inv)
}

/// Matrix of S_Z in the closed-form centre basis (columns are images).
pub fn s_z_matrix<S: Scalar>(pairs: usize) -> Result<Matrix<S>, AlgebraError> {
    let basis = crate::endalg::center_closed_form::<S>(pairs)?;
    let cols: Vec<Vec<S>> = basis.iter().map(|b| s_z(b).map(|z| z.coords())).collect::<Result<_, _>>()?;
    let d = cols.len();
    Ok((0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect())
}

pub const Y_ORACLE_MAX_PAIRS: usize = 2;

/// Admissible insertion index sets: distinct l's, ascending j's with no
/// complete pair, and no j in a pair listed among the l's.
pub fn admissible_index_sets(pairs: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for l_mask in 0u32..(1 << pairs) {
        let l: Vec<usize> = (1..=pairs).filter(|p| l_mask >> (p - 1) & 1 == 1).collect();
        for j_mask in 0u32..(1 << (2 * pairs)) {
            let m = Monomial(j_mask);
            let ok = (1..=pairs).all(|p| m.pair_bits(p) != 0b11 && (m.pair_bits(p) == 0 || !l.contains(&p)));
            if ok {
                out.push((l.clone(), m.generators()));
            }
        }
    }
    out
}

/// Solves the uniqueness conditions ε(yκα^J γ_L) = (−i)^s (−2π)^{N−2r−s}
/// ε(zκα^J ∏_{j∉L∪[J]} γ_j) for y ∈ Λ(h) over all admissible (L, J).
pub fn y_oracle<S: Scalar>(z: &ExtElement<S>) -> Result<ExtElement<S>, AlgebraError> {
    let n = z.pairs();
    if n > Y_ORACLE_MAX_PAIRS {
        return Err(AlgebraError::TooLarge { what: "y oracle", max: Y_ORACLE_MAX_PAIRS, pairs: n });
    }
    if !z.is_even() {
        return Err(ExteriorError::OddInput.into());
    }
    let top = Monomial::top(n);
    // ε(xκY) = top coefficient of x·ω(Y)
    let eps_kappa = |x: &ExtElement<S>, y: &ExtElement<S>| x.mul(&y.parity_involution()).coeff(top);
    let unknowns: Vec<Monomial> = Monomial::all(n).collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (l, j) in admissible_index_sets(n) {
        let (r, s) = (l.len() as i32, j.len() as i32);
        let alpha_j = ExtElement::<S>::product_of_generators(n, &j)?;
        let mut with_l = alpha_j.clone();
        for &p in &l {
            with_l = with_l.mul(&ExtElement::gamma(n, p)?);
        }
        let used: Vec<usize> = j.iter().map(|k| k.div_ceil(2)).chain(l.iter().copied()).collect();
        let mut with_rest = alpha_j;
        for p in (1..=n).filter(|p| !used.contains(p)) {
            with_rest = with_rest.mul(&ExtElement::gamma(n, p)?);
        }
        let factor = minus_i_pow::<S>(s as u32) * minus_two_pi_pow::<S>(n as i32 - 2 * r - s);
        rows.push(unknowns.iter().map(|m| eps_kappa(&ExtElement::monomial(n, *m, S::one()), &with_l)).collect());
        rhs.push(factor * eps_kappa(z, &with_rest));
    }
    let y = linalg::solve(&rows, &rhs)?;
    let mut out = ExtElement::zero(n);
    for (m, c) in unknowns.into_iter().zip(y) {
        out.add_term(m, c);
    }
    Ok(out)
}

/// The central form transported by S̃_Z: a ↦ form(S̃_Z(z)·a).
pub fn transported_form<S: Scalar>(z: &ZElement<S>, form: &CentralForm<S>) -> Result<CentralForm<S>, AlgebraError> {
    Ok(crate::endalg::hat_iso(&s_tilde_z(z)?, form))
}
