//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num_traits::Zero;
use verlinde_lab::endalg::{basis_dim, centre_dim, identity, right_mul_matrix, EElement, Presentation, ZElement};
use verlinde_lab::scalars::{ExactScalar, Ring, Scalar};
use verlinde_lab::verlinde::{FusionTable, SMatrixInput};

pub type X = ExactScalar;

// ---------------------------------------------------------------------------
// Semisimple fusion rings
// ---------------------------------------------------------------------------

fn table(labels: &[&str], rule: impl Fn(usize, usize) -> Vec<i64>) -> FusionTable {
    let d = labels.len();
    let n_abc = (0..d).map(|a| (0..d).map(|b| rule(a, b)).collect()).collect();
    FusionTable::new(labels.iter().map(|s| s.to_string()).collect(), n_abc).unwrap()
}

/// 1, τ with τ·τ = 1 + τ.
pub fn fibonacci() -> FusionTable {
    table(&["1", "tau"], |a, b| match (a, b) {
        (0, x) | (x, 0) => {
            if x == 0 {
                vec![1, 0]
            } else {
                vec![0, 1]
            }
        }
        _ => vec![1, 1],
    })
}

/// 1, σ, ψ with σσ = 1 + ψ, σψ = σ, ψψ = 1.
pub fn ising() -> FusionTable {
    table(&["1", "sigma", "psi"], |a, b| match (a.min(b), a.max(b)) {
        (0, x) => (0..3).map(|c| i64::from(c == x)).collect(),
        (1, 1) => vec![1, 0, 1],
        (1, 2) => vec![0, 1, 0],
        _ => vec![1, 0, 0],
    })
}

/// ℤ₅: g^a g^b = g^{a+b mod 5}.
pub fn z5() -> FusionTable {
    table(&["0", "1", "2", "3", "4"], |a, b| (0..5).map(|c| i64::from(c == (a + b) % 5)).collect())
}

/// Regenerates an S-matrix by diagonalising a generic combination of the
/// fusion matrices. The matrices are commuting and normal, so the Schur
/// vectors of the combination are their common eigenvectors, and any
/// scaling of those columns gives the same Verlinde coefficients.
pub fn regenerate_s(t: &FusionTable, seed: u64) -> SMatrixInput {
    let d = t.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for a in 0..d {
        let c: f64 = rng.gen_range(0.5..1.5);
        let n = t.fusion_matrix(a);
        m += DMatrix::from_fn(d, d, |b, e| Complex64::new(c * n[b][e] as f64, 0.0));
    }
    let (q, _) = nalgebra::Schur::new(m).unpack();
    // normalise each column so its vacuum entry is real and positive
    let s = DMatrix::from_fn(d, d, |i, x| {
        let v0 = q[(0, x)];
        q[(i, x)] * (v0.conj() / v0.norm())
    });
    SMatrixInput::from_complex(t.labels().to_vec(), 0, &s)
}

// ---------------------------------------------------------------------------
// Characters as infinite products
// ---------------------------------------------------------------------------

/// (q^{1/24} ∏(1 ± qⁿ))² evaluated directly from the product.
pub fn chi_ns(tau: Complex64, sign: f64) -> Complex64 {
    let q = |x: f64| (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * tau * x).exp();
    let mut p = q(1.0 / 24.0);
    for n in 1..2000 {
        p *= Complex64::new(1.0, 0.0) + sign * q(n as f64);
    }
    p * p
}

/// (q^{−1/48} ∏(1 ± q^{n−1/2}))² evaluated directly from the product.
pub fn chi_r(tau: Complex64, sign: f64) -> Complex64 {
    let q = |x: f64| (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * tau * x).exp();
    let mut p = q(-1.0 / 48.0);
    for n in 1..2000 {
        p *= Complex64::new(1.0, 0.0) + sign * q(n as f64 - 0.5);
    }
    p * p
}

pub fn rel_dev(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------------------
// Random algebra elements
// ---------------------------------------------------------------------------

pub fn random_scalar(rng: &mut ChaCha8Rng) -> X {
    let re = rng.gen_range(-4..=4);
    let im = rng.gen_range(-2..=2);
    (X::from_int(re) + X::i() * X::from_int(im)) * X::pi_pow(rng.gen_range(-1..=1))
}

pub fn random_e(n: usize, rng: &mut ChaCha8Rng, density: f64) -> EElement<X> {
    let v: Vec<X> =
        (0..basis_dim(n)).map(|_| if rng.gen_bool(density) { random_scalar(rng) } else { X::zero() }).collect();
    EElement::from_coords(n, &v)
}

pub fn random_central(n: usize, rng: &mut ChaCha8Rng) -> ZElement<X> {
    let v: Vec<X> = (0..centre_dim(n)).map(|_| random_scalar(rng)).collect();
    ZElement::from_coords(n, &v)
}

/// Cover E ⊕ E ↠ E with π(a, b) = a + b·c and section a ↦ (a·(1 − v c), a·v).
pub fn fattened(n: usize, c: &EElement<X>, v: &EElement<X>) -> Presentation<X> {
    let dim = basis_dim(n);
    let u = EElement::one(n).sub(&v.e_mul(c).unwrap());
    let (rc, ru, rv) = (right_mul_matrix(c), right_mul_matrix(&u), right_mul_matrix(v));
    let id = identity::<X>(dim);
    let pi = (0..dim).map(|i| [id[i].clone(), rc[i].clone()].concat()).collect();
    Presentation { x_dim: 2, pi, iota: [ru, rv].concat() }
}
