//! Ground rings for every computation in the crate.
//!
//! The algebraic code is generic over [`Ring`] (and [`Scalar`] when the
//! imaginary unit and powers of π are needed). Two families implement it:
//!
//! * exact: [`GaussRat`] (ℚ(i)), [`ExactScalar`] (Laurent polynomials in a
//!   formal symbol π over ℚ(i)) and plain [`BigRational`];
//! * floating: `f32`, `f64` and `Complex<f32>`, `Complex<f64>`.
//!
//! π is never substituted in exact arithmetic, so equality of exact values is
//! structural equality of canonical forms.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Float, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("scalar is not invertible: {0}")]
    NotInvertible(String),
    #[error("cannot parse rational `{0}`")]
    BadRational(String),
}

/// Commutative ring with the handful of extras the linear algebra needs.
pub trait Ring:
    Clone + fmt::Debug + PartialEq + Send + Sync + Zero + One + Neg<Output = Self> + Sub<Output = Self>
{
    /// The rational number `num / den` embedded in the ring.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Exact quotient `self / rhs` when it exists inside the ring.
    fn try_div(&self, rhs: &Self) -> Option<Self>;

    /// True for elements with a two-sided inverse in the ring.
    fn is_unit(&self) -> bool;

    /// Zero test used by elimination. Floating types use a small threshold.
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
}

/// A ring containing ℚ(i) and the powers of π.
pub trait Scalar: Ring {
    fn imag_unit() -> Self;
    fn pi_pow(k: i32) -> Self;
    fn to_complex64(&self) -> Complex<f64>;
}

/// `base^k` by repeated squaring.
pub fn pow<S: Ring>(base: &S, mut k: u32) -> S {
    let mut acc = S::one();
    let mut b = base.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * b.clone();
        }
        b = b.clone() * b;
        k >>= 1;
    }
    acc
}

/// `2^k` for any integer `k`.
pub fn two_pow<S: Ring>(k: i32) -> S {
    if k >= 0 {
        pow(&S::from_int(2), k as u32)
    } else {
        pow(&S::from_ratio(1, 2), k.unsigned_abs())
    }
}

/// `(2π)^k`, `(−2π)^k` and `(2πi)^k` for any integer `k`.
pub fn two_pi_pow<S: Scalar>(k: i32) -> S {
    two_pow::<S>(k) * S::pi_pow(k)
}

pub fn minus_two_pi_pow<S: Scalar>(k: i32) -> S {
    let v = two_pi_pow::<S>(k);
    if k.rem_euclid(2) == 1 {
        -v
    } else {
        v
    }
}

/// `(−i)^k` for `k ≥ 0`.
pub fn minus_i_pow<S: Scalar>(k: u32) -> S {
    match k % 4 {
        0 => S::one(),
        1 => -S::imag_unit(),
        2 => -S::one(),
        _ => S::imag_unit(),
    }
}

pub fn two_pi_i_pow<S: Scalar>(k: i32) -> S {
    // i^k for negative k is i^(k mod 4)
    let i_part = match k.rem_euclid(4) {
        0 => S::one(),
        1 => S::imag_unit(),
        2 => -S::one(),
        _ => -S::imag_unit(),
    };
    two_pi_pow::<S>(k) * i_part
}

// ---------------------------------------------------------------------------
// Gaussian rationals
// ---------------------------------------------------------------------------

/// `re + im·i` with both parts in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussRat { re: BigRational::from_integer(BigInt::from(re)), im: BigRational::from_integer(BigInt::from(im)) }
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return Err(ScalarError::NotInvertible("0".into()));
        }
        Ok(GaussRat { re: &self.re / &n, im: -(&self.im / &n) })
    }

    pub fn to_complex<T: Float>(&self) -> Complex<T> {
        let re = self.re.to_f64().unwrap_or(f64::NAN);
        let im = self.im.to_f64().unwrap_or(f64::NAN);
        Complex::new(T::from(re).unwrap(), T::from(im).unwrap())
    }
}

impl Zero for GaussRat {
    fn zero() -> Self {
        Self::from_ints(0, 0)
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRat {
    fn one() -> Self {
        Self::from_ints(1, 0)
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re * &rhs.re - &self.im * &rhs.im, im: &self.re * &rhs.im + &self.im * &rhs.re }
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: GaussRat) -> GaussRat {
        &self + &rhs
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: GaussRat) -> GaussRat {
        &self - &rhs
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: GaussRat) -> GaussRat {
        &self * &rhs
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re, im: -self.im }
    }
}

impl Ring for GaussRat {
    fn from_ratio(num: i64, den: i64) -> Self {
        GaussRat { re: BigRational::new(BigInt::from(num), BigInt::from(den)), im: BigRational::zero() }
    }
    fn try_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inv().ok().map(|inv| self * &inv)
    }
    fn is_unit(&self) -> bool {
        !self.is_zero()
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}*i", self.im),
            (false, false) => write!(f, "{} + {}*i", self.re, self.im),
        }
    }
}

// ---------------------------------------------------------------------------
// Laurent polynomials in π over ℚ(i)
// ---------------------------------------------------------------------------

/// Σ_k c_k π^k with c_k ∈ ℚ(i); zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<ScalarTerm>", into = "Vec<ScalarTerm>")]
pub struct ExactScalar {
    terms: BTreeMap<i32, GaussRat>,
}

/// JSON form of one π-power term: `{"re":"a/b","im":"c/d","pi_pow":k}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarTerm {
    pub re: String,
    pub im: String,
    pub pi_pow: i32,
}

impl From<ExactScalar> for Vec<ScalarTerm> {
    fn from(s: ExactScalar) -> Self {
        s.terms.into_iter().map(|(k, c)| ScalarTerm { re: c.re.to_string(), im: c.im.to_string(), pi_pow: k }).collect()
    }
}

impl TryFrom<Vec<ScalarTerm>> for ExactScalar {
    type Error = ScalarError;
    fn try_from(terms: Vec<ScalarTerm>) -> Result<Self, ScalarError> {
        let parse = |s: &str| BigRational::from_str(s.trim()).map_err(|_| ScalarError::BadRational(s.to_string()));
        let mut out = ExactScalar::zero();
        for t in terms {
            let c = GaussRat::new(parse(&t.re)?, parse(&t.im)?);
            out += ExactScalar::monomial(c, t.pi_pow);
        }
        Ok(out)
    }
}

impl ExactScalar {
    pub fn monomial(coeff: GaussRat, pi_pow: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(pi_pow, coeff);
        }
        ExactScalar { terms }
    }

    pub fn from_gauss(c: GaussRat) -> Self {
        Self::monomial(c, 0)
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Self::from_gauss(GaussRat::from_ratio(num, den))
    }

    pub fn i() -> Self {
        Self::from_gauss(GaussRat::i())
    }

    pub fn pi() -> Self {
        Self::monomial(GaussRat::one(), 1)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &GaussRat)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of π^k.
    pub fn coeff(&self, k: i32) -> GaussRat {
        self.terms.get(&k).cloned().unwrap_or_else(GaussRat::zero)
    }

    /// The value as a rational integer, if it is one.
    pub fn to_integer(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => {
                let c = self.terms.get(&0)?;
                (c.im.is_zero() && c.re.is_integer()).then(|| c.re.to_integer())
            }
            _ => None,
        }
    }

    /// Inverse of a single nonzero monomial `c·π^k`.
    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.terms.len() != 1 {
            return Err(ScalarError::NotInvertible(self.to_string()));
        }
        let (k, c) = self.terms.iter().next().unwrap();
        Ok(Self::monomial(c.inv()?, -k))
    }

    /// Substitutes a numeric value for π.
    pub fn to_complex<T: Float>(&self, pi_value: T) -> Complex<T> {
        self.terms
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (k, c)| acc + c.to_complex::<T>() * pi_value.powi(*k))
    }

    fn add_term(&mut self, k: i32, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&k);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    fn scale_monomial(&self, c: &GaussRat, k: i32) -> Self {
        ExactScalar { terms: self.terms.iter().map(|(e, v)| (e + k, v * c)).collect() }
    }

    /// Exact division in ℚ(i)[π, π⁻¹] by long division from the top degree.
    fn laurent_div(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        if let Ok(inv) = d.inv() {
            return Some(self * &inv);
        }
        let (&d_top, d_lead) = d.terms.iter().next_back()?;
        let d_span = d_top - *d.terms.keys().next()?;
        let d_lead_inv = d_lead.inv().ok()?;
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some((&r_top, r_lead)) = rem.terms.iter().next_back() {
            let r_low = *rem.terms.keys().next().unwrap();
            if r_top - r_low < d_span {
                return None;
            }
            let qc = r_lead * &d_lead_inv;
            let qk = r_top - d_top;
            let step = d.scale_monomial(&qc, qk);
            rem = &rem - &step;
            quot.add_term(qk, qc);
        }
        Some(quot)
    }
}

impl Zero for ExactScalar {
    fn zero() -> Self {
        ExactScalar { terms: BTreeMap::new() }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for ExactScalar {
    fn one() -> Self {
        Self::from_gauss(GaussRat::one())
    }
}

impl<'a> Add<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = ExactScalar::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.add_term(ka + kb, ca * cb);
            }
        }
        out
    }
}

impl Add for ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: ExactScalar) -> ExactScalar {
        &self + &rhs
    }
}

impl AddAssign for ExactScalar {
    fn add_assign(&mut self, rhs: ExactScalar) {
        for (k, c) in rhs.terms {
            self.add_term(k, c);
        }
    }
}

impl Sub for ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: ExactScalar) -> ExactScalar {
        &self - &rhs
    }
}

impl Mul for ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: ExactScalar) -> ExactScalar {
        &self * &rhs
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar { terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect() }
    }
}

impl From<GaussRat> for ExactScalar {
    fn from(c: GaussRat) -> Self {
        Self::from_gauss(c)
    }
}

impl Ring for ExactScalar {
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::rational(num, den)
    }
    fn try_div(&self, rhs: &Self) -> Option<Self> {
        self.laurent_div(rhs)
    }
    fn is_unit(&self) -> bool {
        self.terms.len() == 1
    }
}

impl Scalar for ExactScalar {
    fn imag_unit() -> Self {
        Self::i()
    }
    fn pi_pow(k: i32) -> Self {
        Self::monomial(GaussRat::one(), k)
    }
    fn to_complex64(&self) -> Complex<f64> {
        self.to_complex(std::f64::consts::PI)
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let both = !c.re.is_zero() && !c.im.is_zero();
            match (*k, both) {
                (0, _) => write!(f, "{c}")?,
                (_, true) => write!(f, "({c}) * pi^{k}")?,
                (_, false) => write!(f, "{c} * pi^{k}")?,
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Other instances
// ---------------------------------------------------------------------------

impl Ring for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn try_div(&self, rhs: &Self) -> Option<Self> {
        (!rhs.is_zero()).then(|| self / rhs)
    }
    fn is_unit(&self) -> bool {
        !self.is_zero()
    }
}

macro_rules! float_ring {
    ($t:ty) => {
        impl Ring for $t {
            fn from_ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }
            fn try_div(&self, rhs: &Self) -> Option<Self> {
                (*rhs != 0.0).then(|| self / rhs)
            }
            fn is_unit(&self) -> bool {
                !self.is_negligible()
            }
            fn is_negligible(&self) -> bool {
                self.abs() < <$t>::EPSILON.sqrt()
            }
        }

        impl Ring for Complex<$t> {
            fn from_ratio(num: i64, den: i64) -> Self {
                Complex::new(num as $t / den as $t, 0.0)
            }
            fn try_div(&self, rhs: &Self) -> Option<Self> {
                (!rhs.is_zero()).then(|| self / rhs)
            }
            fn is_unit(&self) -> bool {
                !self.is_negligible()
            }
            fn is_negligible(&self) -> bool {
                self.norm() < <$t>::EPSILON.sqrt()
            }
        }

        impl Scalar for Complex<$t> {
            fn imag_unit() -> Self {
                Complex::new(0.0, 1.0)
            }
            fn pi_pow(k: i32) -> Self {
                Complex::new(<$t>::powi(std::f64::consts::PI as $t, k), 0.0)
            }
            fn to_complex64(&self) -> Complex<f64> {
                Complex::new(self.re as f64, self.im as f64)
            }
        }
    };
}

float_ring!(f32);
float_ring!(f64);

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactScalar {
        ExactScalar::rational(n, d)
    }

    #[test]
    fn gaussian_norm() {
        let a = ExactScalar::one() + ExactScalar::i();
        let b = ExactScalar::one() - ExactScalar::i();
        assert_eq!(a * b, q(2, 1));
    }

    #[test]
    fn monomial_inverse() {
        let m = minus_two_pi_pow::<ExactScalar>(1);
        assert_eq!(m, q(-2, 1) * ExactScalar::pi());
        assert_eq!(&m * &m.inv().unwrap(), ExactScalar::one());
    }

    #[test]
    fn two_pi_negative_power() {
        let v = two_pi_pow::<ExactScalar>(-2);
        assert_eq!(v, ExactScalar::monomial(GaussRat::from_ratio(1, 4), -2));
    }

    #[test]
    fn inverse_errors() {
        assert!(ExactScalar::zero().inv().is_err());
        assert!((ExactScalar::one() + ExactScalar::pi()).inv().is_err());
    }

    #[test]
    fn laurent_division() {
        let p = ExactScalar::one() + ExactScalar::pi();
        let r = ExactScalar::pi_pow(-3) - ExactScalar::i();
        let prod = &p * &r;
        assert_eq!(prod.try_div(&p), Some(r.clone()));
        assert_eq!(prod.try_div(&r), Some(p.clone()));
        // 1 + π² is not a multiple of 1 + π
        let s = ExactScalar::one() + ExactScalar::pi_pow(2);
        assert_eq!(s.try_div(&p), None);
    }

    #[test]
    fn to_complex_examples() {
        let pi = std::f64::consts::PI;
        assert_eq!(ExactScalar::one().to_complex(pi), Complex::new(1.0, 0.0));
        assert_eq!(ExactScalar::i().to_complex(pi), Complex::new(0.0, 1.0));
        let v = two_pi_pow::<ExactScalar>(-1).to_complex(pi);
        assert!((v.re - 0.15915494309189535).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn powers_of_i_and_pi() {
        assert_eq!(two_pi_i_pow::<ExactScalar>(2), q(-4, 1) * ExactScalar::pi_pow(2));
        let inv = two_pi_i_pow::<ExactScalar>(-1);
        assert_eq!(inv * two_pi_i_pow::<ExactScalar>(1), ExactScalar::one());
        assert_eq!(minus_i_pow::<ExactScalar>(3), ExactScalar::i());
    }

    #[test]
    fn rendering_and_json() {
        let s = q(1, 2)
            + ExactScalar::monomial(
                GaussRat::new(BigRational::new(3.into(), 4.into()), BigRational::new((-1).into(), 3.into())),
                -2,
            );
        assert_eq!(s.to_string(), "(3/4 + -1/3*i) * pi^-2 + 1/2");
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"[{"re":"3/4","im":"-1/3","pi_pow":-2},{"re":"1/2","im":"0","pi_pow":0}]"#);
        let back: ExactScalar = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn float_instances() {
        let z = Complex::<f64>::imag_unit() * Complex::<f64>::pi_pow(1);
        assert!((z.im - std::f64::consts::PI).abs() < 1e-15);
        assert!(1e-12f64.is_negligible());
        assert_eq!(<f32 as Ring>::from_ratio(1, 4), 0.25);
    }
}
