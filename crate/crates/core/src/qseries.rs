//! Truncated Puiseux series in q = e^{2πiτ}, the N = 1 characters, exact
//! pseudo-trace expressions, and numeric checks of S-covariance.
//!
//! Exponents live on the lattice (1/48)ℤ and are stored by numerator. The
//! transformed side of every check is evaluated directly at the nome
//! e^{−2πi/τ}; no series is ever transformed symbolically.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{Float, FloatConst, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::endalg::{center_closed_form, eps_form, AlgebraError, EElement, ZElement};
use crate::exterior::{ExtElement, Monomial};
use crate::linalg;
use crate::scalars::{two_pi_i_pow, ExactScalar, Ring, Scalar};
use crate::smod::s_tilde_z;

/// Denominator of the exponent lattice.
pub const STEP: i64 = 48;
pub const DEFAULT_TRUNCATION: usize = 400;
pub const MIN_IM_TAU: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("Im(tau) = {im} is below the convergence guard {min}")]
    ImTooSmall { im: f64, min: f64 },
    #[error("{name} at tau = {tau}: relative deviation {deviation:e} exceeds tolerance")]
    ToleranceExceeded { name: String, tau: String, deviation: f64 },
    #[error("invalid insertion: {0}")]
    BadInsertion(String),
    #[error("truncation must be positive")]
    BadTruncation,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

fn guard<T: Float>(tau: Complex<T>, min_im: T) -> Result<(), SeriesError> {
    if tau.im < min_im {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        return Err(SeriesError::ImTooSmall { im: f(tau.im), min: f(min_im) });
    }
    Ok(())
}

/// Σ c_k q^{k/48} with every stored k below `truncation`.
#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxSeries<T> {
    coeffs: BTreeMap<i64, Complex<T>>,
    truncation: i64,
}

impl<T: Float + FloatConst> PuiseuxSeries<T> {
    pub fn zero(truncation: i64) -> Self {
        PuiseuxSeries { coeffs: BTreeMap::new(), truncation }
    }

    pub fn constant(c: Complex<T>, truncation: i64) -> Self {
        Self::from_terms(truncation, [(0, c)])
    }

    pub fn from_terms(truncation: i64, terms: impl IntoIterator<Item = (i64, Complex<T>)>) -> Self {
        let mut s = Self::zero(truncation);
        for (k, c) in terms {
            s.add_term(k, c);
        }
        s
    }

    fn add_term(&mut self, k: i64, c: Complex<T>) {
        if k >= self.truncation || c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(k).or_insert_with(Complex::zero);
        *e = *e + c;
        if e.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn truncation(&self) -> i64 {
        self.truncation
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Complex<T>)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn coeff(&self, k: i64) -> Complex<T> {
        self.coeffs.get(&k).copied().unwrap_or_else(Complex::zero)
    }

    pub fn leading_exponent(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn add(&self, other: &Self) -> Self {
        let t = self.truncation.min(other.truncation);
        Self::from_terms(t, self.terms().chain(other.terms()).map(|(k, c)| (k, *c)))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_terms(self.truncation, self.terms().map(|(k, c)| (k, *c * s)))
    }

    /// Product, known up to min(t₁ + v₂, t₂ + v₁) with v the leading exponents.
    pub fn mul(&self, other: &Self) -> Self {
        let v1 = self.leading_exponent().unwrap_or(self.truncation);
        let v2 = other.leading_exponent().unwrap_or(other.truncation);
        let t = (self.truncation + v2).min(other.truncation + v1);
        let mut out = Self::zero(t);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_term(a + b, *ca * *cb);
            }
        }
        out
    }

    /// d/dτ, term-wise: q^{k/48} ↦ 2πi(k/48) q^{k/48}.
    pub fn derivative(&self) -> Self {
        let two_pi_i = Complex::new(T::zero(), T::TAU());
        let step = T::from(STEP).expect("representable");
        Self::from_terms(
            self.truncation,
            self.terms().map(|(k, c)| (k, *c * two_pi_i * T::from(k).expect("representable") / step)),
        )
    }

    /// Σ c_k e^{2πiτk/48}. Requires Im τ ≥ `min_im`.
    pub fn evaluate(&self, tau: Complex<T>, min_im: T) -> Result<Complex<T>, SeriesError> {
        guard(tau, min_im)?;
        let step = T::from(STEP).expect("representable");
        let base = Complex::new(T::zero(), T::TAU()) * tau / step;
        Ok(self
            .terms()
            .fold(Complex::zero(), |acc, (k, c)| acc + *c * (base * T::from(k).expect("representable")).exp()))
    }

    /// Geometric tail estimate |c_last|·|q|^{t/48}/(1 − |q|^{1/2}), where the
    /// series has been cut: the omitted terms decay at least that fast for the
    /// character products used here.
    pub fn tail_estimate(&self, tau: Complex<T>) -> T {
        let step = T::from(STEP).expect("representable");
        let abs_q = (-T::TAU() * tau.im).exp();
        let last = self.coeffs.values().next_back().map_or(T::zero(), |c| c.norm());
        last * abs_q.powf(T::from(self.truncation).expect("representable") / step) / (T::one() - abs_q.sqrt())
    }
}

// ---------------------------------------------------------------------------
// Characters
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CharId {
    NsPlus,
    NsMinus,
    RPlus,
    RMinus,
}

impl CharId {
    pub const ALL: [CharId; 4] = [CharId::NsPlus, CharId::NsMinus, CharId::RPlus, CharId::RMinus];

    pub fn name(self) -> &'static str {
        match self {
            CharId::NsPlus => "ns+",
            CharId::NsMinus => "ns-",
            CharId::RPlus => "r+",
            CharId::RMinus => "r-",
        }
    }

    fn sign(self) -> i64 {
        match self {
            CharId::NsPlus | CharId::RPlus => 1,
            CharId::NsMinus | CharId::RMinus => -1,
        }
    }

    fn twisted(self) -> bool {
        matches!(self, CharId::RPlus | CharId::RMinus)
    }
}

/// Coefficients of ∏_{k ∈ factors} (1 + sign·x^k)² below x^len, exactly.
fn squared_product(sign: i64, factors: impl Iterator<Item = usize>, len: usize) -> Vec<BigInt> {
    let mut a = vec![BigInt::zero(); len];
    a[0] = BigInt::from(1);
    let two_sign = BigInt::from(2 * sign);
    for k in factors.take_while(|&k| k < len) {
        for m in (k..len).rev() {
            let mut v = &a[m - k] * &two_sign;
            if m >= 2 * k {
                v += &a[m - 2 * k];
            }
            a[m] += v;
        }
    }
    a
}

/// χ_{ns,±} = (q^{1/24}∏(1 ± qⁿ))² and χ_{r,±} = (q^{−1/48}∏(1 ± q^{n−1/2}))²,
/// keeping all powers below q^{truncation} after the prefactor.
pub fn character_series<T: Float + FloatConst>(id: CharId, truncation: usize) -> Result<PuiseuxSeries<T>, SeriesError> {
    if truncation == 0 {
        return Err(SeriesError::BadTruncation);
    }
    let to_t = |b: &BigInt| Complex::new(T::from(b.to_f64().unwrap_or(f64::NAN)).expect("finite"), T::zero());
    let t = truncation as i64;
    Ok(if id.twisted() {
        // x = q^{1/2}; factors x^{2n−1}
        let a = squared_product(id.sign(), (1..).step_by(2), 2 * truncation);
        PuiseuxSeries::from_terms(-2 + STEP * t, a.iter().enumerate().map(|(m, c)| (-2 + 24 * m as i64, to_t(c))))
    } else {
        let a = squared_product(id.sign(), 1.., truncation);
        PuiseuxSeries::from_terms(4 + STEP * t, a.iter().enumerate().map(|(m, c)| (4 + STEP * m as i64, to_t(c))))
    })
}

/// The four characters with their first and second τ-derivatives.
#[derive(Clone, Debug)]
pub struct Characters<T> {
    pub truncation: usize,
    series: [[PuiseuxSeries<T>; 3]; 4],
}

impl<T: Float + FloatConst + Send + Sync> Characters<T> {
    pub fn new(truncation: usize) -> Result<Self, SeriesError> {
        let one = |id: CharId| -> Result<[PuiseuxSeries<T>; 3], SeriesError> {
            let s = character_series::<T>(id, truncation)?;
            let d = s.derivative();
            let dd = d.derivative();
            Ok([s, d, dd])
        };
        Ok(Characters {
            truncation,
            series: [one(CharId::NsPlus)?, one(CharId::NsMinus)?, one(CharId::RPlus)?, one(CharId::RMinus)?],
        })
    }

    pub fn series(&self, id: CharId, derivative: usize) -> &PuiseuxSeries<T> {
        &self.series[id as usize][derivative]
    }

    /// Values χ^{(d)}(τ) for d = 0, 1, 2, indexed [id][d].
    pub fn values(&self, tau: Complex<T>, min_im: T) -> Result<[[Complex<T>; 3]; 4], SeriesError> {
        let mut out = [[Complex::zero(); 3]; 4];
        for (i, row) in self.series.iter().enumerate() {
            for (d, s) in row.iter().enumerate() {
                out[i][d] = s.evaluate(tau, min_im)?;
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Pseudo-trace expressions
// ---------------------------------------------------------------------------

/// Insertion ∏_l γ̃_l ∏_j α^j_{−1} with r = |l| and s = |j|.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Insertion {
    pub l_indices: Vec<usize>,
    pub j_indices: Vec<usize>,
}

impl Insertion {
    pub fn new(l_indices: Vec<usize>, j_indices: Vec<usize>) -> Self {
        Insertion { l_indices, j_indices }
    }

    pub fn empty() -> Self {
        Self::new(vec![], vec![])
    }

    pub fn r(&self) -> usize {
        self.l_indices.len()
    }

    pub fn s(&self) -> usize {
        self.j_indices.len()
    }

    /// Modular weight 2r + s.
    pub fn weight(&self) -> usize {
        2 * self.r() + self.s()
    }

    pub fn has_repeated_l(&self) -> bool {
        (1..self.l_indices.len()).any(|i| self.l_indices[..i].contains(&self.l_indices[i]))
    }

    pub fn validate(&self, pairs: usize) -> Result<(), SeriesError> {
        let bad = |m: String| Err(SeriesError::BadInsertion(m));
        if self.l_indices.iter().any(|&l| l == 0 || l > pairs) {
            return bad(format!("l index out of range 1..={pairs}"));
        }
        if self.l_indices.iter().any(|l| self.l_indices.iter().filter(|m| *m == l).count() > 2) {
            return bad("an l index appears more than twice".into());
        }
        if self.j_indices.iter().any(|&j| j == 0 || j > 2 * pairs) {
            return bad(format!("j index out of range 1..={}", 2 * pairs));
        }
        if self.j_indices.windows(2).any(|w| w[0] >= w[1]) {
            return bad("j indices must be strictly ascending".into());
        }
        if self.j_indices.windows(2).any(|w| w[0] % 2 == 1 && w[1] == w[0] + 1) {
            return bad("j indices contain a complete pair".into());
        }
        Ok(())
    }

    /// All insertions with distinct l's, valid j's and r + s ≤ `max_rs`.
    pub fn enumerate(pairs: usize, max_rs: usize) -> Vec<Insertion> {
        let mut out = Vec::new();
        for l_mask in 0u32..(1 << pairs) {
            let l: Vec<usize> = (1..=pairs).filter(|p| l_mask >> (p - 1) & 1 == 1).collect();
            for j_mask in 0u32..(1 << (2 * pairs)) {
                let m = Monomial(j_mask);
                let w = Insertion::new(l.clone(), m.generators());
                if w.r() + w.s() <= max_rs && (1..=pairs).all(|p| m.pair_bits(p) != 0b11) {
                    out.push(w);
                }
            }
        }
        out.sort_by_key(|w| (w.r() + w.s(), w.clone()));
        out
    }
}

impl fmt::Display for Insertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        write!(f, "l={{{}}} j={{{}}}", list(&self.l_indices), list(&self.j_indices))
    }
}

/// One monomial τ^p · χ^{N−a−b} (χ′)^a (χ″)^b of a single character family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TermKey {
    pub character: CharId,
    pub first: usize,
    pub second: usize,
    pub tau_pow: usize,
}

/// ζ^z(w, τ) as exact coefficients of [`TermKey`] monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoTraceExpr {
    pub pairs: usize,
    pub terms: BTreeMap<TermKey, ExactScalar>,
}

/// Expansion of ∏_l ∂_{τ_l} ∏_j τ_j^{[j∈S]} χ(τ_j) at τ_j = τ as
/// (τ-power, #χ′, #χ″) ↦ multiplicity.
fn derivative_pattern(mult: &[usize], s_mask: u32) -> BTreeMap<(usize, usize, usize), i64> {
    let mut acc = BTreeMap::from([((0, 0, 0), 1i64)]);
    for (j, &m) in mult.iter().enumerate() {
        let in_s = s_mask >> j & 1 == 1;
        // (τ-power, derivative order, multiplicity) for this factor
        let options: Vec<(usize, usize, i64)> = match (in_s, m) {
            (false, m) => vec![(0, m, 1)],
            (true, 0) => vec![(1, 0, 1)],
            (true, m) => vec![(1, m, 1), (0, m - 1, m as i64)],
        };
        let mut next = BTreeMap::new();
        for (&(p, a, b), &c) in &acc {
            for &(dp, d, k) in &options {
                let key = (p + dp, a + usize::from(d == 1), b + usize::from(d == 2));
                *next.entry(key).or_insert(0) += c * k;
            }
        }
        acc = next;
    }
    acc
}

impl PseudoTraceExpr {
    pub fn zero(pairs: usize) -> Self {
        PseudoTraceExpr { pairs, terms: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(&mut self, key: TermKey, c: ExactScalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(key).or_insert_with(ExactScalar::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Numeric value at τ.
    pub fn evaluate(
        &self,
        chars: &Characters<f64>,
        tau: Complex<f64>,
        min_im: f64,
    ) -> Result<Complex<f64>, SeriesError> {
        if self.is_zero() {
            guard(tau, min_im)?;
            return Ok(Complex::zero());
        }
        let v = chars.values(tau, min_im)?;
        let n = self.pairs;
        Ok(self.terms.iter().fold(Complex::zero(), |acc, (k, c)| {
            let x = v[k.character as usize];
            let zeroth = (n - k.first - k.second) as i32;
            acc + c.to_complex64()
                * tau.powi(k.tau_pow as i32)
                * x[0].powi(zeroth)
                * x[1].powi(k.first as i32)
                * x[2].powi(k.second as i32)
        }))
    }
}

/// ζ^z(w, τ) built from φ = ε(z·−): the untwisted sector expands
/// e^{2πiγ_jτ_j} = 1 + 2πiγ_jτ_j over subsets S, differentiates in the τ_l,
/// and sets all τ_j = τ; the twisted sector contributes only when s = 0.
pub fn pseudo_trace_expr(z: &ZElement<ExactScalar>, w: &Insertion) -> Result<PseudoTraceExpr, SeriesError> {
    let n = z.pairs();
    w.validate(n)?;
    type X = ExactScalar;
    let eps = eps_form::<X>(n);
    let ze = z.to_e();
    // κ acts on both summands: κ·1_Λ + κe_T
    let z_kappa = ze.mul(&EElement::kappa(n).add(&EElement::kappa_e_t(n)));
    let pref = X::from_ratio(1, 2) * two_pi_i_pow::<X>(-(w.r() as i32));
    let mult: Vec<usize> = (1..=n).map(|j| w.l_indices.iter().filter(|&&l| l == j).count()).collect();
    let alpha_j =
        EElement::from_lambda(ExtElement::<X>::product_of_generators(n, &w.j_indices).map_err(AlgebraError::from)?);
    let mut out = PseudoTraceExpr::zero(n);

    let mut push = |cp: X, cm: X, family: (CharId, CharId), s_mask: u32, scale: X| {
        if cp.is_zero() && cm.is_zero() {
            return;
        }
        for ((tau_pow, first, second), k) in derivative_pattern(&mult, s_mask) {
            let f = pref.clone() * scale.clone() * X::from_int(k);
            let key = |character| TermKey { character, first, second, tau_pow };
            out.add(key(family.0), f.clone() * cp.clone());
            out.add(key(family.1), f * cm.clone());
        }
    };

    for s_mask in 0u32..(1 << n) {
        let mut ins = alpha_j.clone();
        for p in (1..=n).filter(|p| s_mask >> (p - 1) & 1 == 1) {
            ins = ins.mul(&EElement::from_lambda(ExtElement::gamma(n, p).map_err(AlgebraError::from)?));
        }
        let cp = eps.apply(&ze.mul(&ins));
        let cm = eps.apply(&z_kappa.mul(&ins));
        push(cp, cm, (CharId::NsPlus, CharId::NsMinus), s_mask, two_pi_i_pow(s_mask.count_ones() as i32));
    }
    if w.s() == 0 {
        let cp = eps.apply(&ze.mul(&EElement::e_t(n)));
        let cm = eps.apply(&z_kappa.mul(&EElement::e_t(n)));
        push(cp, cm, (CharId::RPlus, CharId::RMinus), 0, X::from_int(1));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub tau: [f64; 2],
    pub deviation: f64,
    pub pass: bool,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<44} tau={:+.3}{:+.3}i  rel.dev={:.3e}  {}",
            self.name,
            self.tau[0],
            self.tau[1],
            self.deviation,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub lines: Vec<CheckLine>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    pub fn max_deviation(&self) -> f64 {
        self.lines.iter().map(|l| l.deviation).fold(0.0, f64::max)
    }

    pub fn extend(&mut self, other: Report) {
        self.lines.extend(other.lines);
    }

    /// The first failing line as an error.
    pub fn ensure(self) -> Result<Self, SeriesError> {
        match self.lines.iter().find(|l| !l.pass) {
            Some(l) => Err(SeriesError::ToleranceExceeded {
                name: l.name.clone(),
                tau: format!("{:+}{:+}i", l.tau[0], l.tau[1]),
                deviation: l.deviation,
            }),
            None => Ok(self),
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.lines.iter().try_for_each(|l| writeln!(f, "{l}"))
    }
}

/// |a − b| / max(|a|, |b|), and 0 when both vanish.
pub fn relative_deviation(a: Complex<f64>, b: Complex<f64>) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

fn line(name: String, tau: Complex<f64>, lhs: Complex<f64>, rhs: Complex<f64>, tol: f64) -> CheckLine {
    let deviation = relative_deviation(lhs, rhs);
    CheckLine { name, tau: [tau.re, tau.im], deviation, pass: deviation <= tol }
}

pub fn default_taus() -> Vec<Complex<f64>> {
    vec![Complex::new(0.0, 1.0), Complex::new(0.3, 1.1), Complex::new(-0.4, 0.8)]
}

/// The four character identities under τ ↦ −1/τ.
pub fn check_character_s(
    chars: &Characters<f64>,
    taus: &[Complex<f64>],
    tol: f64,
    min_im: f64,
) -> Result<Report, SeriesError> {
    let mut report = Report::default();
    let i = Complex::new(0.0, 1.0);
    for &tau in taus {
        let st = -tau.inv();
        let at = |id, t| chars.series(id, 0).evaluate(t, min_im);
        let identities = [
            ("chi_ns+(-1/tau) = 1/2 chi_r-(tau)", at(CharId::NsPlus, st)?, at(CharId::RMinus, tau)? * 0.5),
            ("chi_ns-(-1/tau) = -i tau chi_ns-(tau)", at(CharId::NsMinus, st)?, -i * tau * at(CharId::NsMinus, tau)?),
            ("chi_r+(-1/tau) = chi_r+(tau)", at(CharId::RPlus, st)?, at(CharId::RPlus, tau)?),
            ("chi_r-(-1/tau) = 2 chi_ns+(tau)", at(CharId::RMinus, st)?, at(CharId::NsPlus, tau)? * 2.0),
        ];
        for (name, lhs, rhs) in identities {
            report.lines.push(line(name.to_string(), tau, lhs, rhs, tol));
        }
    }
    Ok(report)
}

/// τ^{−(2r+s)} ζ^z(w, −1/τ) against ζ^{S̃_Z z}(w, τ).
pub fn check_modular_covariance(
    chars: &Characters<f64>,
    z: &ZElement<ExactScalar>,
    w: &Insertion,
    taus: &[Complex<f64>],
    tol: f64,
    min_im: f64,
) -> Result<Report, SeriesError> {
    let lhs_expr = pseudo_trace_expr(z, w)?;
    let rhs_expr = pseudo_trace_expr(&s_tilde_z(z)?, w)?;
    let mut report = Report::default();
    for &tau in taus {
        let lhs = tau.powi(-(w.weight() as i32)) * lhs_expr.evaluate(chars, -tau.inv(), min_im)?;
        let rhs = rhs_expr.evaluate(chars, tau, min_im)?;
        report.lines.push(line(format!("covariance {w}"), tau, lhs, rhs, tol));
    }
    Ok(report)
}

/// Short names for the closed-form centre basis.
pub fn centre_basis_labels(pairs: usize) -> Vec<String> {
    let mut out: Vec<String> = Monomial::all_even(pairs)
        .map(|m| {
            let g = m.generators();
            if g.is_empty() {
                "1".to_string()
            } else {
                g.iter().map(|k| format!("a{k}")).collect::<Vec<_>>().join("^")
            }
        })
        .collect();
    out.extend(["z1", "z2", "z3"].map(String::from));
    out
}

/// Covariance for every centre-basis element and every insertion with
/// distinct l's and r + s ≤ `max_rs`.
pub fn covariance_suite(
    pairs: usize,
    chars: &Characters<f64>,
    taus: &[Complex<f64>],
    tol: f64,
    min_im: f64,
    max_rs: usize,
) -> Result<Report, SeriesError> {
    let basis = center_closed_form::<ExactScalar>(pairs)?;
    let labels = centre_basis_labels(pairs);
    let inserts = Insertion::enumerate(pairs, max_rs);
    let jobs: Vec<(usize, &Insertion)> = (0..basis.len()).flat_map(|i| inserts.iter().map(move |w| (i, w))).collect();
    let parts: Vec<Report> = jobs
        .par_iter()
        .map(|&(i, w)| {
            let mut r = check_modular_covariance(chars, &basis[i], w, taus, tol, min_im)?;
            for l in &mut r.lines {
                l.name = format!("N={pairs} z={} {w}", labels[i]);
            }
            Ok(r)
        })
        .collect::<Result<_, SeriesError>>()?;
    let mut report = Report::default();
    parts.into_iter().for_each(|p| report.extend(p));
    Ok(report)
}

/// Rank of the map from the centre basis to exact expression data over all
/// insertions with distinct l's and r + s ≤ N.
pub fn separation_rank(pairs: usize) -> Result<usize, SeriesError> {
    let basis = center_closed_form::<ExactScalar>(pairs)?;
    let mut rows: BTreeMap<(Insertion, TermKey), Vec<ExactScalar>> = BTreeMap::new();
    for (col, z) in basis.iter().enumerate() {
        for w in Insertion::enumerate(pairs, pairs) {
            for (k, c) in pseudo_trace_expr(z, &w)?.terms {
                rows.entry((w.clone(), k)).or_insert_with(|| vec![ExactScalar::zero(); basis.len()])[col] = c;
            }
        }
    }
    Ok(linalg::rank(rows.into_values().collect()))
}
