//! Command-line frontend.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error.

use std::fmt::Display;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::endalg::{
    center_brute_force, center_closed_form, centre_dim, eps_form, hat_iso, hat_iso_inv, phi_basis, phi_irr, same_span,
    EElement, Irr, ZElement, BRUTE_FORCE_MAX_PAIRS,
};
use crate::exterior::{ExtElement, Monomial, MAX_PAIRS};
use crate::qseries::{
    centre_basis_labels, check_character_s, covariance_suite, default_taus, CharId, Characters, Report,
    DEFAULT_TRUNCATION, MIN_IM_TAU,
};
use crate::scalars::{two_pi_pow, two_pow, ExactScalar, Ring};
use crate::smod::{s_lambda, s_tilde_z, s_z, s_z_matrix, sp_matrix, y_oracle, Y_ORACLE_MAX_PAIRS};
use crate::verlinde::{fusion_semisimple_with, fusion_sf, FusionTable, SMatrixInput, VerlindeError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const MIN_TRUNCATION: usize = 50;
/// Largest N for which `centre` prints the Gram and S matrices.
pub const CENTRE_MAX_PAIRS: usize = 6;
/// Largest N accepted by `verify`; the covariance suite grows like 4^N.
pub const VERIFY_MAX_PAIRS: usize = 3;

#[derive(Parser, Debug)]
#[command(name = "verlinde-lab", version, about = "Fusion rings of even symplectic fermions and their modular checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fusion rings.
    #[command(subcommand)]
    Fusion(FusionCommand),
    /// Basis, ε-Gram matrix and S-matrix of the centre Z(E).
    Centre {
        #[command(flatten)]
        common: Common,
        /// Also solve for the centre by brute force and compare (N <= 3).
        #[arg(long)]
        brute_force: bool,
    },
    /// Exact suites followed by the numeric q-series suites.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        numeric: Numeric,
        /// Seed for the randomised round-trip checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Character values and their S-transformation identities.
    Characters {
        #[arg(long, value_enum, default_value_t = Output::Text)]
        output: Output,
        #[command(flatten)]
        numeric: Numeric,
    },
}

#[derive(Subcommand, Debug)]
pub enum FusionCommand {
    /// Non-semisimple procedure for N pairs of symplectic fermions.
    Sf {
        #[command(flatten)]
        common: Common,
    },
    /// Ordinary Verlinde formula for an S-matrix read from a JSON file.
    Semisimple {
        #[arg(long)]
        smatrix: PathBuf,
        /// Largest accepted distance of a coefficient to an integer.
        #[arg(long, default_value_t = crate::verlinde::DEFAULT_SEMISIMPLE_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Output::Text)]
        output: Output,
    },
}

#[derive(Args, Debug)]
pub struct Common {
    #[arg(long, default_value_t = 1)]
    pub pairs: usize,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct Numeric {
    /// Number of integer q-powers kept in each character.
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    pub truncation: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Sample point "re,im"; repeatable.
    #[arg(long = "tau", value_parser = parse_tau, allow_hyphen_values = true)]
    pub taus: Vec<Complex<f64>>,
    /// Convergence guard on Im τ and Im(−1/τ).
    #[arg(long, default_value_t = MIN_IM_TAU)]
    pub min_im: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Text,
    Json,
}

fn parse_tau(s: &str) -> Result<Complex<f64>, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected \"re,im\", got {s:?}"))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok(Complex::new(p(re)?, p(im)?))
}

/// A usage error (exit 2) or a failed computation (exit 1).
#[derive(Debug)]
enum Failure {
    Usage(String),
    Check(String),
}

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Check(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Fusion(FusionCommand::Sf { common }) => cmd_fusion_sf(&common),
        Command::Fusion(FusionCommand::Semisimple { smatrix, tol, output }) => {
            cmd_fusion_semisimple(&smatrix, tol, output)
        }
        Command::Centre { common, brute_force } => cmd_centre(&common, brute_force),
        Command::Verify { common, numeric, seed } => cmd_verify(&common, &numeric, seed),
        Command::Characters { output, numeric } => cmd_characters(output, &numeric),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            EXIT_FAIL
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("VERLINDE_LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // fails only if a global pool already exists, which is harmless
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn check_pairs(pairs: usize, max: usize) -> Result<(), Failure> {
    if pairs == 0 || pairs > max {
        return Err(usage(format!("--pairs must be in 1..={max}, got {pairs}")));
    }
    Ok(())
}

fn check_numeric(n: &Numeric) -> Result<Vec<Complex<f64>>, Failure> {
    if n.truncation < MIN_TRUNCATION {
        return Err(usage(format!("--truncation must be at least {MIN_TRUNCATION}, got {}", n.truncation)));
    }
    if n.tol.is_nan() || n.tol <= 0.0 {
        return Err(usage(format!("--tol must be positive, got {}", n.tol)));
    }
    if n.min_im.is_nan() || n.min_im <= 0.0 {
        return Err(usage(format!("--min-im must be positive, got {}", n.min_im)));
    }
    let taus = if n.taus.is_empty() { default_taus() } else { n.taus.clone() };
    for t in &taus {
        if t.im < n.min_im || (-t.inv()).im < n.min_im {
            return Err(usage(format!(
                "tau = {}{:+}i: Im tau and Im(-1/tau) must both be at least {}",
                t.re, t.im, n.min_im
            )));
        }
    }
    Ok(taus)
}

fn emit_json(v: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serialisable output"));
}

fn cmd_fusion_sf(c: &Common) -> Result<i32, Failure> {
    check_pairs(c.pairs, MAX_PAIRS)?;
    let table = fusion_sf(c.pairs)?;
    match c.output {
        Output::Text => {
            println!("fusion ring of the even symplectic fermions, N = {}", c.pairs);
            print!("{table}");
        }
        Output::Json => emit_json(&table),
    }
    Ok(EXIT_OK)
}

fn cmd_fusion_semisimple(path: &PathBuf, tol: f64, output: Output) -> Result<i32, Failure> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(usage(format!("--tol must be positive, got {tol}")));
    }
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let input: SMatrixInput = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let (table, dev) = match fusion_semisimple_with::<f64>(&input, tol) {
        Err(VerlindeError::BadInput(m)) => return Err(usage(m)),
        r => r?,
    };
    match output {
        Output::Text => {
            print!("{table}");
            println!("max deviation from integers: {dev:.3e}");
        }
        Output::Json => emit_json(&table),
    }
    Ok(EXIT_OK)
}

fn cmd_centre(c: &Common, brute_force: bool) -> Result<i32, Failure> {
    check_pairs(c.pairs, CENTRE_MAX_PAIRS)?;
    let n = c.pairs;
    if brute_force && n > BRUTE_FORCE_MAX_PAIRS {
        return Err(usage(format!("--brute-force is limited to N <= {BRUTE_FORCE_MAX_PAIRS}")));
    }
    let basis = center_closed_form::<ExactScalar>(n)?;
    let labels = centre_basis_labels(n);
    let eps = eps_form::<ExactScalar>(n);
    let es: Vec<EElement<ExactScalar>> = basis.iter().map(ZElement::to_e).collect();
    let gram: Vec<Vec<ExactScalar>> = es.iter().map(|a| es.iter().map(|b| eps.apply(&a.mul(b))).collect()).collect();
    let s = s_z_matrix::<ExactScalar>(n)?;
    let brute = if brute_force {
        let b = center_brute_force::<ExactScalar>(n)?;
        Some((b.len(), same_span(&b, &es)))
    } else {
        None
    };
    let agree = brute.is_none_or(|(_, same)| same);
    match c.output {
        Output::Text => {
            println!("centre of E for N = {n}: dimension {} (expected {})", basis.len(), centre_dim(n));
            for (l, z) in labels.iter().zip(&basis) {
                println!("  {l:<12} = {}", z.to_e());
            }
            if let Some((d, same)) = brute {
                println!("brute force: dimension {d}, same span: {same}");
            }
        }
        Output::Json => emit_json(&json!({
            "n": n,
            "dim": basis.len(),
            "basis": labels,
            "elements": basis.iter().map(|z| z.to_e().to_string()).collect::<Vec<_>>(),
            "gram": gram,
            "s_matrix": s,
            "brute_force": brute.map(|(d, same)| json!({"dim": d, "same_span": same})),
        })),
    }
    Ok(if agree && basis.len() == centre_dim(n) { EXIT_OK } else { EXIT_FAIL })
}

#[derive(Clone, Debug, Serialize)]
struct ExactCheck {
    name: String,
    pass: bool,
}

fn exact(name: impl Into<String>, pass: bool) -> ExactCheck {
    ExactCheck { name: name.into(), pass }
}

/// The exact suites run by `verify`.
fn exact_suites(n: usize, seed: u64) -> Result<Vec<ExactCheck>, Failure> {
    type X = ExactScalar;
    let mut out = Vec::new();

    let closed = center_closed_form::<X>(n)?;
    out.push(exact(format!("centre dimension {} = 2^(2N-1)+3", closed.len()), closed.len() == centre_dim(n)));
    if n <= BRUTE_FORCE_MAX_PAIRS {
        let es: Vec<EElement<X>> = closed.iter().map(ZElement::to_e).collect();
        out.push(exact("closed-form centre = brute-force centre", same_span(&center_brute_force::<X>(n)?, &es)));
    }

    let sp = sp_matrix::<X>(n);
    let sq_is_id = (0..3).all(|i| {
        (0..3).all(|j| {
            let v = (0..3).fold(X::zero(), |acc, k| acc + sp[i][k].clone() * sp[k][j].clone());
            v == X::from_int(i64::from(i == j))
        })
    });
    out.push(exact("S on Z_P squares to the identity", sq_is_id));
    let mut lambda_ok = true;
    for m in Monomial::all_even(n) {
        let z = ExtElement::<X>::monomial(n, m, X::one());
        lambda_ok &= s_lambda(&s_lambda(&z)?)? == z;
    }
    out.push(exact("S on Z_Lambda squares to the identity", lambda_ok));

    let c1 = phi_irr::<X>(n)[0].clone();
    let want = EElement::from_lambda(ExtElement::one(n).scale(&two_pi_pow(-(n as i32))))
        .add(&EElement::e_t(n).scale(&two_pow(-(n as i32))));
    out.push(exact("S(c_1) = (2pi)^-N 1_Lambda + 2^-N e_T", s_tilde_z(&c1)?.to_e() == want));
    out.push(exact("S_Z(phi_1) = 1_E", s_z(&phi_basis::<X>(n)[0])?.to_e() == EElement::one(n)));

    if n <= Y_ORACLE_MAX_PAIRS {
        let mut ok = true;
        for m in Monomial::all_even(n) {
            let z = ExtElement::<X>::monomial(n, m, X::one());
            ok &= y_oracle(&z)? == s_lambda(&z)?;
        }
        out.push(exact("y oracle agrees with S on Z_Lambda", ok));
    }

    let table = fusion_sf(n)?;
    out.push(exact("fusion ring matches the closed form", fusion_matches_closed_form(&table, n)));
    out.push(exact("fusion ring is associative, commutative, unital", {
        table.is_associative() && table.is_commutative() && table.has_unit(0) && table.is_non_negative()
    }));

    let eps = eps_form::<X>(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut round_trip = true;
    for _ in 0..4 {
        let z = closed.iter().fold(ZElement::zero(n), |acc, b| acc.add(&b.scale(&X::from_int(rng.gen_range(-5..=5)))));
        round_trip &= hat_iso_inv(&hat_iso(&z, &eps), &eps)? == z;
    }
    out.push(exact(format!("hat_iso round trip on random central elements (seed {seed})"), round_trip));
    Ok(out)
}

/// [Π1]² = [1], [Π1][T] = [ΠT], [Π1][ΠT] = [T], twisted products
/// 2^{2N−1}([1] + [Π1]).
pub fn fusion_matches_closed_form(t: &FusionTable, pairs: usize) -> bool {
    let k = 1i64 << (2 * pairs - 1);
    let (one, pi1, tw, pitw) = (Irr::One.index(), Irr::PiOne.index(), Irr::T.index(), Irr::PiT.index());
    let e = |i: usize| {
        let mut v = vec![0i64; 4];
        v[i] = 1;
        v
    };
    t.product(pi1, pi1) == e(one).as_slice()
        && t.product(pi1, tw) == e(pitw).as_slice()
        && t.product(pi1, pitw) == e(tw).as_slice()
        && [tw, pitw].iter().all(|&a| [tw, pitw].iter().all(|&b| t.product(a, b) == [k, k, 0, 0]))
}

fn numeric_suites(n: usize, numeric: &Numeric, taus: &[Complex<f64>]) -> Result<Report, Failure> {
    let chars = Characters::<f64>::new(numeric.truncation)?;
    let mut report = check_character_s(&chars, taus, numeric.tol, numeric.min_im)?;
    report.extend(covariance_suite(n, &chars, taus, numeric.tol, numeric.min_im, 2)?);
    Ok(report)
}

fn cmd_verify(c: &Common, numeric: &Numeric, seed: u64) -> Result<i32, Failure> {
    check_pairs(c.pairs, VERIFY_MAX_PAIRS)?;
    let taus = check_numeric(numeric)?;
    let exact = exact_suites(c.pairs, seed)?;
    let report = numeric_suites(c.pairs, numeric, &taus)?;
    let passed = exact.iter().all(|e| e.pass) && report.passed();
    match c.output {
        Output::Text => {
            println!("exact suites, N = {}", c.pairs);
            for e in &exact {
                println!("  {:<60} {}", e.name, if e.pass { "PASS" } else { "FAIL" });
            }
            println!("numeric suites (consistency checks), N = {}", c.pairs);
            for l in &report.lines {
                println!("  {l}");
            }
            println!(
                "{} exact, {} numeric checks; max numeric deviation {:.3e}; {}",
                exact.len(),
                report.lines.len(),
                report.max_deviation(),
                if passed { "all passed" } else { "FAILED" }
            );
            if let Some(l) = report.lines.iter().find(|l| !l.pass) {
                eprintln!("first failing check: {l}");
            }
        }
        Output::Json => emit_json(&json!({
            "n": c.pairs,
            "passed": passed,
            "exact": exact,
            "numeric": report,
        })),
    }
    Ok(if passed { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_characters(output: Output, numeric: &Numeric) -> Result<i32, Failure> {
    let taus = check_numeric(numeric)?;
    let chars = Characters::<f64>::new(numeric.truncation)?;
    let ids = [CharId::NsPlus, CharId::NsMinus, CharId::RPlus, CharId::RMinus];
    let mut values = Vec::new();
    for &tau in &taus {
        for id in ids {
            let v = chars.series(id, 0).evaluate(tau, numeric.min_im)?;
            values.push((id.name(), tau, v));
        }
    }
    let report = check_character_s(&chars, &taus, numeric.tol, numeric.min_im)?;
    match output {
        Output::Text => {
            for (name, tau, v) in &values {
                println!("{name:<8} tau={:+.3}{:+.3}i  {:+.12e}{:+.12e}i", tau.re, tau.im, v.re, v.im);
            }
            print!("{report}");
        }
        Output::Json => emit_json(&json!({
            "truncation": numeric.truncation,
            "values": values.iter().map(|(name, tau, v)| json!({
                "character": name, "tau": [tau.re, tau.im], "value": [v.re, v.im],
            })).collect::<Vec<_>>(),
            "identities": report,
        })),
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAIL })
}
