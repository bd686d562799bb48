//! Exact fusion rings of the even symplectic-fermion VOA via a
//! non-semisimple Verlinde procedure, plus q-series checks of the modular
//! covariance of its pseudo-trace functions.

pub mod cli;
pub mod endalg;
pub mod exterior;
pub mod linalg;
pub mod qseries;
pub mod scalars;
pub mod smod;
pub mod verlinde;

use num_complex::Complex64;

use crate::scalars::ExactScalar;

pub type Ext = exterior::ExtElement<ExactScalar>;
pub type Endo = endalg::EElement<ExactScalar>;
pub type Central = endalg::ZElement<ExactScalar>;
pub type NumericExt = exterior::ExtElement<Complex64>;
pub type Series = qseries::PuiseuxSeries<f64>;
pub type Series32 = qseries::PuiseuxSeries<f32>;
