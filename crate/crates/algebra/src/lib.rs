//! Exact base arithmetic for Drinfeld modular forms over F_q[θ]: finite
//! fields, the polynomial ring A and its fraction field K, the Carlitz
//! module, the θ-cyclotomic field, and truncated u-series with the
//! hyperderivative action.
//!
//! Everything here is exact; precision only ever refers to series truncation
//! windows, never to floating point.

pub mod binom;
pub mod carlitz;
pub mod cyclo;
pub mod field;
pub mod poly;
pub mod ratf;
pub mod scalar;
pub mod useries;

pub use carlitz::{carlitz_d, carlitz_exp_coeffs, zeta_norm, CarlitzPoly, ReversedCarlitz};
pub use cyclo::CycloElem;
pub use field::{FqCtx, FqElem, FqmCtx};
pub use poly::{monic_polys, Poly};
pub use ratf::RatF;
pub use scalar::Scalar;
pub use useries::{goss_coeffs, goss_eval, USeries};

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported field: {0}")]
    BadField(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("insufficient precision: {0}")]
    Precision(String),
}
