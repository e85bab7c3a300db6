//! Exact-digit numerics at the infinite place.
//!
//! Everything here computes with certified truncation windows instead of
//! floating point: a result carries the exponent range on which its digits
//! are guaranteed, and arithmetic shrinks that range by explicit valuation
//! rules. On top of the window type sit the Carlitz period and exponential,
//! u-coordinate evaluation of u-series at quadratic points, the Frobenius σ
//! on the unramified completion together with its extensions ψ to the
//! quadratic completions, and the evaluation identities (inversion law, CM
//! stabilizers) that tie the series algebra to actual points.

pub mod eval;
pub mod puiseux;
pub mod quad;

pub use dmf_algebra::Error;
pub use eval::{carlitz_exp_eval, eval_useries, u_eval, verify_inversion_law, InversionReport};
pub use puiseux::{neg_theta_root_coeff, pitilde, sigma, PuiseuxNum};
pub use quad::{
    antifixed_root, cm_evaluation_identity, find_alpha, find_epsilon, psi_registry,
    validate_artin_schreier_b, IdentityPsi, Psi, PsiEntry, PsiEven, PsiOddI, PsiOddII,
    QuadExtElem, QuadGen,
};
