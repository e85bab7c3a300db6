//! Drinfeld modular forms for GL₂(F_q[θ]) in π̃-normalized u-expansion
//! coordinates: the generators g̃, h̃, Δ̃ and the false Eisenstein series E,
//! the quasi-modular and nearly holomorphic algebras they span, and the
//! differential and Rankin-Cohen operators acting on them.

pub mod eisenstein;
pub mod graded;
pub mod level_theta;
pub mod nearly;
pub mod operators;
pub mod slash;

pub use dmf_algebra::Error;
pub use eisenstein::{
    eisenstein_norm, false_eisenstein, generator_delta, generator_g, generator_h, j_invariant,
    Generator, GeneratorTable,
};
pub use graded::{candidate_monomials, membership, qm_membership, GradedForm, Membership};
pub use level_theta::{eisenstein_level_theta, level_theta_monic_product, monic_theta_indices};
pub use nearly::{
    decompose, delta_slash_kernel_vanishes, e2, formal_equivariance_check,
    formal_equivariance_check_perturbed, from_modular_layers, inverse_iota, maass_shimura,
    y_transform_kernel_holds, NHForm, NhCoef,
};
pub use operators::{
    rc_bracket, rc_bracket_nh_identity, rc_bracket_nh_identity_perturbed, u_operator,
    u_operator_nh_identity, u_operator_nh_identity_perturbed, RCCoeffs, UCoeffs,
};
pub use slash::{hasse_on_x, FormPoly, Var, XPoly};
