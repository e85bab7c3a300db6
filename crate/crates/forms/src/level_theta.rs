//! Weight-one Eisenstein series for the principal congruence subgroup of
//! level θ, expanded in the level variable u_θ over the θ-cyclotomic field
//! K(λ), λ^{q-1} = -θ.
//!
//! An index is a pair (c₁/θ, c₂/θ) ≠ (0, 0) with cᵢ ∈ F_q. Splitting the
//! defining lattice sum along the coset c₁ + θA and collapsing each inner
//! sum through the exponential of A gives one summand per α = c₁ + mθ:
//!
//!   E = [1/(c₂λ) if c₁ = 0] + Σ_{α ≠ 0} u_θ^{|α|} / (𝔠_α(u_θ) + c₂λ u_θ^{|α|}),
//!
//! where 𝔠_α is the reversed Carlitz polynomial of α, with constant term the
//! leading coefficient of α. Each summand has valuation |α| = q^{deg α}, so
//! truncating at precision P needs only the finitely many α with |α| < P.
//!
//! The q+1 "monic" indices (c₁, 1) and (1, 0) multiply to a weight-(q+1)
//! series proportional to h̃ after the level drop u = u_θ^q/𝔠_θ(u_θ); the
//! proportionality constant is a torsion unit, pinned in the tests.

use dmf_algebra::carlitz::ReversedCarlitz;
use dmf_algebra::{CycloElem, Error, FqCtx, FqElem, Poly, RatF, USeries};

/// All α = c₁ + mθ with 0 < |α| < bound, m running over A.
fn coset_reps(ctx: &'static FqCtx, c1: FqElem, bound: i64) -> Vec<Poly> {
    let theta = Poly::theta(ctx);
    let c1poly = Poly::constant(ctx, c1);
    let mut out = Vec::new();
    if c1 != 0 && bound > 1 {
        out.push(c1poly.clone());
    }
    // m of degree d contributes α of absolute value q^{d+1}
    let mut d = 0usize;
    while (ctx.q as i64).pow(d as u32 + 1) < bound {
        let elems: Vec<FqElem> = ctx.elements().collect();
        let mut idx = vec![0usize; d + 1];
        loop {
            // leading coefficient must be nonzero
            if elems[idx[d]] != 0 {
                let coeffs: Vec<FqElem> = idx.iter().map(|&i| elems[i]).collect();
                let m = Poly::from_coeffs(ctx, coeffs);
                out.push(c1poly.add(&m.mul(&theta)));
            }
            let mut carry = 0;
            loop {
                idx[carry] += 1;
                if idx[carry] < elems.len() {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
                if carry > d {
                    break;
                }
            }
            if carry > d {
                break;
            }
        }
        d += 1;
    }
    out
}

/// The level-θ Eisenstein series for the index (c₁/θ, c₂/θ), as a u_θ-series
/// with coefficients in K(λ). The valuation is 0 when c₁ = 0 (the series is
/// then a unit, with constant term 1/(c₂λ)) and 1 otherwise.
pub fn eisenstein_level_theta(
    ctx: &'static FqCtx,
    c1: FqElem,
    c2: FqElem,
    prec: i64,
) -> Result<USeries<CycloElem>, Error> {
    if c1 == 0 && c2 == 0 {
        return Err(Error::Domain("level index pair must be nonzero".into()));
    }
    if prec <= 0 {
        return Err(Error::Precision("level series need positive precision".into()));
    }
    let witness = CycloElem::zero(ctx);
    let shift = CycloElem::lambda(ctx)
        .mul_ratf(&RatF::from_poly(Poly::constant(ctx, c2)));
    let mut out = USeries::zero_prec(&witness, prec);
    if c1 == 0 {
        // the α = 0 summand collapses to the torsion reciprocal
        out = out.add(&USeries::monomial(&shift.inv()?, 0, prec));
    }
    for alpha in coset_reps(ctx, c1, prec) {
        let abs = alpha.abs_deg() as i64;
        let rc = ReversedCarlitz::new(&alpha)?;
        let mut terms: Vec<(usize, CycloElem)> = rc
            .terms
            .iter()
            .map(|(e, c)| (*e, CycloElem::from_ratf(ctx, RatF::from_poly(c.clone()))))
            .collect();
        if !shift.is_zero() {
            terms.push((abs as usize, shift.clone()));
        }
        let summand =
            USeries::monomial(&CycloElem::one(ctx), abs, prec).div_sparse_poly(&terms)?;
        out = out.add(&summand);
    }
    Ok(out)
}

/// The q+1 monic indices of level θ: (c, 1) for every c ∈ F_q, then (1, 0).
pub fn monic_theta_indices(ctx: &'static FqCtx) -> Vec<(FqElem, FqElem)> {
    let mut out: Vec<(FqElem, FqElem)> = ctx.elements().map(|c| (c, 1)).collect();
    out.push((1, 0));
    out
}

/// Product of the level series over all monic indices: a weight-(q+1) cusp
/// form for the full group, proportional to h̃ in the u_θ variable.
pub fn level_theta_monic_product(
    ctx: &'static FqCtx,
    prec: i64,
) -> Result<USeries<CycloElem>, Error> {
    let mut out = USeries::one(&CycloElem::zero(ctx), prec);
    for (c1, c2) in monic_theta_indices(ctx) {
        out = out.mul(&eisenstein_level_theta(ctx, c1, c2, prec)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eisenstein::{Generator, GeneratorTable};

    fn ctx_for(q: u32) -> &'static FqCtx {
        FqCtx::get(q).unwrap()
    }

    fn to_cyclo(f: &USeries<RatF>) -> USeries<CycloElem> {
        let ctx = f.witness().ctx();
        let w = CycloElem::zero(ctx);
        match f.valuation() {
            None => USeries::zero_prec(&w, f.prec()),
            Some(v) => {
                let coeffs = (v..f.prec())
                    .map(|e| CycloElem::from_ratf(ctx, f.coeff(e)))
                    .collect();
                USeries::from_coeffs(&w, v, coeffs, f.prec())
            }
        }
    }

    #[test]
    fn rejects_the_zero_index() {
        for q in [2u32, 3] {
            let ctx = ctx_for(q);
            assert!(matches!(
                eisenstein_level_theta(ctx, 0, 0, 12),
                Err(Error::Domain(_))
            ));
        }
    }

    #[test]
    fn pure_torsion_indices_are_unit_series() {
        for q in [2u32, 3, 5] {
            let ctx = ctx_for(q);
            let lambda = CycloElem::lambda(ctx);
            for c2 in ctx.elements().filter(|&c| c != 0) {
                let e = eisenstein_level_theta(ctx, 0, c2, (3 * q) as i64).unwrap();
                assert_eq!(e.valuation(), Some(0), "q={q} c2={c2}");
                let ct = e.coeff(0);
                let torsion = lambda.mul_ratf(&RatF::from_poly(Poly::constant(ctx, c2)));
                assert!(
                    ct.mul(&torsion).sub(&CycloElem::one(ctx)).is_zero(),
                    "q={q} c2={c2}: constant term is not the torsion reciprocal"
                );
            }
        }
    }

    #[test]
    fn nonzero_first_index_gives_valuation_one_with_unit_leading_coefficient() {
        for q in [2u32, 3, 5] {
            let ctx = ctx_for(q);
            for c1 in ctx.elements().filter(|&c| c != 0) {
                for c2 in ctx.elements() {
                    let e = eisenstein_level_theta(ctx, c1, c2, (2 * q) as i64).unwrap();
                    assert_eq!(e.valuation(), Some(1), "q={q} ({c1},{c2})");
                    // leading summand is u_θ/(c₁ + c₂λu_θ)
                    let lead = e.coeff(1);
                    let expect =
                        CycloElem::from_ratf(ctx, RatF::from_poly(Poly::constant(ctx, c1)))
                            .inv()
                            .unwrap();
                    assert!(lead.sub(&expect).is_zero(), "q={q} ({c1},{c2})");
                }
            }
        }
    }

    #[test]
    fn doubled_precision_agrees_on_the_overlap() {
        for q in [2u32, 3] {
            let ctx = ctx_for(q);
            let p = (2 * q * q) as i64;
            for (c1, c2) in [(0, 1), (1, 0), (1, 1)] {
                let small = eisenstein_level_theta(ctx, c1, c2, p).unwrap();
                let large = eisenstein_level_theta(ctx, c1, c2, 2 * p).unwrap();
                assert!(small.agrees_with(&large), "q={q} ({c1},{c2})");
            }
        }
    }

    #[test]
    fn monic_index_count_is_q_plus_one() {
        for q in [2u32, 3, 4, 5] {
            assert_eq!(monic_theta_indices(ctx_for(q)).len(), q as usize + 1);
        }
    }

    #[test]
    fn monic_product_recovers_h_up_to_a_torsion_unit() {
        for q in [2u32, 3, 4, 5] {
            let ctx = ctx_for(q);
            let qi = q as i64;
            let prec = qi * qi + 3 * qi;
            let product = level_theta_monic_product(ctx, prec).unwrap();
            assert_eq!(product.valuation(), Some(qi), "q={q}: product cusp order");

            // re-expand h̃ in the level variable through u = u_θ^q/𝔠_θ(u_θ)
            let t = GeneratorTable::get(ctx, (prec / qi + 2).max(qi * qi)).unwrap();
            let h = to_cyclo(t.series(Generator::H));
            let u_of_utheta =
                USeries::uaz(&CycloElem::zero(ctx), &Poly::theta(ctx), prec).unwrap();
            let h_level = h.subst(&u_of_utheta).unwrap();
            assert_eq!(h_level.valuation(), Some(qi), "q={q}: h cusp order");

            let scalar = product.coeff(qi).mul(&h_level.coeff(qi).inv().unwrap());
            assert!(
                product.sub(&h_level.scale(&scalar)).is_zero(),
                "q={q}: product is not proportional to h"
            );
            // the constant is exactly 1/λ: the product IS h̃ up to the fixed
            // torsion generator
            let unit = scalar.mul(&CycloElem::lambda(ctx));
            assert!(
                unit.sub(&CycloElem::one(ctx)).is_zero(),
                "q={q}: proportionality constant is not 1/λ"
            );
        }
    }
}
