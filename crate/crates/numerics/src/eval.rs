//! Evaluation at points of the θ-adic upper half plane: the Carlitz
//! exponential, the uniformizer u, and truncated u-series, each returning a
//! Puiseux window whose truncation order is certified by explicit tail
//! bounds rather than floating-point estimates.

use dmf_algebra::{carlitz_d, Error, RatF, USeries};

use crate::puiseux::{pitilde, PuiseuxNum};

/// The Carlitz exponential e_C(x) = Σ x^{q^i}/D_i, summed until the dropped
/// tail provably lies beyond the certified window.
///
/// The i-th term has order q^i(val(x) + i) in θ-digits, which eventually
/// increases without bound, and the q^i-power map is exact on digit windows,
/// so the only error sources are the input window and the explicit cutoff.
/// `target_theta` caps the certified output window in absolute θ-digits.
pub fn carlitz_exp_eval(x: &PuiseuxNum, target_theta: i64) -> Result<PuiseuxNum, Error> {
    let ctx = x.ctx();
    let e = x.e();
    let q = ctx.base.q as i64;
    if x.is_exact() && x.is_zero_window() {
        return PuiseuxNum::zero(ctx, e);
    }
    let target = target_theta
        .checked_mul(e)
        .ok_or_else(|| Error::Precision("target window overflow".into()))?;
    let overflow = || Error::Precision("exponential tail exponent overflow".into());
    // Certified window: the input error δ passes through term i as
    // δ^{q^i}/D_i, of scaled order q^i(prec + i·e).
    let mut cert = target;
    if let Some(p) = x.prec_scaled() {
        let mut qi: i64 = 1;
        let mut i: i64 = 0;
        loop {
            let err = qi.checked_mul(p + i * e).ok_or_else(overflow)?;
            cert = cert.min(err);
            if p + i * e > 0 && err >= target {
                break;
            }
            i += 1;
            qi = qi.checked_mul(q).ok_or_else(overflow)?;
            if i > 64 {
                return Err(Error::Precision(
                    "input window too low for the exponential tail".into(),
                ));
            }
        }
    }
    let v = x.val_floor().expect("nonzero window checked above");
    let mut out = PuiseuxNum::zero(ctx, e)?;
    let mut qi: i64 = 1;
    let mut i: i64 = 0;
    loop {
        let tv = qi.checked_mul(v + i * e).ok_or_else(overflow)?;
        if v + i * e > 0 && tv >= cert {
            break;
        }
        if i > 64 {
            return Err(Error::Precision(
                "exponential tail does not clear the window".into(),
            ));
        }
        let xf = x.frob_pow(i as u32)?;
        let di = PuiseuxNum::from_poly(ctx, e, &carlitz_d(ctx.base, i as usize))?;
        let term = xf.mul(&di.inv_to(cert - tv + 2 * e)?)?;
        out = out.add(&term)?;
        i += 1;
        qi = qi.checked_mul(q).ok_or_else(overflow)?;
    }
    Ok(out.truncate_scaled(cert))
}

/// u(z) = 1/e_C(π̃z), the uniformizer at infinity, certified to
/// `prec_theta` absolute θ-digits. The working margin adapts until the
/// requested window is reached.
pub fn u_eval(z: &PuiseuxNum, prec_theta: i64) -> Result<PuiseuxNum, Error> {
    let ctx = z.ctx();
    let q = ctx.base.q as i64;
    let mut margin = q + 6;
    for _ in 0..4 {
        let pi = pitilde(ctx, prec_theta + margin)?;
        let w = pi.mul(z)?;
        let y = carlitz_exp_eval(&w, prec_theta + margin)?;
        if y.is_zero_window() {
            return Err(Error::Precision(
                "e_C(π̃z) vanishes to working precision; z is too close to the period lattice"
                    .into(),
            ));
        }
        let u = y.inv_to((prec_theta + margin) * y.e())?;
        if u.prec_scaled().map_or(true, |p| p >= prec_theta * u.e()) {
            return Ok(u.truncate_scaled(prec_theta * u.e()));
        }
        margin *= 2;
    }
    Err(Error::Precision("could not reach the requested u-window".into()))
}

/// Horner evaluation of a truncated u-series at a point with |u0| < 1.
///
/// The dropped tail is bounded by extrapolating the observed coefficient
/// growth: with s = max over the support of deg_θ(c_n)/n, every unseen term
/// n ≥ prec has order at least n(val(u0) - s), so the series must satisfy
/// val(u0) > s at the point. The doubled-window guard tests back this
/// growth model empirically.
pub fn eval_useries(
    f: &USeries<RatF>,
    u0: &PuiseuxNum,
    target_theta: i64,
) -> Result<PuiseuxNum, Error> {
    let ctx = u0.ctx();
    let e = u0.e();
    if f.witness().ctx().q != ctx.base.q {
        return Err(Error::Domain("series and point live over different base fields".into()));
    }
    // A zero window still gets a harmless huge valuation floor for the tail.
    let vu = u0.val_floor().unwrap_or(1 << 20).min(1 << 20);
    if vu < 1 {
        return Err(Error::Domain(
            "series evaluation needs |u0| < 1 (positive valuation)".into(),
        ));
    }
    if f.prec() < 1 {
        return Err(Error::Precision("series window is empty".into()));
    }
    // Coefficient growth slope as a fraction s_num/s_den of θ-digits per
    // u-power, taken over the visible support.
    let (mut s_num, mut s_den): (i64, i64) = (0, 1);
    let wdeg = |c: &RatF| -> i64 {
        let d = |p: &dmf_algebra::Poly| p.degree().map_or(0, |d| d as i64);
        d(c.num()) - d(c.den())
    };
    for (n, c) in f.support() {
        if n >= 1 {
            let w = wdeg(c);
            if w > 0 && w * s_den > s_num * n {
                (s_num, s_den) = (w, n);
            }
        }
    }
    let p_f = f.prec();
    let drag = (p_f * e * s_num + s_den - 1) / s_den;
    let tail = p_f
        .checked_mul(vu)
        .and_then(|t| t.checked_sub(drag))
        .ok_or_else(|| Error::Precision("tail bound overflow".into()))?;
    if p_f * e * s_num >= s_den * p_f * vu {
        return Err(Error::Precision(
            "series tail does not converge at this point under the observed coefficient growth"
                .into(),
        ));
    }
    let cert = tail.min(target_theta * e);
    let sup: Vec<(i64, RatF)> = f.support().map(|(n, c)| (n, c.clone())).collect();
    if sup.is_empty() {
        return Ok(PuiseuxNum::zero(ctx, e)?.truncate_scaled(cert));
    }
    let rel = |c: &RatF| cert + (c.num().degree().map_or(0, |d| d as i64) + 2) * e;
    let eval_ratf = |c: &RatF| -> Result<PuiseuxNum, Error> {
        let num = PuiseuxNum::from_poly(ctx, e, c.num())?;
        let den = PuiseuxNum::from_poly(ctx, e, c.den())?;
        num.mul(&den.inv_to(rel(c))?)
    };
    // Horner over the sparse support, highest exponent first; coefficient
    // errors only attenuate under later multiplications by u0.
    let mut it = sup.iter().rev();
    let (top, ctop) = it.next().expect("nonempty support");
    let mut acc = eval_ratf(ctop)?.truncate_scaled(cert);
    let mut cur = *top;
    for (n, c) in it {
        acc = acc.mul(&u0.pow_i(cur - n, cert + 2 * e)?)?.truncate_scaled(cert);
        acc = acc.add(&eval_ratf(c)?)?;
        cur = *n;
    }
    if cur != 0 {
        acc = acc.mul(&u0.pow_i(cur, cert + 2 * e)?)?;
    }
    Ok(acc.truncate_scaled(cert))
}

/// Outcome of the two-sided inversion-law check.
#[derive(Debug)]
pub struct InversionReport {
    pub lhs: PuiseuxNum,
    pub rhs: PuiseuxNum,
    /// Common certified window, scaled.
    pub window_scaled: i64,
    pub e: i64,
    /// Scaled key of the first disagreeing digit, when any.
    pub first_mismatch: Option<i64>,
    /// Certified agreement depth past the leading digit, in θ-digits.
    pub theta_digits: i64,
    pub ok: bool,
}

/// Checks E(1/z) = -z²·E(z) + z·π̃^{-1}, the weight-2 transformation of the
/// false Eisenstein series under z ↦ 1/z, with both sides evaluated through
/// independent series expansions. `perturb` flips a digit of the π̃^{-1}
/// correction term as a negative control.
pub fn verify_inversion_law(
    e_series: &USeries<RatF>,
    z0: &PuiseuxNum,
    prec_theta: i64,
    perturb: bool,
) -> Result<InversionReport, Error> {
    let ctx = z0.ctx();
    let q = ctx.base.q as i64;
    let work = prec_theta + q + 4;
    let z_inv = z0.inv_to(work * z0.e())?;
    let u_left = u_eval(&z_inv, work)?;
    let u_right = u_eval(z0, work)?;
    let lhs = eval_useries(e_series, &u_left, work)?;
    let e_right = eval_useries(e_series, &u_right, work)?;
    let pi = pitilde(ctx, work + q)?;
    let mut pi_inv = pi.inv_to((work + q) * pi.e())?;
    if perturb {
        let v = pi_inv.val_scaled().expect("π̃^{-1} has a leading digit");
        pi_inv = pi_inv.add(&PuiseuxNum::monomial(ctx, pi.e(), 1, v + 2 * pi.e())?)?;
    }
    let rhs = z0
        .mul(z0)?
        .mul(&e_right)?
        .neg()
        .add(&z0.mul(&pi_inv)?)?;
    let diff = lhs.sub(&rhs)?;
    let window = diff.prec_scaled().ok_or_else(|| {
        Error::Precision("no finite common window in the inversion check".into())
    })?;
    let e = diff.e();
    let lead = lhs
        .val_floor()
        .unwrap_or(0)
        .min(rhs.val_floor().unwrap_or(0));
    Ok(InversionReport {
        window_scaled: window,
        e,
        first_mismatch: diff.val_scaled(),
        theta_digits: (window - lead) / e,
        ok: diff.is_zero_window(),
        lhs,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puiseux::sigma;
    use dmf_algebra::field::FqmElem;
    use dmf_algebra::{FqmCtx, Poly};

    fn ctx(q: u32, m: u32) -> &'static FqmCtx {
        FqmCtx::get(q, m).unwrap()
    }

    #[test]
    fn exponential_of_exact_zero_is_exact_zero() {
        let c = ctx(3, 2);
        let z = PuiseuxNum::zero(c, 2).unwrap();
        let y = carlitz_exp_eval(&z, 10).unwrap();
        assert!(y.is_exact() && y.is_zero_window());
    }

    #[test]
    fn period_lattice_maps_into_the_exponential_kernel() {
        // e_C(π̃a) lies below the certified tolerance for a ∈ {1, θ, θ+1}.
        for q in [2u32, 3, 4, 5] {
            let c = ctx(q, 2);
            let prec = 14;
            let pi = pitilde(c, prec).unwrap();
            let theta = PuiseuxNum::theta(c, 1).unwrap();
            let lattice = [
                PuiseuxNum::one(c, 1).unwrap(),
                theta.clone(),
                theta.add(&PuiseuxNum::one(c, 1).unwrap()).unwrap(),
            ];
            for (k, a) in lattice.iter().enumerate() {
                let y = carlitz_exp_eval(&pi.mul(a).unwrap(), prec).unwrap();
                let tol = (prec - 2) * y.e();
                assert!(
                    y.certifies_small(tol),
                    "q = {q}, lattice element {k}: e_C(π̃a) = {:?}",
                    y
                );
            }
        }
    }

    #[test]
    fn kernel_test_windows_agree_when_doubled() {
        let c = ctx(3, 2);
        for prec in [10i64, 20] {
            let pi = pitilde(c, prec).unwrap();
            let y = carlitz_exp_eval(&pi, prec).unwrap();
            assert!(y.certifies_small((prec - 2) * y.e()), "prec = {prec}");
        }
    }

    fn nonbase_unit(c: &'static FqmCtx) -> FqmElem {
        c.elements().find(|&w| w != 0 && c.try_to_base(w).is_none()).unwrap()
    }

    #[test]
    fn u_values_are_small_and_lattice_periodic() {
        for q in [2u32, 3] {
            let c = ctx(q, 2);
            let xi = nonbase_unit(c);
            let z = PuiseuxNum::constant(c, 1, xi).unwrap();
            let u = u_eval(&z, 12).unwrap();
            // |u(ξ)| < 1.
            assert!(u.val_scaled().map_or(true, |v| v >= 1), "q = {q}: {u:?}");
            assert!(!u.is_zero_window(), "q = {q}");
            for shift in [Poly::theta(c.base), Poly::theta(c.base).add(&Poly::one(c.base))] {
                let zs = z.add(&PuiseuxNum::from_poly(c, 1, &shift).unwrap()).unwrap();
                let us = u_eval(&zs, 12).unwrap();
                assert!(u.agrees_with(&us).unwrap(), "q = {q}, shift {}", shift.render());
                let window = u.prec_scaled().unwrap().min(us.prec_scaled().unwrap());
                assert!(window >= 10 * u.e(), "q = {q}: window {window}");
            }
        }
    }

    #[test]
    fn u_value_digits_track_the_conjugate_trace() {
        // π̃·u(z) = 1/e_A(z) is unramified and obeys σ(1/e_A(z)) = 1/e_A(σz)
        // because the lattice exponential has base-digit coefficients. Two
        // regimes follow. At a constant ξ ∈ F_{q²} the trace ξ + ξ^q lies in
        // the kernel lattice, so e_A(σξ) = -e_A(ξ): the value stays on one
        // σ-eigenline and every digit of u(ξ) is a base digit even though ξ
        // generates the extension. At z = ξ/θ the trace leaves the lattice,
        // the eigenline collapse is impossible, and u picks up genuine
        // F_{q²}-digits.
        let c = ctx(3, 2);
        let pi = pitilde(c, 16).unwrap();
        let xi = nonbase_unit(c);
        let z = PuiseuxNum::constant(c, 1, xi).unwrap();
        let u = u_eval(&z, 10).unwrap();
        assert!(u.digits().all(|(_, d)| c.try_to_base(d).is_some()));
        let a = pi.mul(&u).unwrap().try_descend(1).unwrap();
        assert!(!a.is_zero_window() && a.prec_scaled().unwrap() >= 6);
        assert!(sigma(&a).unwrap().agrees_with(&a.neg()).unwrap());
        // Now the ramified point: ξ/θ with Tr(ξ) ≠ 0.
        let xi = c
            .elements()
            .find(|&w| {
                c.try_to_base(w).is_none() && c.add(w, c.frob(w)) != 0
            })
            .unwrap();
        let z = PuiseuxNum::monomial(c, 1, xi, 1).unwrap();
        let u = u_eval(&z, 10).unwrap();
        assert!(u.digits().any(|(_, d)| c.try_to_base(d).is_none()));
        // σ-equivariance off the eigenlines, both sides computed separately.
        let a = pi.mul(&u).unwrap().try_descend(1).unwrap();
        let zq = PuiseuxNum::monomial(c, 1, c.frob(xi), 1).unwrap();
        let aq = pi.mul(&u_eval(&zq, 10).unwrap()).unwrap().try_descend(1).unwrap();
        assert!(!a.is_zero_window() && a.prec_scaled().unwrap() >= 6);
        assert!(sigma(&a).unwrap().agrees_with(&aq).unwrap());
    }

    fn ratf(c: &'static FqmCtx, s: &str) -> RatF {
        RatF::from_poly(Poly::parse(c.base, s).unwrap())
    }

    #[test]
    fn series_evaluation_trivial_cases() {
        let c = ctx(3, 1);
        let one = ratf(c, "1*θ^0");
        // f = u returns the point itself.
        let f = USeries::monomial(&one, 1, 8);
        let u0 = PuiseuxNum::monomial(c, 1, 2, 2)
            .unwrap()
            .add(&PuiseuxNum::monomial(c, 1, 1, 5).unwrap())
            .unwrap();
        let v = eval_useries(&f, &u0, 12).unwrap();
        assert!(v.agrees_with(&u0).unwrap());
        // A constant series returns the constant.
        let g = USeries::monomial(&ratf(c, "2*θ^3"), 0, 8);
        let w = eval_useries(&g, &u0, 12).unwrap();
        assert!(w
            .agrees_with(&PuiseuxNum::from_poly(c, 1, &Poly::parse(c.base, "2*θ^3").unwrap()).unwrap())
            .unwrap());
    }

    #[test]
    fn series_evaluation_is_multiplicative() {
        let c = ctx(3, 1);
        let one = ratf(c, "1*θ^0");
        let f = USeries::one(&one, 9).add(&USeries::monomial(&ratf(c, "1*θ^1"), 1, 9));
        let g = USeries::monomial(&one, 1, 9).add(&USeries::monomial(&ratf(c, "2*θ^0"), 2, 9));
        let u0 = PuiseuxNum::monomial(c, 1, 1, 2)
            .unwrap()
            .add(&PuiseuxNum::monomial(c, 1, 2, 3).unwrap())
            .unwrap();
        let lhs = eval_useries(&f.mul(&g), &u0, 14).unwrap();
        let rhs = eval_useries(&f, &u0, 14)
            .unwrap()
            .mul(&eval_useries(&g, &u0, 14).unwrap())
            .unwrap();
        assert!(lhs.agrees_with(&rhs).unwrap());
        assert!(lhs.prec_scaled().unwrap() >= 8);
    }

    #[test]
    fn series_evaluation_rejects_large_points() {
        let c = ctx(3, 1);
        let f = USeries::one(&ratf(c, "1*θ^0"), 6);
        let big = PuiseuxNum::theta(c, 1).unwrap();
        assert!(matches!(eval_useries(&f, &big, 8), Err(Error::Domain(_))));
    }

    #[test]
    fn doubled_windows_agree_for_u_values() {
        let c = ctx(3, 2);
        let xi = nonbase_unit(c);
        let z = PuiseuxNum::constant(c, 1, xi).unwrap();
        let a = u_eval(&z, 8).unwrap();
        let b = u_eval(&z, 16).unwrap();
        assert!(a.agrees_with(&b).unwrap());
    }
}
