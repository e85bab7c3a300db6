//! Truncated Puiseux-Laurent windows at the infinite place.
//!
//! A value is a finite map of F_{q^m}-digits indexed by rational exponents
//! of 1/θ with a fixed denominator e (the ramification index), plus a
//! certified truncation order: digits strictly below the order are exact,
//! everything at or beyond it is unknown. Arithmetic propagates the order
//! through valuations, so equality always means "every certified digit
//! agrees" and no floating point is involved anywhere.
//!
//! Ramification indices are restricted to the ones that actually occur at
//! this scale: 1 (the unramified completion), 2 (square roots of θ), q-1
//! (the Carlitz period) and 2(q-1) (their compositum).

use std::collections::BTreeMap;

use dmf_algebra::field::FqmElem;
use dmf_algebra::{Error, FqmCtx, Poly};
use num_integer::Integer;

/// Exponent keys and truncation orders are kept scaled by the ramification
/// index e, so the digit at key n is the coefficient of θ^{-n/e} and all
/// window bookkeeping stays in plain integers.
#[derive(Clone)]
pub struct PuiseuxNum {
    ctx: &'static FqmCtx,
    e: i64,
    /// Nonzero digits only; every key lies below `prec` when one is set.
    digits: BTreeMap<i64, FqmElem>,
    /// Certified scaled order; `None` marks an exact value.
    prec: Option<i64>,
}

fn allowed_e(q: i64, e: i64) -> bool {
    e == 1 || e == 2 || e == q - 1 || e == 2 * (q - 1)
}

impl PuiseuxNum {
    fn make(
        ctx: &'static FqmCtx,
        e: i64,
        digits: BTreeMap<i64, FqmElem>,
        prec: Option<i64>,
    ) -> PuiseuxNum {
        let digits = digits
            .into_iter()
            .filter(|&(n, c)| c != 0 && prec.map_or(true, |p| n < p))
            .collect();
        PuiseuxNum { ctx, e, digits, prec }
    }

    fn check_e(ctx: &'static FqmCtx, e: i64) -> Result<(), Error> {
        let q = ctx.base.q as i64;
        if allowed_e(q, e) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "ramification index {e} not supported at q = {q}; expected one of 1, 2, {}, {}",
                q - 1,
                2 * (q - 1)
            )))
        }
    }

    /// The exact zero (infinite precision, no digits).
    pub fn zero(ctx: &'static FqmCtx, e: i64) -> Result<PuiseuxNum, Error> {
        Self::check_e(ctx, e)?;
        Ok(PuiseuxNum { ctx, e, digits: BTreeMap::new(), prec: None })
    }

    pub fn one(ctx: &'static FqmCtx, e: i64) -> Result<PuiseuxNum, Error> {
        Self::constant(ctx, e, 1)
    }

    pub fn constant(ctx: &'static FqmCtx, e: i64, c: FqmElem) -> Result<PuiseuxNum, Error> {
        Self::monomial(ctx, e, c, 0)
    }

    /// The exact single term c·θ^{-key/e}.
    pub fn monomial(
        ctx: &'static FqmCtx,
        e: i64,
        c: FqmElem,
        key: i64,
    ) -> Result<PuiseuxNum, Error> {
        Self::check_e(ctx, e)?;
        let mut digits = BTreeMap::new();
        if c != 0 {
            digits.insert(key, c);
        }
        Ok(PuiseuxNum { ctx, e, digits, prec: None })
    }

    /// Exact embedding of a polynomial in θ over the base field F_q.
    pub fn from_poly(ctx: &'static FqmCtx, e: i64, p: &Poly) -> Result<PuiseuxNum, Error> {
        Self::check_e(ctx, e)?;
        let mut digits = BTreeMap::new();
        for (i, &c) in p.coeffs().iter().enumerate() {
            if c != 0 {
                digits.insert(-(i as i64) * e, ctx.embed(c));
            }
        }
        Ok(PuiseuxNum { ctx, e, digits, prec: None })
    }

    pub fn theta(ctx: &'static FqmCtx, e: i64) -> Result<PuiseuxNum, Error> {
        Self::monomial(ctx, e, 1, -e)
    }

    pub fn ctx(&self) -> &'static FqmCtx {
        self.ctx
    }

    pub fn e(&self) -> i64 {
        self.e
    }

    /// Certified scaled truncation order; `None` for exact values.
    pub fn prec_scaled(&self) -> Option<i64> {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// Scaled valuation: the least key carrying a nonzero digit. `None` for
    /// a value with no certified digits (exact zero, or zero to precision).
    pub fn val_scaled(&self) -> Option<i64> {
        self.digits.keys().next().copied()
    }

    /// Valuation lower bound used by tail estimates: the leading key when
    /// one exists, otherwise the truncation order itself.
    pub(crate) fn val_floor(&self) -> Option<i64> {
        self.val_scaled().or(self.prec)
    }

    pub fn digit(&self, key: i64) -> FqmElem {
        self.digits.get(&key).copied().unwrap_or(0)
    }

    pub fn digits(&self) -> impl Iterator<Item = (i64, FqmElem)> + '_ {
        self.digits.iter().map(|(&n, &c)| (n, c))
    }

    /// True when no certified digit is nonzero (the window may still hide a
    /// small value beyond `prec` unless the number is exact).
    pub fn is_zero_window(&self) -> bool {
        self.digits.is_empty()
    }

    /// Certifies |x| ≤ q^{-tol/e}: the window reaches `tol` and every digit
    /// below it vanishes.
    pub fn certifies_small(&self, tol_scaled: i64) -> bool {
        self.prec.map_or(true, |p| p >= tol_scaled)
            && self.digits.keys().all(|&n| n >= tol_scaled)
    }

    fn same_field(&self, rhs: &PuiseuxNum) -> Result<(), Error> {
        if std::ptr::eq(self.ctx, rhs.ctx) {
            Ok(())
        } else {
            Err(Error::Domain("mixed coefficient fields in Puiseux arithmetic".into()))
        }
    }

    /// Re-express the same value with ramification index `e_new` (a multiple
    /// of the current one).
    pub fn lift_to(&self, e_new: i64) -> Result<PuiseuxNum, Error> {
        Self::check_e(self.ctx, e_new)?;
        if e_new % self.e != 0 {
            return Err(Error::Domain(format!(
                "cannot lift ramification {} to non-multiple {}",
                self.e, e_new
            )));
        }
        let f = e_new / self.e;
        let digits = self.digits.iter().map(|(&n, &c)| (n * f, c)).collect();
        Ok(PuiseuxNum::make(self.ctx, e_new, digits, self.prec.map(|p| p * f)))
    }

    fn unify(&self, rhs: &PuiseuxNum) -> Result<(PuiseuxNum, PuiseuxNum), Error> {
        self.same_field(rhs)?;
        let l = self.e.lcm(&rhs.e);
        Ok((self.lift_to(l)?, rhs.lift_to(l)?))
    }

    /// Re-express the value at the coarser ramification index `e_new` (a
    /// divisor of the current one). Fails if any certified digit sits at an
    /// exponent the coarser scale cannot represent.
    pub fn try_descend(&self, e_new: i64) -> Result<PuiseuxNum, Error> {
        Self::check_e(self.ctx, e_new)?;
        if e_new <= 0 || self.e % e_new != 0 {
            return Err(Error::Domain(format!(
                "cannot descend ramification {} to non-divisor {}",
                self.e, e_new
            )));
        }
        let f = self.e / e_new;
        let mut digits = BTreeMap::new();
        for (&n, &c) in &self.digits {
            if n % f != 0 {
                return Err(Error::Domain(format!(
                    "digit at scaled exponent {n} needs ramification index {}",
                    self.e
                )));
            }
            digits.insert(n / f, c);
        }
        // Coarse key N is certified iff N·f < p, so the window is ⌈p/f⌉.
        Ok(PuiseuxNum::make(self.ctx, e_new, digits, self.prec.map(|p| (p + f - 1).div_euclid(f))))
    }

    /// Meet the window with a scaled order (digits at or beyond it drop).
    pub fn truncate_scaled(&self, p: i64) -> PuiseuxNum {
        let prec = Some(self.prec.map_or(p, |q| q.min(p)));
        PuiseuxNum::make(self.ctx, self.e, self.digits.clone(), prec)
    }

    pub fn scale(&self, c: FqmElem) -> PuiseuxNum {
        let digits = self.digits.iter().map(|(&n, &d)| (n, self.ctx.mul(d, c))).collect();
        PuiseuxNum::make(self.ctx, self.e, digits, self.prec)
    }

    pub fn neg(&self) -> PuiseuxNum {
        let digits = self.digits.iter().map(|(&n, &c)| (n, self.ctx.neg(c))).collect();
        PuiseuxNum { ctx: self.ctx, e: self.e, digits, prec: self.prec }
    }

    pub fn add(&self, rhs: &PuiseuxNum) -> Result<PuiseuxNum, Error> {
        let (a, b) = self.unify(rhs)?;
        let prec = match (a.prec, b.prec) {
            (None, p) | (p, None) => p,
            (Some(p), Some(r)) => Some(p.min(r)),
        };
        let mut digits = a.digits.clone();
        for (n, c) in b.digits {
            let s = a.ctx.add(a.digit(n), c);
            if s == 0 {
                digits.remove(&n);
            } else {
                digits.insert(n, s);
            }
        }
        Ok(PuiseuxNum::make(a.ctx, a.e, digits, prec))
    }

    pub fn sub(&self, rhs: &PuiseuxNum) -> Result<PuiseuxNum, Error> {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &PuiseuxNum) -> Result<PuiseuxNum, Error> {
        let (a, b) = self.unify(rhs)?;
        // An exact zero annihilates regardless of the other window.
        if (a.is_exact() && a.digits.is_empty()) || (b.is_exact() && b.digits.is_empty()) {
            return PuiseuxNum::zero(a.ctx, a.e);
        }
        // Error terms: δa·b has order ≥ prec(a) + val(b) and symmetrically.
        let mut prec: Option<i64> = None;
        let mut meet = |p: Option<i64>, v: Option<i64>| {
            if let (Some(p), Some(v)) = (p, v) {
                prec = Some(prec.map_or(p + v, |q| q.min(p + v)));
            }
        };
        meet(a.prec, b.val_floor());
        meet(b.prec, a.val_floor());
        let mut digits: BTreeMap<i64, FqmElem> = BTreeMap::new();
        for (&n, &c) in &a.digits {
            for (&k, &d) in &b.digits {
                let key = n + k;
                if prec.map_or(false, |p| key >= p) {
                    continue;
                }
                let t = a.ctx.mul(c, d);
                let s = a.ctx.add(digits.get(&key).copied().unwrap_or(0), t);
                if s == 0 {
                    digits.remove(&key);
                } else {
                    digits.insert(key, s);
                }
            }
        }
        Ok(PuiseuxNum::make(a.ctx, a.e, digits, prec))
    }

    /// Multiplicative inverse carrying `rel` certified digits past the
    /// leading one (fewer if the input window is shorter). Exact monomials
    /// invert exactly.
    pub fn inv_to(&self, rel: i64) -> Result<PuiseuxNum, Error> {
        let v = match self.val_scaled() {
            Some(v) => v,
            None => {
                return Err(match self.prec {
                    None => Error::DivisionByZero,
                    Some(_) => Error::Precision(
                        "inverse of a value that is zero to working precision".into(),
                    ),
                })
            }
        };
        let c0 = self.digit(v);
        let c0inv = self.ctx.inv(c0)?;
        if self.is_exact() && self.digits.len() == 1 {
            return PuiseuxNum::monomial(self.ctx, self.e, c0inv, -v);
        }
        let rel = match self.prec {
            Some(p) => rel.min(p - v),
            None => rel,
        };
        if rel < 1 {
            return Err(Error::Precision(
                "no certified digits left for the inverse".into(),
            ));
        }
        // Normalize to 1 + y with val(y) ≥ 1 and sum the geometric series.
        let mut y = BTreeMap::new();
        for (&n, &c) in &self.digits {
            if n > v && n - v < rel {
                y.insert(n - v, self.ctx.mul(c, c0inv));
            }
        }
        let neg_y = PuiseuxNum::make(self.ctx, self.e, y, Some(rel)).neg();
        let mut acc = PuiseuxNum::one(self.ctx, self.e)?.truncate_scaled(rel);
        let mut pw = PuiseuxNum::one(self.ctx, self.e)?.truncate_scaled(rel);
        loop {
            pw = pw.mul(&neg_y)?.truncate_scaled(rel);
            if pw.is_zero_window() {
                break;
            }
            acc = acc.add(&pw)?;
        }
        let digits = acc.digits.iter().map(|(&n, &c)| (n - v, self.ctx.mul(c, c0inv))).collect();
        Ok(PuiseuxNum::make(self.ctx, self.e, digits, Some(rel - v)))
    }

    /// Integer power; negative exponents invert first with `rel` digits.
    pub fn pow_i(&self, k: i64, rel: i64) -> Result<PuiseuxNum, Error> {
        if k < 0 {
            return self.inv_to(rel)?.pow_i(-k, rel);
        }
        let mut out = PuiseuxNum::one(self.ctx, self.e)?;
        let mut base = self.clone();
        let mut k = k as u64;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(out)
    }

    /// The q^i-power map. Exact on digits because x ↦ x^{q^i} is additive in
    /// characteristic p: keys scale by q^i, coefficients take Frobenius.
    pub fn frob_pow(&self, i: u32) -> Result<PuiseuxNum, Error> {
        let q = self.ctx.base.q as i64;
        let mut f: i64 = 1;
        for _ in 0..i {
            f = f.checked_mul(q).ok_or_else(|| {
                Error::Precision("Frobenius power exponent overflow".into())
            })?;
        }
        let mut digits = BTreeMap::new();
        for (&n, &c) in &self.digits {
            let key = n.checked_mul(f).ok_or_else(|| {
                Error::Precision("Frobenius power exponent overflow".into())
            })?;
            let mut cc = c;
            for _ in 0..i {
                cc = self.ctx.frob(cc);
            }
            digits.insert(key, cc);
        }
        let prec = match self.prec {
            None => None,
            Some(p) => Some(p.checked_mul(f).ok_or_else(|| {
                Error::Precision("Frobenius power exponent overflow".into())
            })?),
        };
        Ok(PuiseuxNum::make(self.ctx, self.e, digits, prec))
    }

    /// Coefficient-wise q-power Frobenius in place (keys untouched).
    pub(crate) fn frob_digits(&self) -> PuiseuxNum {
        let digits = self.digits.iter().map(|(&n, &c)| (n, self.ctx.frob(c))).collect();
        PuiseuxNum { ctx: self.ctx, e: self.e, digits, prec: self.prec }
    }

    /// Every certified digit of the common window agrees.
    pub fn agrees_with(&self, rhs: &PuiseuxNum) -> Result<bool, Error> {
        Ok(self.sub(rhs)?.is_zero_window())
    }

    /// Scaled key of the first disagreeing digit, if any.
    pub fn first_disagreement(&self, rhs: &PuiseuxNum) -> Result<Option<i64>, Error> {
        Ok(self.sub(rhs)?.val_scaled())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let digits: Vec<serde_json::Value> = self
            .digits
            .iter()
            .map(|(&n, &c)| {
                let g = n.gcd(&self.e);
                serde_json::json!([n / g, self.e / g, c])
            })
            .collect();
        let prec = match self.prec {
            None => serde_json::Value::Null,
            Some(p) => {
                let g = p.gcd(&self.e);
                serde_json::json!([p / g, self.e / g])
            }
        };
        serde_json::json!({
            "e": self.e,
            "m": self.ctx.m,
            "digits": digits,
            "prec": prec,
        })
    }

    pub fn from_json(q: u32, v: &serde_json::Value) -> Result<PuiseuxNum, Error> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("expected an object".into()))?;
        let geti = |k: &str| -> Result<i64, Error> {
            obj.get(k)
                .and_then(|x| x.as_i64())
                .ok_or_else(|| Error::Parse(format!("missing integer field '{k}'")))
        };
        let e = geti("e")?;
        let m = geti("m")?;
        let ctx = FqmCtx::get(q, m as u32)?;
        Self::check_e(ctx, e)?;
        let ratio = |num: i64, den: i64| -> Result<i64, Error> {
            if den <= 0 || e % den != 0 {
                return Err(Error::Parse(format!(
                    "exponent denominator {den} does not divide the ramification index {e}"
                )));
            }
            Ok(num * (e / den))
        };
        let mut digits = BTreeMap::new();
        for d in obj
            .get("digits")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Parse("missing 'digits' array".into()))?
        {
            let t = d.as_array().filter(|t| t.len() == 3).ok_or_else(|| {
                Error::Parse("each digit must be [exp-num, exp-den, coeff]".into())
            })?;
            let (num, den) = (
                t[0].as_i64().ok_or_else(|| Error::Parse("bad exponent numerator".into()))?,
                t[1].as_i64().ok_or_else(|| Error::Parse("bad exponent denominator".into()))?,
            );
            let c = t[2].as_u64().ok_or_else(|| Error::Parse("bad coefficient".into()))?;
            if c >= ctx.qm {
                return Err(Error::Parse(format!("coefficient {c} out of range for q^m = {}", ctx.qm)));
            }
            digits.insert(ratio(num, den)?, c as FqmElem);
        }
        let prec = match obj.get("prec") {
            None | Some(serde_json::Value::Null) => None,
            Some(p) => {
                let t = p.as_array().filter(|t| t.len() == 2).ok_or_else(|| {
                    Error::Parse("'prec' must be null or [num, den]".into())
                })?;
                let (num, den) = (
                    t[0].as_i64().ok_or_else(|| Error::Parse("bad precision numerator".into()))?,
                    t[1].as_i64().ok_or_else(|| Error::Parse("bad precision denominator".into()))?,
                );
                Some(ratio(num, den)?)
            }
        };
        Ok(PuiseuxNum::make(ctx, e, digits, prec))
    }

    /// Human-readable form, most significant digit first.
    pub fn render(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (&n, &c) in &self.digits {
            let g = n.gcd(&self.e);
            let (num, den) = (-n / g, self.e / g);
            let coeff = if self.ctx.m == 1 && self.ctx.base.n == 1 {
                format!("{c}")
            } else {
                format!("[{}]", self.ctx.to_flat_vec(c).iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","))
            };
            let exp = if den == 1 { format!("{num}") } else { format!("{num}/{den}") };
            parts.push(format!("{coeff}*θ^({exp})"));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        if let Some(p) = self.prec {
            let g = p.gcd(&self.e);
            let (num, den) = (-p / g, self.e / g);
            let exp = if den == 1 { format!("{num}") } else { format!("{num}/{den}") };
            parts.push(format!("O(θ^({exp}))"));
        }
        parts.join(" + ")
    }
}

impl std::fmt::Debug for PuiseuxNum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PuiseuxNum[q={}, m={}, e={}: {}]", self.ctx.base.q, self.ctx.m, self.e, self.render())
    }
}

/// Coefficient-wise q-power Frobenius on the unramified completion. Rejects
/// ramified expansions: those only carry a Frobenius through one of the ψ
/// variants, which fix a convention for the ramified generator.
pub fn sigma(x: &PuiseuxNum) -> Result<PuiseuxNum, Error> {
    if x.e() != 1 {
        return Err(Error::Domain(
            "σ acts on unramified expansions only; use a ψ variant for ramified input".into(),
        ));
    }
    Ok(x.frob_digits())
}

/// The coefficient ω pinning the root of -θ: the smallest field element with
/// ω^{q-1} = -1, so that λ = ω·θ^{1/(q-1)} satisfies λ^{q-1} = -θ. In odd
/// characteristic ω lives in F_{q²}\F_q, so the context needs even m.
pub fn neg_theta_root_coeff(ctx: &'static FqmCtx) -> Result<FqmElem, Error> {
    let q = ctx.base.q as u64;
    let minus_one = ctx.neg(1);
    ctx.elements()
        .filter(|&w| w != 0)
        .find(|&w| ctx.pow(w, q - 1) == minus_one)
        .ok_or_else(|| {
            Error::BadField(format!(
                "no (q-1)-th root of -1 in F_{{{}^{}}}; use an even extension degree",
                ctx.base.q, ctx.m
            ))
        })
}

/// The Carlitz period π̃ = θ·(-θ)^{1/(q-1)}·∏_{i≥1}(1-θ^{1-q^i})^{-1} as a
/// window of `prec_theta` absolute θ-digits, with ramification index q-1 and
/// the root of -θ fixed by `neg_theta_root_coeff`. Its valuation is
/// -q/(q-1).
pub fn pitilde(ctx: &'static FqmCtx, prec_theta: i64) -> Result<PuiseuxNum, Error> {
    if prec_theta < 1 {
        return Err(Error::Precision("π̃ needs at least one certified θ-digit".into()));
    }
    let q = ctx.base.q as i64;
    let e = q - 1;
    let omega = neg_theta_root_coeff(ctx)?;
    // Relative window for the unramified unit; factors beyond it only touch
    // digits of order > rel because 1 - θ^{1-q^i} = 1 + O(θ^{-(q^i-1)}).
    let rel = prec_theta + q + 2;
    let mut f = PuiseuxNum::one(ctx, 1)?;
    let mut step: i64 = q - 1;
    while step <= rel {
        let factor = PuiseuxNum::one(ctx, 1)?
            .sub(&PuiseuxNum::monomial(ctx, 1, 1, step)?)?;
        f = f.mul(&factor)?;
        step = step
            .checked_mul(q)
            .and_then(|s| s.checked_add(q - 1))
            .ok_or_else(|| Error::Precision("π̃ factor exponent overflow".into()))?;
    }
    let unit = f.inv_to(rel)?;
    let lead = PuiseuxNum::monomial(ctx, e, omega, -q)?;
    Ok(lead.mul(&unit.lift_to(e)?)?.truncate_scaled(prec_theta * e))
}
