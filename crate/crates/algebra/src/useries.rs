//! Truncated Laurent series in the uniformizer u at the infinite cusp, with
//! explicit absolute precision, plus the hyperderivative action ∂^n and the
//! Goss polynomials 𝒢_k.
//!
//! Every series knows the exponent window it is trusted on: `coeffs[i]` is
//! the coefficient of u^{val+i} and nothing is claimed at exponents ≥ prec.
//! All ring operations propagate precision pessimistically, so a final
//! `prec()` is always a sound claim.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::binom::binom_mod_p_signed;
use crate::carlitz::{carlitz_d, ReversedCarlitz};
use crate::field::FqCtx;
use crate::poly::Poly;
use crate::ratf::RatF;
use crate::scalar::Scalar;
use crate::Error;

#[derive(Clone, Debug)]
pub struct USeries<T: Scalar> {
    zero: T,
    /// Exponent of coeffs[0]. After canonicalization the leading stored
    /// coefficient is nonzero unless the series is zero to precision.
    val: i64,
    coeffs: Vec<T>,
    /// Exclusive absolute precision: coefficients of u^e for e ≥ prec are unknown.
    prec: i64,
}

impl<T: Scalar> PartialEq for USeries<T> {
    fn eq(&self, other: &Self) -> bool {
        self.val == other.val && self.prec == other.prec && self.coeffs == other.coeffs
    }
}

impl<T: Scalar> USeries<T> {
    fn canonical(mut self) -> Self {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            Some(0) => {}
            Some(k) => {
                self.coeffs.drain(..k);
                self.val += k as i64;
            }
            None => {
                self.val = self.prec;
                self.coeffs.clear();
            }
        }
        debug_assert_eq!(self.val + self.coeffs.len() as i64, self.prec);
        self
    }

    pub fn from_coeffs(witness: &T, val: i64, coeffs: Vec<T>, prec: i64) -> Self {
        assert_eq!(val + coeffs.len() as i64, prec, "dense window mismatch");
        USeries { zero: witness.zero_like(), val, coeffs, prec }.canonical()
    }

    pub fn zero_prec(witness: &T, prec: i64) -> Self {
        USeries { zero: witness.zero_like(), val: prec, coeffs: Vec::new(), prec }
    }

    pub fn monomial(c: &T, e: i64, prec: i64) -> Self {
        assert!(e < prec, "monomial exponent outside precision window");
        let zero = c.zero_like();
        let mut coeffs = vec![zero.clone(); (prec - e) as usize];
        coeffs[0] = c.clone();
        USeries { zero, val: e, coeffs, prec }.canonical()
    }

    pub fn one(witness: &T, prec: i64) -> Self {
        Self::monomial(&witness.one_like(), 0, prec)
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// Valuation of the stored part; None when zero to precision.
    pub fn valuation(&self) -> Option<i64> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.val)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn witness(&self) -> &T {
        &self.zero
    }

    /// Coefficient of u^e. Panics when e is outside the trusted window;
    /// exponents below the valuation are genuinely zero.
    pub fn coeff(&self, e: i64) -> T {
        assert!(e < self.prec, "coefficient u^{e} requested beyond precision {}", self.prec);
        if e < self.val {
            self.zero.clone()
        } else {
            self.coeffs[(e - self.val) as usize].clone()
        }
    }

    /// (exponent, coefficient) pairs of the nonzero stored terms.
    pub fn support(&self) -> impl Iterator<Item = (i64, &T)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.val + i as i64, c))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let prec = self.prec.min(rhs.prec);
        let val = self.val.min(rhs.val).min(prec);
        let mut coeffs = vec![self.zero.zero_like(); (prec - val) as usize];
        for (src, out_base) in [(self, val), (rhs, val)] {
            for (i, c) in src.coeffs.iter().enumerate() {
                let e = src.val + i as i64;
                if e < prec && !c.is_zero() {
                    let k = (e - out_base) as usize;
                    coeffs[k] = coeffs[k].add(c);
                }
            }
        }
        USeries { zero: self.zero.zero_like(), val, coeffs, prec }.canonical()
    }

    pub fn neg(&self) -> Self {
        USeries {
            zero: self.zero.zero_like(),
            val: self.val,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero_prec(&self.zero, self.prec);
        }
        USeries {
            zero: self.zero.zero_like(),
            val: self.val,
            coeffs: self.coeffs.iter().map(|a| a.mul(c)).collect(),
            prec: self.prec,
        }
        .canonical()
    }

    pub fn scale_ratf(&self, r: &RatF) -> Self {
        self.scale(&self.zero.embed_ratf(r))
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&self.zero.from_int_like(n))
    }

    /// Multiply by u^e.
    pub fn shift(&self, e: i64) -> Self {
        USeries {
            zero: self.zero.zero_like(),
            val: self.val + e,
            coeffs: self.coeffs.clone(),
            prec: self.prec + e,
        }
    }

    pub fn truncate_to(&self, prec: i64) -> Self {
        assert!(prec <= self.prec, "cannot raise precision by truncation");
        let keep = (prec - self.val).max(0) as usize;
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(keep);
        USeries { zero: self.zero.zero_like(), val: self.val.min(prec), coeffs, prec }.canonical()
    }

    /// Extend the claimed precision by treating the unknown tail as zero.
    /// Only sound inside self-correcting iterations; never a ring identity.
    pub fn assume_prec(&self, prec: i64) -> Self {
        assert!(prec >= self.prec);
        let mut coeffs = self.coeffs.clone();
        let val = if coeffs.is_empty() { self.val.min(prec) } else { self.val };
        coeffs.resize((prec - val) as usize, self.zero.zero_like());
        USeries { zero: self.zero.zero_like(), val, coeffs, prec }.canonical()
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            let prec = (self.prec + rhs.val).min(rhs.prec + self.val);
            return Self::zero_prec(&self.zero, prec);
        }
        let prec = (self.prec + rhs.val).min(rhs.prec + self.val);
        let val = self.val + rhs.val;
        let len = (prec - val).max(0) as usize;
        // The two paths produce identical exact coefficients; the parallel one
        // just distributes output indices.
        let coeffs = if self.coeffs.len() * rhs.coeffs.len() >= 1 << 17 {
            use rayon::prelude::*;
            (0..len)
                .into_par_iter()
                .map(|k| {
                    let mut acc = self.zero.zero_like();
                    let i_lo = (k + 1).saturating_sub(rhs.coeffs.len());
                    let i_hi = (self.coeffs.len() - 1).min(k);
                    for i in i_lo..=i_hi {
                        let a = &self.coeffs[i];
                        if a.is_zero() {
                            continue;
                        }
                        let b = &rhs.coeffs[k - i];
                        if !b.is_zero() {
                            acc = acc.add(&a.mul(b));
                        }
                    }
                    acc
                })
                .collect()
        } else {
            let mut coeffs = vec![self.zero.zero_like(); len];
            // zero-skip on the left factor; inner loop bounded by the window
            for (i, a) in self.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let ea = self.val + i as i64;
                let jmax = (prec - ea - rhs.val).min(rhs.coeffs.len() as i64);
                for j in 0..jmax.max(0) as usize {
                    let b = &rhs.coeffs[j];
                    if b.is_zero() {
                        continue;
                    }
                    let k = (ea + rhs.val + j as i64 - val) as usize;
                    coeffs[k] = coeffs[k].add(&a.mul(b));
                }
            }
            coeffs
        };
        USeries { zero: self.zero.zero_like(), val, coeffs, prec }.canonical()
    }

    /// Reciprocal. Requires a nonzero leading coefficient; the result has
    /// valuation -val and precision prec - 2·val.
    pub fn invert(&self) -> Result<Self, Error> {
        let v = self.valuation().ok_or(Error::DivisionByZero)?;
        let a0inv = self.coeffs[0].inv()?;
        let n = self.coeffs.len();
        let mut b = Vec::with_capacity(n);
        b.push(a0inv.clone());
        for k in 1..n {
            let mut acc = self.zero.zero_like();
            for (j, a) in self.coeffs[1..=k].iter().enumerate() {
                if !a.is_zero() {
                    acc = acc.add(&a.mul(&b[k - 1 - j]));
                }
            }
            b.push(acc.neg().mul(&a0inv));
        }
        Ok(USeries { zero: self.zero.zero_like(), val: -v, coeffs: b, prec: self.prec - 2 * v }
            .canonical())
    }

    pub fn pow(&self, e: u64) -> Self {
        if e == 0 {
            let rel = self.prec - self.valuation().unwrap_or(self.prec);
            return Self::one(&self.zero, rel.max(1));
        }
        let mut base = self.clone();
        let mut acc: Option<USeries<T>> = None;
        let mut e = e;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        acc.unwrap()
    }

    pub fn pow_signed(&self, e: i64) -> Result<Self, Error> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.invert()?.pow((-e) as u64))
        }
    }

    /// Divide by an exact polynomial Σ t_e u^e with unit constant term,
    /// by forward substitution. Sparse divisors cost O(len · support).
    pub fn div_sparse_poly(&self, terms: &[(usize, T)]) -> Result<Self, Error> {
        let (e0, t0) = terms.first().ok_or(Error::DivisionByZero)?;
        if *e0 != 0 {
            return Err(Error::Domain("sparse divisor needs a constant term".into()));
        }
        let t0inv = t0.inv()?;
        let n = self.coeffs.len();
        let mut out: Vec<T> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = if self.coeffs[k].is_zero() {
                self.zero.zero_like()
            } else {
                self.coeffs[k].clone()
            };
            for (e, t) in &terms[1..] {
                if *e <= k && !out[k - e].is_zero() {
                    acc = acc.sub(&t.mul(&out[k - e]));
                }
            }
            out.push(acc.mul(&t0inv));
        }
        Ok(USeries { zero: self.zero.zero_like(), val: self.val, coeffs: out, prec: self.prec }
            .canonical())
    }

    /// u(az) as a series in u, for monic a: u^{|a|} / 𝔠_a(u).
    pub fn uaz(witness: &T, a: &Poly, prec: i64) -> Result<Self, Error> {
        if !a.is_monic() {
            return Err(Error::Domain("u(az) is only taken for monic a".into()));
        }
        let abs = a.abs_deg() as i64;
        if abs >= prec {
            return Ok(Self::zero_prec(witness, prec));
        }
        let rc = ReversedCarlitz::new(a)?;
        let terms: Vec<(usize, T)> = rc
            .terms
            .iter()
            .map(|(e, c)| (*e, witness.embed_ratf(&RatF::from_poly(c.clone()))))
            .collect();
        Self::monomial(&witness.one_like(), abs, prec).div_sparse_poly(&terms)
    }

    /// Substitute a power series into a power series: self ∘ g, valid when
    /// g has positive valuation and self has no negative exponents.
    pub fn subst(&self, g: &Self) -> Result<Self, Error> {
        if self.val < 0 {
            return Err(Error::Domain("substitution into a Laurent series".into()));
        }
        let vg = match g.valuation() {
            Some(v) if v >= 1 => v,
            Some(_) => return Err(Error::Domain("substitution needs val ≥ 1".into())),
            None => return Ok(Self::zero_prec(&self.zero, g.prec)),
        };
        let target = g.prec.min(self.prec * vg);
        let jmax = self.prec - 1;
        let jmax = jmax.min((target - 1) / vg);
        let mut acc = Self::zero_prec(&self.zero, target);
        for j in (0..=jmax).rev() {
            acc = acc.mul(g);
            let c = self.coeff(j);
            if !c.is_zero() {
                acc = acc.add(&Self::monomial(&c, 0, target));
            }
            acc = acc.truncate_to(acc.prec().min(target));
        }
        Ok(acc.truncate_to(target.min(acc.prec())))
    }

    /// f evaluated at u(az) for monic a: the level-raising substitution.
    pub fn subst_uaz(&self, a: &Poly) -> Result<Self, Error> {
        let g = Self::uaz(&self.zero, a, self.prec)?;
        self.subst(&g)
    }

    /// The n-th hyperderivative with respect to z, pulled through u. Output
    /// precision drops by n.
    pub fn hyper(&self, n: u32) -> Self {
        if n == 0 {
            return self.clone();
        }
        let ctx = self.zero.ctx();
        let row = hyper_row(ctx, n);
        let p = ctx.p;
        let qm1 = (ctx.q - 1) as u32;
        let prec = self.prec - n as i64;
        let val = self.val.min(prec);
        let mut coeffs = vec![self.zero.zero_like(); (prec - val) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let j = self.val + i as i64;
            for m in 0..=n {
                if m % qm1 != n % qm1 {
                    continue;
                }
                let c = &row[m as usize];
                if c.is_zero() {
                    continue;
                }
                let e = j + m as i64;
                if e >= prec {
                    break;
                }
                let b = binom_mod_p_signed(-j, m as u64, p);
                if b == 0 {
                    continue;
                }
                let factor = self.zero.embed_ratf(c).scale_int_like(b as i64);
                let k = (e - val) as usize;
                coeffs[k] = coeffs[k].add(&a.mul(&factor));
            }
        }
        USeries { zero: self.zero.zero_like(), val, coeffs, prec }.canonical()
    }

    /// Coefficientwise image under a map of scalars, e.g. a Galois twist.
    pub fn map_coeffs<F: Fn(&T) -> T>(&self, f: F) -> Self {
        USeries {
            zero: self.zero.zero_like(),
            val: self.val,
            coeffs: self.coeffs.iter().map(|c| f(c)).collect(),
            prec: self.prec,
        }
        .canonical()
    }

    /// m-th root with prescribed leading coefficient root, by Newton
    /// iteration with doubling precision. m must be a unit mod p and must
    /// divide the valuation.
    pub fn nth_root(&self, m: u32, leading_root: &T) -> Result<Self, Error> {
        let v = self.valuation().ok_or(Error::Domain("root of a zero series".into()))?;
        let ctx = self.zero.ctx();
        if m == 0 || m % ctx.p == 0 {
            return Err(Error::Domain("root index must be a unit in the base field".into()));
        }
        if v % m as i64 != 0 {
            return Err(Error::Domain("valuation not divisible by root index".into()));
        }
        let lr = leading_root.clone();
        let mut check = lr.one_like();
        for _ in 0..m {
            check = check.mul(&lr);
        }
        if check != self.coeffs[0] {
            return Err(Error::Domain("leading coefficient is not the m-th power of the seed".into()));
        }
        let w = v / m as i64;
        let target_rel = self.prec - v;
        let mut s = Self::monomial(&lr, w, w + 1);
        let mut rel: i64 = 1;
        while rel < target_rel {
            let rel2 = (2 * rel).min(target_rel);
            let s_ext = s.assume_prec(w + rel2);
            let p_full = s_ext.pow(m as u64);
            let diff = p_full.sub(&self.truncate_to(v + rel2));
            let denom = s_ext.pow(m as u64 - 1).scale_int(m as i64);
            let corr = diff.mul(&denom.invert()?);
            s = s_ext.sub(&corr).truncate_to(w + rel2);
            rel = rel2;
        }
        Ok(s)
    }

    /// Coefficients agree on the overlap of the trusted windows.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let prec = self.prec.min(other.prec);
        let lo = self.val.min(other.val);
        for e in lo..prec {
            if self.coeff(e) != other.coeff(e) {
                return false;
            }
        }
        true
    }
}

impl USeries<RatF> {
    /// JSON interchange form: {"var":"u","val":v,"prec":N,"coeffs":[..]}
    /// with coefficients in the K text grammar; "val" omitted when 0.
    pub fn to_json(&self) -> serde_json::Value {
        let lo = if self.is_zero() { self.prec.min(0) } else { self.val };
        let coeffs: Vec<serde_json::Value> = (lo..self.prec)
            .map(|e| serde_json::Value::String(self.coeff(e).render()))
            .collect();
        let mut obj = serde_json::Map::new();
        obj.insert("var".into(), serde_json::Value::String("u".into()));
        if lo != 0 {
            obj.insert("val".into(), serde_json::Value::Number(lo.into()));
        }
        obj.insert("prec".into(), serde_json::Value::Number(self.prec.into()));
        obj.insert("coeffs".into(), serde_json::Value::Array(coeffs));
        serde_json::Value::Object(obj)
    }

    pub fn from_json(ctx: &'static FqCtx, v: &serde_json::Value) -> Result<USeries<RatF>, Error> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("series: expected object".into()))?;
        match obj.get("var").and_then(|x| x.as_str()) {
            Some("u") | None => {}
            Some(other) => return Err(Error::Parse(format!("series in unknown variable '{other}'"))),
        }
        let prec = obj
            .get("prec")
            .and_then(|x| x.as_i64())
            .ok_or_else(|| Error::Parse("series: missing prec".into()))?;
        let val = obj.get("val").and_then(|x| x.as_i64()).unwrap_or(0);
        let raw = obj
            .get("coeffs")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Parse("series: missing coeffs".into()))?;
        if val + raw.len() as i64 != prec {
            return Err(Error::Parse("series: coeffs length disagrees with val/prec".into()));
        }
        let mut coeffs = Vec::with_capacity(raw.len());
        for c in raw {
            let s = c.as_str().ok_or_else(|| Error::Parse("series: coefficient must be a string".into()))?;
            coeffs.push(RatF::parse(ctx, s)?);
        }
        Ok(USeries::from_coeffs(&RatF::zero(ctx), val, coeffs, prec))
    }
}

/// c_{n,m} = [t^n] ẽ(t)^m for m = 0..n, where ẽ(t) = Σ_{i≥0} t^{q^i}/D_i.
/// These drive the hyperderivative action; memoized per (q, n).
fn hyper_row(ctx: &'static FqCtx, n: u32) -> Arc<Vec<RatF>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<Vec<RatF>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(row) = cache.lock().unwrap().get(&(ctx.q, n)) {
        return row.clone();
    }
    let nn = n as usize;
    // sparse support of ẽ up to degree n
    let mut supp: Vec<(usize, RatF)> = Vec::new();
    let mut e = 1usize;
    let mut i = 0usize;
    while e <= nn {
        supp.push((e, RatF::new(Poly::one(ctx), carlitz_d(ctx, i)).unwrap()));
        match e.checked_mul(ctx.q as usize) {
            Some(next) => e = next,
            None => break,
        }
        i += 1;
    }
    // powers of ẽ truncated at degree n
    let mut row = vec![RatF::zero(ctx); nn + 1];
    let mut power = vec![RatF::zero(ctx); nn + 1];
    power[0] = RatF::one(ctx);
    row[0] = power[nn].clone();
    for m in 1..=nn {
        let mut next = vec![RatF::zero(ctx); nn + 1];
        for (k, c) in power.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (e, d) in &supp {
                if k + e <= nn {
                    next[k + e] = next[k + e].add(&c.mul(d));
                }
            }
        }
        power = next;
        row[m] = power[nn].clone();
    }
    let row = Arc::new(row);
    cache.lock().unwrap().insert((ctx.q, n), row.clone());
    row
}

/// Goss polynomial coefficients: 𝒢_k(u) = (-1)^{k-1} ∂^{k-1}(u) is a monic
/// degree-k polynomial in u. Returns its dense coefficients 0..=k over K.
pub fn goss_coeffs(ctx: &'static FqCtx, k: usize) -> Arc<Vec<RatF>> {
    assert!(k >= 1);
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), Arc<Vec<RatF>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(row) = cache.lock().unwrap().get(&(ctx.q, k)) {
        return row.clone();
    }
    let one = RatF::one(ctx);
    let u = USeries::monomial(&one, 1, 2 * k as i64 + 1);
    let mut d = u.hyper(k as u32 - 1);
    if (k - 1) % 2 == 1 && ctx.p != 2 {
        d = d.neg();
    }
    let mut row = vec![RatF::zero(ctx); k + 1];
    for (e, c) in d.support() {
        assert!(e >= 1 && e <= k as i64, "Goss polynomial support out of range");
        row[e as usize] = c.clone();
    }
    let row = Arc::new(row);
    cache.lock().unwrap().insert((ctx.q, k), row.clone());
    row
}

/// Evaluate 𝒢_k at a series with positive valuation, using the power ladder
/// of the argument; used for Eisenstein expansions.
pub fn goss_eval<T: Scalar>(k: usize, arg: &USeries<T>) -> Result<USeries<T>, Error> {
    let ctx = arg.witness().ctx();
    let row = goss_coeffs(ctx, k);
    // lift the K-polynomial to the scalar ring before substitution; it is
    // exact, so give it enough precision not to cap the result's
    let prec = (k as i64 + 1).max(arg.prec());
    let zero = arg.witness().zero_like();
    let mut coeffs: Vec<T> = row.iter().map(|c| arg.witness().embed_ratf(c)).collect();
    coeffs.resize(prec as usize, zero.clone());
    let lifted = USeries::from_coeffs(&zero, 0, coeffs, prec);
    lifted.subst(arg)
}
