//! Nearly holomorphic forms: polynomials in a formal variable Y standing for
//! 1/(π̃z - π̃ψ(z)), with coefficients in the quasi-modular algebra or in
//! u-series. The Y-degree-i coefficient of a weight-k, type-m form carries
//! weight k-2i and type m-i, which the graded constructors enforce.
//!
//! Y has no Hasse action: ψ(z) is not a differentiable function of z, so the
//! Maass-Shimura operator δ_k^r moves weight around purely through the
//! μ-indexed binomials. The formal slash variable X, by contrast, does carry
//! the Hasse action; that asymmetry is exactly what the equivariance check
//! at the bottom of this module exercises.

use std::collections::BTreeMap;
use std::fmt;

use dmf_algebra::binom::{binom_big, binom_mod_p};
use dmf_algebra::{Error, FqCtx, RatF, USeries};
use num_bigint::BigInt;

use crate::eisenstein::Generator;
use crate::graded::{candidate_monomials, qm_membership, reduce_type, GradedForm, Membership};
use crate::slash::FormPoly;

/// Coefficient ring for an [`NHForm`]: either the abstract graded algebra
/// or concrete u-series. Graded coefficients report their (weight, type)
/// so the Y-degree bookkeeping can be checked; series coefficients don't.
pub trait NhCoef: Clone {
    fn add(&self, rhs: &Self) -> Result<Self, Error>;
    fn scale(&self, c: &RatF) -> Self;
    fn mul(&self, rhs: &Self) -> Result<Self, Error>;
    fn hyper(&self, n: u32) -> Result<Self, Error>;
    fn is_zero(&self) -> bool;
    /// Declared (weight, type) when the coefficient carries its own grading.
    fn grading(&self) -> Option<(i64, i64)>;
}

impl NhCoef for GradedForm {
    fn add(&self, rhs: &Self) -> Result<Self, Error> {
        GradedForm::add(self, rhs)
    }

    fn scale(&self, c: &RatF) -> Self {
        GradedForm::scale(self, c)
    }

    fn mul(&self, rhs: &Self) -> Result<Self, Error> {
        Ok(GradedForm::mul(self, rhs))
    }

    fn hyper(&self, n: u32) -> Result<Self, Error> {
        GradedForm::hyper(self, n)
    }

    fn is_zero(&self) -> bool {
        GradedForm::is_zero(self)
    }

    fn grading(&self) -> Option<(i64, i64)> {
        Some((self.weight(), self.typ()))
    }
}

impl NhCoef for USeries<RatF> {
    fn add(&self, rhs: &Self) -> Result<Self, Error> {
        Ok(USeries::add(self, rhs))
    }

    fn scale(&self, c: &RatF) -> Self {
        USeries::scale(self, c)
    }

    fn mul(&self, rhs: &Self) -> Result<Self, Error> {
        Ok(USeries::mul(self, rhs))
    }

    fn hyper(&self, n: u32) -> Result<Self, Error> {
        Ok(USeries::hyper(self, n))
    }

    fn is_zero(&self) -> bool {
        USeries::is_zero(self)
    }

    fn grading(&self) -> Option<(i64, i64)> {
        None
    }
}

/// A nearly holomorphic form Σ_i f_i·Y^i of weight k and type m. Stored
/// sparsely by Y-degree; zero coefficients are never kept.
#[derive(Clone)]
pub struct NHForm<C: NhCoef> {
    ctx: &'static FqCtx,
    weight: i64,
    typ: i64,
    coeffs: BTreeMap<u32, C>,
}

impl<C: NhCoef + PartialEq> PartialEq for NHForm<C> {
    fn eq(&self, rhs: &Self) -> bool {
        self.ctx.q == rhs.ctx.q
            && self.weight == rhs.weight
            && self.typ == rhs.typ
            && self.coeffs == rhs.coeffs
    }
}

impl<C: NhCoef> fmt::Debug for NHForm<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NHForm")
            .field("q", &self.ctx.q)
            .field("weight", &self.weight)
            .field("type", &self.typ)
            .field("y_degrees", &self.coeffs.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl<C: NhCoef> NHForm<C> {
    pub fn zero(ctx: &'static FqCtx, weight: i64, typ: i64) -> NHForm<C> {
        NHForm { ctx, weight, typ: reduce_type(ctx.q, typ), coeffs: BTreeMap::new() }
    }

    /// Assemble from Y-degree ↦ coefficient. Graded coefficients must match
    /// the forced slice grading (weight - 2i, type m - i).
    pub fn new(
        ctx: &'static FqCtx,
        weight: i64,
        typ: i64,
        coeffs: BTreeMap<u32, C>,
    ) -> Result<NHForm<C>, Error> {
        let mut out = NHForm::zero(ctx, weight, typ);
        for (i, c) in coeffs {
            if c.is_zero() {
                continue;
            }
            out.check_slice(i, &c)?;
            out.coeffs.insert(i, c);
        }
        Ok(out)
    }

    /// Single Y-degree.
    pub fn from_coeff(
        ctx: &'static FqCtx,
        weight: i64,
        typ: i64,
        degree: u32,
        c: C,
    ) -> Result<NHForm<C>, Error> {
        NHForm::new(ctx, weight, typ, BTreeMap::from([(degree, c)]))
    }

    fn check_slice(&self, i: u32, c: &C) -> Result<(), Error> {
        if let Some((w, t)) = c.grading() {
            let want_w = self.weight - 2 * i as i64;
            let want_t = reduce_type(self.ctx.q, self.typ - i as i64);
            if w != want_w || t != want_t {
                return Err(Error::Domain(format!(
                    "Y^{i} coefficient has weight {w} type {t}, expected weight {want_w} type {want_t}"
                )));
            }
        }
        Ok(())
    }

    pub fn ctx(&self) -> &'static FqCtx {
        self.ctx
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn typ(&self) -> i64 {
        self.typ
    }

    /// Largest Y-degree with a nonzero coefficient; 0 for the zero form.
    pub fn depth(&self) -> u32 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, degree: u32) -> Option<&C> {
        self.coeffs.get(&degree)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (u32, &C)> {
        self.coeffs.iter().map(|(&i, c)| (i, c))
    }

    fn merge(&mut self, degree: u32, c: C) -> Result<(), Error> {
        if c.is_zero() {
            return Ok(());
        }
        self.check_slice(degree, &c)?;
        match self.coeffs.remove(&degree) {
            None => {
                self.coeffs.insert(degree, c);
            }
            Some(prev) => {
                let s = prev.add(&c)?;
                if !s.is_zero() {
                    self.coeffs.insert(degree, s);
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, rhs: &NHForm<C>) -> Result<NHForm<C>, Error> {
        if self.weight != rhs.weight || self.typ != rhs.typ {
            return Err(Error::Domain(format!(
                "cannot add weight {} type {} to weight {} type {}",
                rhs.weight, rhs.typ, self.weight, self.typ
            )));
        }
        let mut out = self.clone();
        for (&i, c) in &rhs.coeffs {
            out.merge(i, c.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &RatF) -> NHForm<C> {
        let mut out = NHForm::zero(self.ctx, self.weight, self.typ);
        if c.is_zero() {
            return out;
        }
        for (&i, f) in &self.coeffs {
            out.coeffs.insert(i, f.scale(c));
        }
        out
    }

    pub fn neg(&self) -> NHForm<C> {
        self.scale(&RatF::from_int(self.ctx, -1))
    }

    pub fn sub(&self, rhs: &NHForm<C>) -> Result<NHForm<C>, Error> {
        self.add(&rhs.neg())
    }

    /// Product; weights and types add, Y-degrees convolve.
    pub fn mul(&self, rhs: &NHForm<C>) -> Result<NHForm<C>, Error> {
        let mut out =
            NHForm::zero(self.ctx, self.weight + rhs.weight, self.typ + rhs.typ);
        for (&i, a) in &self.coeffs {
            for (&j, b) in &rhs.coeffs {
                out.merge(i + j, a.mul(b)?)?;
            }
        }
        Ok(out)
    }
}

impl NHForm<GradedForm> {
    /// The Y⁰ part, i.e. the image under the forgetful isomorphism onto the
    /// quasi-modular algebra.
    pub fn iota(&self) -> GradedForm {
        self.coeffs
            .get(&0)
            .cloned()
            .unwrap_or_else(|| GradedForm::zero(self.ctx, self.weight, self.typ))
    }

    /// JSON shape: { "weight": k, "type": m, "Y": [coefficient per degree] }.
    pub fn to_json(&self) -> serde_json::Value {
        let depth = self.depth();
        let ys: Vec<serde_json::Value> = (0..=depth)
            .map(|i| match self.coeffs.get(&i) {
                Some(c) => c.to_json(),
                None => GradedForm::zero(
                    self.ctx,
                    self.weight - 2 * i as i64,
                    self.typ - i as i64,
                )
                .to_json(),
            })
            .collect();
        serde_json::json!({ "weight": self.weight, "type": self.typ, "Y": ys })
    }

    pub fn from_json(
        ctx: &'static FqCtx,
        v: &serde_json::Value,
    ) -> Result<NHForm<GradedForm>, Error> {
        let bad = |m: &str| Error::Parse(format!("nearly holomorphic form JSON: {m}"));
        let weight = v
            .get("weight")
            .and_then(|w| w.as_i64())
            .ok_or_else(|| bad("missing weight"))?;
        let typ = v
            .get("type")
            .and_then(|t| t.as_i64())
            .ok_or_else(|| bad("missing type"))?;
        let ys = v
            .get("Y")
            .and_then(|y| y.as_array())
            .ok_or_else(|| bad("missing Y array"))?;
        let mut coeffs = BTreeMap::new();
        for (i, c) in ys.iter().enumerate() {
            coeffs.insert(i as u32, GradedForm::from_json(ctx, c)?);
        }
        NHForm::new(ctx, weight, typ, coeffs)
    }
}

/// E₂ = E - Y, the weight-2 type-1 nearly holomorphic extension of the false
/// Eisenstein series.
pub fn e2(ctx: &'static FqCtx) -> NHForm<GradedForm> {
    let e = GradedForm::generator(ctx, Generator::E);
    let minus_one = GradedForm::monomial(ctx, (0, 0, 0), RatF::from_int(ctx, -1));
    NHForm::new(ctx, 2, 1, BTreeMap::from([(0, e), (1, minus_one)]))
        .expect("E and -1 have the forced slice gradings")
}

/// The Maass-Shimura operator δ_k^r, acting termwise on f·Y^μ as
/// Σ_{i=0}^r binom(k-μ+r-1, i)·∂^{r-i}f·Y^{μ+i}. Requires k ≥ 2μ for every
/// Y-degree μ present; δ_k^0 is the identity.
///
/// k is an explicit argument rather than f's recorded weight: the operator
/// calculus deliberately applies δ with mismatched parameters, and series
/// coefficients carry no weight at all. Graded coefficients do enforce their
/// slice grading, so a mismatched k on a graded form is rejected.
pub fn maass_shimura<C: NhCoef>(f: &NHForm<C>, k: i64, r: u32) -> Result<NHForm<C>, Error> {
    if r == 0 {
        return Ok(f.clone());
    }
    let ctx = f.ctx;
    let mut out = NHForm::zero(ctx, k + 2 * r as i64, f.typ + r as i64);
    for (&mu, c_mu) in &f.coeffs {
        if k < 2 * mu as i64 {
            return Err(Error::Domain(format!(
                "Maass-Shimura needs k ≥ 2μ; got k = {k}, μ = {mu}"
            )));
        }
        for i in 0..=r {
            let b = binom_mod_p((k - mu as i64 + r as i64 - 1) as u64, i as u64, ctx.p);
            if b == 0 {
                continue;
            }
            let term = c_mu.hyper(r - i)?.scale(&RatF::from_int(ctx, b as i64));
            out.merge(mu + i, term)?;
        }
    }
    Ok(out)
}

/// g·E₂^j = g·(E - Y)^j as a nearly holomorphic form, for modular g.
fn layer_times_e2_pow(g: &GradedForm, j: u32) -> Result<NHForm<GradedForm>, Error> {
    let ctx = g.ctx();
    let mut coeffs = BTreeMap::new();
    for i in 0..=j {
        let b = binom_mod_p(j as u64, i as u64, ctx.p);
        if b == 0 {
            continue;
        }
        let sign: i64 = if i % 2 == 1 { -1 } else { 1 };
        let e_pow = GradedForm::monomial(ctx, (0, 0, j - i), RatF::one(ctx));
        let c = GradedForm::mul(g, &e_pow).scale(&RatF::from_int(ctx, sign * b as i64));
        if !GradedForm::is_zero(&c) {
            coeffs.insert(i, c);
        }
    }
    NHForm::new(ctx, g.weight() + 2 * j as i64, g.typ() + j as i64, coeffs)
}

/// Σ_j g_j·E₂^j from modular layers, the j-th of weight k-2j and type m-j.
/// The metadata of every layer (zero layers included) is checked against the
/// grading forced by layer 0.
pub fn from_modular_layers(layers: &[GradedForm]) -> Result<NHForm<GradedForm>, Error> {
    let first = layers
        .first()
        .ok_or_else(|| Error::Domain("no layers given".into()))?;
    let ctx = first.ctx();
    let (k, m) = (first.weight(), first.typ());
    let mut out = NHForm::zero(ctx, k, m);
    for (j, g) in layers.iter().enumerate() {
        let j = j as u32;
        if g.weight() != k - 2 * j as i64
            || g.typ() != reduce_type(ctx.q, m - j as i64)
            || !g.is_modular()
        {
            return Err(Error::Domain(format!(
                "layer {j} must be modular of weight {} type {}",
                k - 2 * j as i64,
                reduce_type(ctx.q, m - j as i64)
            )));
        }
        if !GradedForm::is_zero(g) {
            out = out.add(&layer_times_e2_pow(g, j)?)?;
        }
    }
    Ok(out)
}

/// Certify that g really is the modular form of weight k and type m it
/// claims to be: depth 0, matching metadata, and recognized by the
/// membership solver from its own u-expansion.
fn certify_modular(g: &GradedForm, k: i64, m: i64) -> Result<(), Error> {
    let ctx = g.ctx();
    let m = reduce_type(ctx.q, m);
    if g.is_zero() {
        return Ok(());
    }
    if g.weight() != k || g.typ() != m || !g.is_modular() {
        return Err(Error::Domain(format!(
            "layer of weight {} type {} depth {} is not modular of weight {k} type {m}",
            g.weight(),
            g.typ(),
            g.depth()
        )));
    }
    let dim = candidate_monomials(ctx.q, k, m, 0).len() as i64;
    let prec = (2 * dim + k.max(0) + 4).max((ctx.q * ctx.q) as i64);
    let table = crate::eisenstein::GeneratorTable::get(ctx, prec)?;
    let series = g.expand_at(&table, prec);
    match qm_membership(&series, k, m, 0)? {
        Membership::Member(h) if h == *g => Ok(()),
        _ => Err(Error::Domain(format!(
            "membership does not confirm the weight-{k} type-{m} layer"
        ))),
    }
}

/// Inverse of [`NHForm::iota`]: substitute E ↦ E₂ = E - Y. The input is
/// split by E-degree into Σ g_j·E^j; each g_j must certify as modular of
/// weight k-2j and type m-j.
pub fn inverse_iota(f: &GradedForm) -> Result<NHForm<GradedForm>, Error> {
    let ctx = f.ctx();
    let (k, m) = (f.weight(), f.typ());
    let mut slices: BTreeMap<u32, GradedForm> = BTreeMap::new();
    for ((a, b, c), coeff) in f.terms() {
        let slice = slices
            .entry(c)
            .or_insert_with(|| GradedForm::zero(ctx, k - 2 * c as i64, m - c as i64));
        *slice = slice.add(&GradedForm::monomial(ctx, (a, b, 0), coeff.clone()))?;
    }
    let mut out = NHForm::zero(ctx, k, m);
    for (j, g) in &slices {
        certify_modular(g, k - 2 * *j as i64, m - *j as i64)?;
        out = out.add(&layer_times_e2_pow(g, *j)?)?;
    }
    Ok(out)
}

/// Unique decomposition F = Σ_j g_j·E₂^j with modular g_j, returned in
/// ascending Y-degree (zero layers kept in place). Peels from the top: the
/// Y^r coefficient of F is (-1)^r·g_r; each peeled layer is certified via
/// membership before it is trusted. A failed layer means F is not a nearly
/// holomorphic modular form.
pub fn decompose(f: &NHForm<GradedForm>) -> Result<Vec<GradedForm>, Error> {
    let ctx = f.ctx;
    let (k, m) = (f.weight, f.typ);
    let r = f.depth();
    let mut rest = f.clone();
    let mut layers: Vec<GradedForm> = Vec::with_capacity(r as usize + 1);
    for j in (0..=r).rev() {
        let c = rest
            .coeffs
            .get(&j)
            .cloned()
            .unwrap_or_else(|| GradedForm::zero(ctx, k - 2 * j as i64, m - j as i64));
        let g = if j % 2 == 1 { c.neg() } else { c };
        certify_modular(&g, k - 2 * j as i64, m - j as i64)?;
        if !GradedForm::is_zero(&g) {
            rest = rest.sub(&layer_times_e2_pow(&g, j)?)?;
        }
        layers.push(g);
    }
    debug_assert!(rest.is_zero(), "peeling must exhaust the form");
    layers.reverse();
    Ok(layers)
}

/// Checks δ_k^r(F|γ) = (δ_k^r F)|γ as an identity of formal polynomials,
/// with the slash action encoded by the X substitution and the Hasse action
/// on X supplying all derivative terms. m only enters through validation
/// against f's recorded type; the formal identity itself is type-blind
/// because X carries no determinant factor.
pub fn formal_equivariance_check(
    f: &GradedForm,
    k: i64,
    m: i64,
    r: u32,
) -> Result<bool, Error> {
    equivariance_inner(f, k, m, r, false)
}

/// As [`formal_equivariance_check`] but with one binomial weight corrupted
/// on the slash-first side; a negative control for the checker. Expected to
/// return false whenever the corrupted term survives.
pub fn formal_equivariance_check_perturbed(
    f: &GradedForm,
    k: i64,
    m: i64,
    r: u32,
) -> Result<bool, Error> {
    equivariance_inner(f, k, m, r, true)
}

fn equivariance_inner(
    f: &GradedForm,
    k: i64,
    m: i64,
    r: u32,
    corrupt: bool,
) -> Result<bool, Error> {
    let ctx = f.ctx();
    let p = ctx.p as i64;
    if r as i64 > p * p + 1 {
        return Err(Error::Domain(format!(
            "equivariance check supports r ≤ p²+1 = {}; got r = {r}",
            p * p + 1
        )));
    }
    if f.typ() != reduce_type(ctx.q, m) {
        return Err(Error::Domain(format!(
            "form has type {}, expected type {}",
            f.typ(),
            reduce_type(ctx.q, m)
        )));
    }
    let poly = FormPoly::from_graded(f);
    let lhs = poly.slash_x().delta_with(k, r, corrupt)?;
    let rhs = poly.delta(k, r)?.slash_x();
    Ok(lhs.sub(&rhs).is_zero())
}

/// True iff Σ_{i=0}^r (-1)^{i-ℓ}·binom(k+r-1, i)·binom(k+r-1-i, r-j-i)·
/// binom(i, ℓ) = 0. This alternating triple-binomial sum is the kernel that
/// collapses the cross terms when δ_k^r is slashed; it vanishes identically
/// over the integers for k, r ≥ 1 and j + ℓ ≤ r - 1, hence in every
/// characteristic.
pub fn delta_slash_kernel_vanishes(k: u64, r: u64, j: u64, ell: u64) -> bool {
    let mut sum = BigInt::from(0);
    for i in 0..=r {
        let Some(rji) = r.checked_sub(j + i) else {
            break;
        };
        let t = BigInt::from(binom_big(k + r - 1, i))
            * BigInt::from(binom_big(k + r - 1 - i, rji))
            * BigInt::from(binom_big(i, ell));
        if (i + ell) % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
    }
    sum == BigInt::from(0)
}

/// True iff Σ_{j=1}^i (-1)^j·binom(r-(i-j), j)·binom(r, i-j) = -binom(r, i)
/// for 1 ≤ i ≤ r. This is the recursion that propagates the transformation
/// law down the Y-coefficients of a nearly holomorphic form; it too is an
/// exact integer identity.
pub fn y_transform_kernel_holds(r: u64, i: u64) -> bool {
    let mut sum = BigInt::from(0);
    for j in 1..=i {
        let t = BigInt::from(binom_big(r - (i - j), j)) * BigInt::from(binom_big(r, i - j));
        if j % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
    }
    sum == -BigInt::from(binom_big(r, i))
}
