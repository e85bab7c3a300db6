//! Quadratic extensions of the unramified completion and the extensions of
//! the digit Frobenius σ to them.
//!
//! Elements are pairs (a, b) = a + b·gen over unramified Puiseux windows,
//! with gen either an Artin-Schreier root 𝔠 of x² + x + B in even
//! characteristic or s = 1/√θ in odd characteristic. Each ψ variant extends
//! σ by a fixed convention on the generator and is dispatched as a trait
//! object so callers can select one by name at runtime; the identity map
//! ships alongside them as a negative control.

use dmf_algebra::field::FqmElem;
use dmf_algebra::{Error, FqCtx, FqElem, FqmCtx};

use crate::puiseux::{sigma, PuiseuxNum};

/// The generator adjoined to the unramified completion.
#[derive(Clone, Debug)]
pub enum QuadGen {
    /// 𝔠 with 𝔠² + 𝔠 + B = 0, even characteristic; B must have odd negative
    /// valuation so that val(𝔠) = val(B)/2 is not an integer.
    ArtinSchreier { b: PuiseuxNum },
    /// s with s² = 1/θ, odd characteristic.
    SqrtInvTheta,
}

/// Accepts B when the Newton polygon of x² + x + B forces a non-integral
/// root valuation: both roots then share valuation val(B)/2, so val(B) must
/// be odd and negative. B itself has to lie in K_∞ (base-field digits).
pub fn validate_artin_schreier_b(b: &PuiseuxNum) -> Result<(), Error> {
    let ctx = b.ctx();
    if ctx.base.p != 2 {
        return Err(Error::Domain("Artin-Schreier generators need even characteristic".into()));
    }
    if b.e() != 1 {
        return Err(Error::Domain("B must be an unramified expansion".into()));
    }
    if b.digits().any(|(_, c)| ctx.try_to_base(c).is_none()) {
        return Err(Error::Domain("B must have base-field digits".into()));
    }
    match b.val_scaled() {
        Some(v) if v < 0 && v % 2 != 0 => Ok(()),
        Some(v) => Err(Error::Domain(format!(
            "val(B) = {v} puts the root at an integer valuation; need odd negative val(B)"
        ))),
        None => Err(Error::Domain("B must be nonzero".into())),
    }
}

impl QuadGen {
    pub fn artin_schreier(b: PuiseuxNum) -> Result<QuadGen, Error> {
        validate_artin_schreier_b(&b)?;
        Ok(QuadGen::ArtinSchreier { b })
    }

    pub fn sqrt_inv_theta() -> QuadGen {
        QuadGen::SqrtInvTheta
    }

    fn matches(&self, other: &QuadGen) -> Result<bool, Error> {
        match (self, other) {
            (QuadGen::SqrtInvTheta, QuadGen::SqrtInvTheta) => Ok(true),
            (QuadGen::ArtinSchreier { b: x }, QuadGen::ArtinSchreier { b: y }) => x.agrees_with(y),
            _ => Ok(false),
        }
    }

    /// Twice the θ^{-1}-adic valuation of the generator (a half-integer).
    fn double_val(&self) -> i64 {
        match self {
            // val(𝔠) = val(B)/2, and val_scaled already is val(B) at e = 1.
            QuadGen::ArtinSchreier { b } => b.val_scaled().expect("validated nonzero"),
            // val(1/√θ) = 1/2.
            QuadGen::SqrtInvTheta => 1,
        }
    }
}

/// a + b·gen with unramified components over a shared coefficient field.
#[derive(Clone, Debug)]
pub struct QuadExtElem {
    a: PuiseuxNum,
    b: PuiseuxNum,
    gen: QuadGen,
}

impl QuadExtElem {
    pub fn new(a: PuiseuxNum, b: PuiseuxNum, gen: QuadGen) -> Result<QuadExtElem, Error> {
        if a.e() != 1 || b.e() != 1 {
            return Err(Error::Domain("components must be unramified expansions".into()));
        }
        if !std::ptr::eq(a.ctx(), b.ctx()) {
            return Err(Error::Domain("components over different coefficient fields".into()));
        }
        match &gen {
            QuadGen::ArtinSchreier { b: bb } => {
                validate_artin_schreier_b(bb)?;
                if !std::ptr::eq(bb.ctx(), a.ctx()) {
                    return Err(Error::Domain("B over a different coefficient field".into()));
                }
            }
            QuadGen::SqrtInvTheta => {
                if a.ctx().base.p == 2 {
                    return Err(Error::Domain(
                        "1/√θ is inseparable in even characteristic; use an Artin-Schreier generator"
                            .into(),
                    ));
                }
            }
        }
        Ok(QuadExtElem { a, b, gen })
    }

    pub fn scalar(x: PuiseuxNum, gen: QuadGen) -> Result<QuadExtElem, Error> {
        let zero = PuiseuxNum::zero(x.ctx(), 1)?;
        QuadExtElem::new(x, zero, gen)
    }

    pub fn a(&self) -> &PuiseuxNum {
        &self.a
    }

    pub fn b(&self) -> &PuiseuxNum {
        &self.b
    }

    pub fn gen(&self) -> &QuadGen {
        &self.gen
    }

    pub fn ctx(&self) -> &'static FqmCtx {
        self.a.ctx()
    }

    fn check_gen(&self, rhs: &QuadExtElem) -> Result<(), Error> {
        if self.gen.matches(&rhs.gen)? {
            Ok(())
        } else {
            Err(Error::Domain("mixed quadratic generators".into()))
        }
    }

    pub fn add(&self, rhs: &QuadExtElem) -> Result<QuadExtElem, Error> {
        self.check_gen(rhs)?;
        Ok(QuadExtElem {
            a: self.a.add(&rhs.a)?,
            b: self.b.add(&rhs.b)?,
            gen: self.gen.clone(),
        })
    }

    pub fn neg(&self) -> QuadExtElem {
        QuadExtElem { a: self.a.neg(), b: self.b.neg(), gen: self.gen.clone() }
    }

    pub fn sub(&self, rhs: &QuadExtElem) -> Result<QuadExtElem, Error> {
        self.add(&rhs.neg())
    }

    /// Multiplication through the defining relation: 𝔠² = 𝔠 + B in even
    /// characteristic (so the cross term picks up b₁b₂), s² = 1/θ otherwise.
    pub fn mul(&self, rhs: &QuadExtElem) -> Result<QuadExtElem, Error> {
        self.check_gen(rhs)?;
        let aa = self.a.mul(&rhs.a)?;
        let bb = self.b.mul(&rhs.b)?;
        let cross = self.a.mul(&rhs.b)?.add(&self.b.mul(&rhs.a)?)?;
        match &self.gen {
            QuadGen::ArtinSchreier { b } => Ok(QuadExtElem {
                a: aa.add(&bb.mul(b)?)?,
                b: cross.add(&bb)?,
                gen: self.gen.clone(),
            }),
            QuadGen::SqrtInvTheta => {
                let inv_theta = PuiseuxNum::monomial(self.ctx(), 1, 1, 1)?;
                Ok(QuadExtElem {
                    a: aa.add(&bb.mul(&inv_theta)?)?,
                    b: cross,
                    gen: self.gen.clone(),
                })
            }
        }
    }

    pub fn mul_scalar(&self, s: &PuiseuxNum) -> Result<QuadExtElem, Error> {
        Ok(QuadExtElem { a: self.a.mul(s)?, b: self.b.mul(s)?, gen: self.gen.clone() })
    }

    /// The Galois conjugate over the unramified completion (coefficients
    /// untouched): 𝔠 ↦ 𝔠 + 1, s ↦ -s.
    pub fn conj(&self) -> Result<QuadExtElem, Error> {
        match &self.gen {
            QuadGen::ArtinSchreier { .. } => Ok(QuadExtElem {
                a: self.a.add(&self.b)?,
                b: self.b.clone(),
                gen: self.gen.clone(),
            }),
            QuadGen::SqrtInvTheta => {
                Ok(QuadExtElem { a: self.a.clone(), b: self.b.neg(), gen: self.gen.clone() })
            }
        }
    }

    /// Norm to the unramified completion: x·conj(x), a scalar.
    pub fn norm(&self) -> Result<PuiseuxNum, Error> {
        let n = self.mul(&self.conj()?)?;
        debug_assert!(n.b.is_zero_window());
        Ok(n.a)
    }

    pub fn inv_to(&self, rel: i64) -> Result<QuadExtElem, Error> {
        let n = self.norm()?.inv_to(rel)?;
        self.conj()?.mul_scalar(&n)
    }

    pub fn is_zero_window(&self) -> bool {
        self.a.is_zero_window() && self.b.is_zero_window()
    }

    pub fn agrees_with(&self, rhs: &QuadExtElem) -> Result<bool, Error> {
        self.check_gen(rhs)?;
        Ok(self.a.agrees_with(&rhs.a)? && self.b.agrees_with(&rhs.b)?)
    }

    /// Valuation as (numerator, 2): the θ-valuation doubled, so the
    /// half-integer b-slot and the integer a-slot never collide.
    pub fn quad_val(&self) -> Option<(i64, i64)> {
        let va = self.a.val_scaled().map(|v| 2 * v);
        let vb = self.b.val_scaled().map(|v| 2 * v + self.gen.double_val());
        match (va, vb) {
            (None, None) => None,
            (Some(x), None) | (None, Some(x)) => Some((x, 2)),
            (Some(x), Some(y)) => Some((x.min(y), 2)),
        }
    }
}

/// An extension of the digit Frobenius σ to a quadratic completion, plus
/// the component criterion for its fixed field. Variants are dispatched
/// dynamically so verification suites and the command line can pick one by
/// name.
pub trait Psi: Send + Sync {
    fn name(&self) -> &'static str;
    /// Whether this variant acts on elements over the given generator.
    fn compatible(&self, gen: &QuadGen) -> bool;
    fn apply(&self, z: &QuadExtElem) -> Result<QuadExtElem, Error>;
    /// Decides z ∈ Fix(ψ) from the components alone, without applying ψ.
    fn fixed_field_test(&self, z: &QuadExtElem) -> Result<bool, Error>;
}

fn in_base_field(x: &PuiseuxNum) -> bool {
    let ctx = x.ctx();
    x.digits().all(|(_, c)| ctx.try_to_base(c).is_some())
}

fn check_compat(psi: &dyn Psi, z: &QuadExtElem) -> Result<(), Error> {
    if psi.compatible(z.gen()) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "ψ variant '{}' does not act on this quadratic extension",
            psi.name()
        )))
    }
}

/// Even characteristic: ψ(a + b𝔠) = σ(a) + σ(b)(𝔠 + 1). Carries the trace-1
/// element ε and the root α of x² + x + ε (also a root of x^q + x + 1) that
/// pin down the fixed field K_∞(α + 𝔠).
pub struct PsiEven {
    ctx: &'static FqmCtx,
    b: PuiseuxNum,
    epsilon: FqElem,
    alpha: FqmElem,
}

impl PsiEven {
    pub fn new(ctx: &'static FqmCtx, b: PuiseuxNum) -> Result<PsiEven, Error> {
        if ctx.base.p != 2 {
            return Err(Error::Domain("the even ψ variant needs characteristic 2".into()));
        }
        if ctx.m != 2 {
            return Err(Error::Domain(
                "the even ψ variant needs m = 2 so that α ∈ F_{q²} is available".into(),
            ));
        }
        validate_artin_schreier_b(&b)?;
        if !std::ptr::eq(b.ctx(), ctx) {
            return Err(Error::Domain("B over a different coefficient field".into()));
        }
        let epsilon = find_epsilon(ctx.base.q)?;
        let alpha = find_alpha(ctx.base.q, epsilon)?;
        Ok(PsiEven { ctx, b, epsilon, alpha })
    }

    pub fn epsilon(&self) -> FqElem {
        self.epsilon
    }

    pub fn alpha(&self) -> FqmElem {
        self.alpha
    }
}

impl Psi for PsiEven {
    fn name(&self) -> &'static str {
        "even"
    }

    fn compatible(&self, gen: &QuadGen) -> bool {
        matches!(gen, QuadGen::ArtinSchreier { b } if b.agrees_with(&self.b).unwrap_or(false))
    }

    fn apply(&self, z: &QuadExtElem) -> Result<QuadExtElem, Error> {
        check_compat(self, z)?;
        let sa = sigma(z.a())?;
        let sb = sigma(z.b())?;
        QuadExtElem::new(sa.add(&sb)?, sb, z.gen().clone())
    }

    fn fixed_field_test(&self, z: &QuadExtElem) -> Result<bool, Error> {
        check_compat(self, z)?;
        // Fixed field K_∞(α + 𝔠): b ∈ K_∞ and a - bα ∈ K_∞.
        let alpha = PuiseuxNum::constant(self.ctx, 1, self.alpha)?;
        Ok(in_base_field(z.b()) && in_base_field(&z.a().sub(&z.b().mul(&alpha)?)?))
    }
}

/// Odd characteristic, case I: ψ(a + b/√θ) = σ(a) - σ(b)/√θ, with fixed
/// field K_∞(ξ/√θ) for ξ a nonzero root of x^q + x.
pub struct PsiOddI {
    ctx: &'static FqmCtx,
    xi: FqmElem,
}

/// Odd characteristic, case II: ψ(a + b/√θ) = σ(a) + σ(b)/√θ, with fixed
/// field K_∞(1/√θ).
pub struct PsiOddII;

/// The smallest nonzero root of x^q + x in the coefficient field; it spans
/// the twist line ξ·K_∞ inside F_{q²}-digit expansions.
pub fn antifixed_root(ctx: &'static FqmCtx) -> Result<FqmElem, Error> {
    let q = ctx.base.q as u64;
    ctx.elements()
        .filter(|&w| w != 0)
        .find(|&w| ctx.pow(w, q) == ctx.neg(w))
        .ok_or_else(|| {
            Error::BadField("no nonzero root of x^q + x; use an even extension degree".into())
        })
}

impl PsiOddI {
    pub fn new(ctx: &'static FqmCtx) -> Result<PsiOddI, Error> {
        if ctx.base.p == 2 {
            return Err(Error::Domain("the odd ψ variants need odd characteristic".into()));
        }
        Ok(PsiOddI { ctx, xi: antifixed_root(ctx)? })
    }
}

impl Psi for PsiOddI {
    fn name(&self) -> &'static str {
        "odd-i"
    }

    fn compatible(&self, gen: &QuadGen) -> bool {
        matches!(gen, QuadGen::SqrtInvTheta)
    }

    fn apply(&self, z: &QuadExtElem) -> Result<QuadExtElem, Error> {
        check_compat(self, z)?;
        QuadExtElem::new(sigma(z.a())?, sigma(z.b())?.neg(), z.gen().clone())
    }

    fn fixed_field_test(&self, z: &QuadExtElem) -> Result<bool, Error> {
        check_compat(self, z)?;
        // Fixed field K_∞(ξ/√θ): a ∈ K_∞ and b ∈ ξ·K_∞.
        let xi_inv = self.ctx.inv(self.xi)?;
        Ok(in_base_field(z.a()) && in_base_field(&z.b().scale(xi_inv)))
    }
}

impl PsiOddII {
    pub fn new(ctx: &'static FqmCtx) -> Result<PsiOddII, Error> {
        if ctx.base.p == 2 {
            return Err(Error::Domain("the odd ψ variants need odd characteristic".into()));
        }
        Ok(PsiOddII)
    }
}

impl Psi for PsiOddII {
    fn name(&self) -> &'static str {
        "odd-ii"
    }

    fn compatible(&self, gen: &QuadGen) -> bool {
        matches!(gen, QuadGen::SqrtInvTheta)
    }

    fn apply(&self, z: &QuadExtElem) -> Result<QuadExtElem, Error> {
        check_compat(self, z)?;
        QuadExtElem::new(sigma(z.a())?, sigma(z.b())?, z.gen().clone())
    }

    fn fixed_field_test(&self, z: &QuadExtElem) -> Result<bool, Error> {
        check_compat(self, z)?;
        // Fixed field K_∞(1/√θ): both components in K_∞.
        Ok(in_base_field(z.a()) && in_base_field(z.b()))
    }
}

/// The identity map in ψ's clothing: a negative control whose "fixed field"
/// is everything.
pub struct IdentityPsi;

impl Psi for IdentityPsi {
    fn name(&self) -> &'static str {
        "identity"
    }

    fn compatible(&self, _gen: &QuadGen) -> bool {
        true
    }

    fn apply(&self, z: &QuadExtElem) -> Result<QuadExtElem, Error> {
        Ok(z.clone())
    }

    fn fixed_field_test(&self, _z: &QuadExtElem) -> Result<bool, Error> {
        Ok(true)
    }
}

/// A named ψ-variant constructor; `b` is consumed by the even variant and
/// must be `None` for the others.
pub struct PsiEntry {
    pub name: &'static str,
    pub build: fn(&'static FqmCtx, Option<PuiseuxNum>) -> Result<Box<dyn Psi>, Error>,
}

fn no_b(name: &str, b: &Option<PuiseuxNum>) -> Result<(), Error> {
    if b.is_some() {
        Err(Error::Domain(format!("ψ variant '{name}' takes no Artin-Schreier parameter")))
    } else {
        Ok(())
    }
}

/// All ψ variants by name, for runtime dispatch.
pub fn psi_registry() -> Vec<PsiEntry> {
    vec![
        PsiEntry {
            name: "even",
            build: |ctx, b| {
                let b = b.ok_or_else(|| {
                    Error::Domain("the even ψ variant needs the Artin-Schreier parameter B".into())
                })?;
                Ok(Box::new(PsiEven::new(ctx, b)?))
            },
        },
        PsiEntry {
            name: "odd-i",
            build: |ctx, b| {
                no_b("odd-i", &b)?;
                Ok(Box::new(PsiOddI::new(ctx)?))
            },
        },
        PsiEntry {
            name: "odd-ii",
            build: |ctx, b| {
                no_b("odd-ii", &b)?;
                Ok(Box::new(PsiOddII::new(ctx)?))
            },
        },
        PsiEntry {
            name: "identity",
            build: |_ctx, b| {
                no_b("identity", &b)?;
                Ok(Box::new(IdentityPsi))
            },
        },
    ]
}

/// ε ∈ F_{2ⁿ} with absolute trace 1, outside F_2 whenever n > 1. Existence
/// is a counting argument: the trace polynomial has degree 2^{n-1}.
pub fn find_epsilon(q: u32) -> Result<FqElem, Error> {
    let ctx = FqCtx::get(q)?;
    if ctx.p != 2 {
        return Err(Error::Domain("ε is only defined in even characteristic".into()));
    }
    let n = ctx.n;
    ctx.elements()
        .filter(|&c| c != 0 && (n == 1 || c != 1))
        .find(|&c| {
            let mut tr = 0;
            let mut cur = c;
            for _ in 0..n {
                tr = ctx.add(tr, cur);
                cur = ctx.mul(cur, cur);
            }
            tr == 1
        })
        .ok_or_else(|| Error::BadField(format!("no trace-1 element found in F_{q}")))
}

/// α ∈ F_{q²}\F_q with α² + α + ε = 0; then automatically α^q = α + 1, so α
/// is a root of x^q + x + 1.
pub fn find_alpha(q: u32, epsilon: FqElem) -> Result<FqmElem, Error> {
    let ctx = FqmCtx::get(q, 2)?;
    if ctx.base.p != 2 {
        return Err(Error::Domain("α is only defined in even characteristic".into()));
    }
    let eps = ctx.embed(epsilon);
    ctx.elements()
        .find(|&a| {
            ctx.add(ctx.add(ctx.mul(a, a), a), eps) == 0 && ctx.frob(a) == ctx.add(a, 1)
        })
        .ok_or_else(|| {
            Error::BadField(format!("x² + x + {epsilon} has no usable root in F_{{{q}²}}"))
        })
}

/// The algebraic core of evaluation at a CM point: for the stabilizer
/// ρ = [[Tr(z₀), -Nr(z₀)], [1, 0]] of z₀ one has det(ρ)·j(ρ; z₀)^{-2}
/// = Nr(z₀)/z₀² = ψ(z₀)/z₀, because ψ(z₀) is the conjugate root of the
/// minimal polynomial. `tr` and `nr` are that exact polynomial data; the
/// right side goes through ψ independently.
pub fn cm_evaluation_identity(
    psi: &dyn Psi,
    z0: &QuadExtElem,
    tr: &PuiseuxNum,
    nr: &PuiseuxNum,
    work: i64,
) -> Result<bool, Error> {
    if z0.b().is_zero_window() && in_base_field(z0.a()) {
        return Err(Error::Domain("z₀ lies in K_∞ and is not a CM model point".into()));
    }
    let gen = z0.gen().clone();
    let tr_s = QuadExtElem::scalar(tr.clone(), gen.clone())?;
    let nr_s = QuadExtElem::scalar(nr.clone(), gen)?;
    // z₀ must actually solve x² - Tr·x + Nr = 0.
    let min_poly = z0.mul(z0)?.sub(&tr_s.mul(z0)?)?.add(&nr_s)?;
    if !min_poly.is_zero_window() {
        return Err(Error::Domain("trace and norm do not annihilate the point".into()));
    }
    let lhs = nr_s.mul(&z0.mul(z0)?.inv_to(work)?)?;
    let rhs = psi.apply(z0)?.mul(&z0.inv_to(work)?)?;
    lhs.agrees_with(&rhs)
}
