//! Coefficient-ring abstraction for u-expansions.
//!
//! The series engine is generic over its scalars: expansions at the infinite
//! cusp live over K, level-θ expansions over K_θ. A witness element carries
//! the ring context, so constructors hang off `&self` rather than a type.

use crate::cyclo::CycloElem;
use crate::field::{FqCtx, FqElem};
use crate::ratf::RatF;
use crate::Error;

pub trait Scalar: Clone + PartialEq + std::fmt::Debug + Send + Sync {
    fn ctx(&self) -> &'static FqCtx;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn inv(&self) -> Result<Self, Error>;
    /// Embed an element of K into the ring.
    fn embed_ratf(&self, r: &RatF) -> Self;
    fn from_int_like(&self, n: i64) -> Self;
    fn scale_fq(&self, c: FqElem) -> Self;
    fn render_text(&self) -> String;

    fn scale_int_like(&self, n: i64) -> Self {
        self.mul(&self.from_int_like(n))
    }
}

impl Scalar for RatF {
    fn ctx(&self) -> &'static FqCtx {
        RatF::ctx(self)
    }

    fn zero_like(&self) -> Self {
        RatF::zero(RatF::ctx(self))
    }

    fn one_like(&self) -> Self {
        RatF::one(RatF::ctx(self))
    }

    fn is_zero(&self) -> bool {
        RatF::is_zero(self)
    }

    fn add(&self, rhs: &Self) -> Self {
        RatF::add(self, rhs)
    }

    fn sub(&self, rhs: &Self) -> Self {
        RatF::sub(self, rhs)
    }

    fn neg(&self) -> Self {
        RatF::neg(self)
    }

    fn mul(&self, rhs: &Self) -> Self {
        RatF::mul(self, rhs)
    }

    fn inv(&self) -> Result<Self, Error> {
        RatF::inv(self)
    }

    fn embed_ratf(&self, r: &RatF) -> Self {
        r.clone()
    }

    fn from_int_like(&self, n: i64) -> Self {
        RatF::from_int(RatF::ctx(self), n)
    }

    fn scale_fq(&self, c: FqElem) -> Self {
        RatF::scale_fq(self, c)
    }

    fn render_text(&self) -> String {
        self.render()
    }
}

impl Scalar for CycloElem {
    fn ctx(&self) -> &'static FqCtx {
        CycloElem::ctx(self)
    }

    fn zero_like(&self) -> Self {
        CycloElem::zero(CycloElem::ctx(self))
    }

    fn one_like(&self) -> Self {
        CycloElem::one(CycloElem::ctx(self))
    }

    fn is_zero(&self) -> bool {
        CycloElem::is_zero(self)
    }

    fn add(&self, rhs: &Self) -> Self {
        CycloElem::add(self, rhs)
    }

    fn sub(&self, rhs: &Self) -> Self {
        CycloElem::sub(self, rhs)
    }

    fn neg(&self) -> Self {
        CycloElem::neg(self)
    }

    fn mul(&self, rhs: &Self) -> Self {
        CycloElem::mul(self, rhs)
    }

    fn inv(&self) -> Result<Self, Error> {
        CycloElem::inv(self)
    }

    fn embed_ratf(&self, r: &RatF) -> Self {
        CycloElem::from_ratf(CycloElem::ctx(self), r.clone())
    }

    fn from_int_like(&self, n: i64) -> Self {
        CycloElem::from_ratf(CycloElem::ctx(self), RatF::from_int(CycloElem::ctx(self), n))
    }

    fn scale_fq(&self, c: FqElem) -> Self {
        CycloElem {
            comps: self.comps.iter().map(|a| a.scale_fq(c)).collect(),
        }
    }

    fn render_text(&self) -> String {
        // components on the power basis of λ, semicolon-joined
        let parts: Vec<String> = self.comps.iter().map(|c| c.render()).collect();
        if parts.len() == 1 {
            parts.into_iter().next().unwrap()
        } else {
            format!("λ[{}]", parts.join("; "))
        }
    }
}
