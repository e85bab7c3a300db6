//! K = F_q(θ) as reduced fractions of `Poly`, denominator monic.
//!
//! Series coefficients in the pipelines below are usually integral, so every
//! operation keeps a fast path for denominator 1.

use std::fmt;

use crate::field::{FqCtx, FqElem};
use crate::poly::Poly;
use crate::Error;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatF {
    num: Poly,
    den: Poly, // monic; 1 whenever possible
}

impl RatF {
    pub fn from_poly(num: Poly) -> Self {
        let den = Poly::one(num.ctx);
        RatF { num, den }
    }

    pub fn zero(ctx: &'static FqCtx) -> Self {
        RatF::from_poly(Poly::zero(ctx))
    }

    pub fn one(ctx: &'static FqCtx) -> Self {
        RatF::from_poly(Poly::one(ctx))
    }

    pub fn constant(ctx: &'static FqCtx, c: FqElem) -> Self {
        RatF::from_poly(Poly::constant(ctx, c))
    }

    pub fn from_int(ctx: &'static FqCtx, r: i64) -> Self {
        RatF::constant(ctx, ctx.from_int(r))
    }

    /// num/den, reduced; den must be nonzero.
    pub fn new(num: Poly, den: Poly) -> Result<Self, Error> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut r = RatF { num, den };
        r.reduce();
        Ok(r)
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::one(self.den.ctx);
            return;
        }
        if !self.den.is_one() {
            let g = self.num.gcd(&self.den);
            if !g.is_one() {
                self.num = self.num.divrem(&g).unwrap().0;
                self.den = self.den.divrem(&g).unwrap().0;
            }
            // normalize denominator to monic
            let lead = self.den.leading();
            if lead != 1 {
                let li = self.den.ctx.inv(lead).unwrap();
                self.den = self.den.scale(li);
                self.num = self.num.scale(li);
            }
        }
    }

    pub fn ctx(&self) -> &'static FqCtx {
        self.num.ctx
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, rhs: &RatF) -> RatF {
        if self.den.is_one() && rhs.den.is_one() {
            return RatF::from_poly(self.num.add(&rhs.num));
        }
        if self.den == rhs.den {
            return RatF::new(self.num.add(&rhs.num), self.den.clone()).unwrap();
        }
        let num = self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den));
        let den = self.den.mul(&rhs.den);
        RatF::new(num, den).unwrap()
    }

    pub fn neg(&self) -> RatF {
        RatF { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, rhs: &RatF) -> RatF {
        if self.den.is_one() && rhs.den.is_one() {
            return RatF::from_poly(self.num.sub(&rhs.num));
        }
        if self.den == rhs.den {
            return RatF::new(self.num.sub(&rhs.num), self.den.clone()).unwrap();
        }
        let num = self.num.mul(&rhs.den).sub(&rhs.num.mul(&self.den));
        let den = self.den.mul(&rhs.den);
        RatF::new(num, den).unwrap()
    }

    pub fn mul(&self, rhs: &RatF) -> RatF {
        if self.is_zero() || rhs.is_zero() {
            return RatF::zero(self.ctx());
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatF::from_poly(self.num.mul(&rhs.num));
        }
        // cross-reduce before multiplying to keep degrees down
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let n1 = if g1.is_one() { self.num.clone() } else { self.num.divrem(&g1).unwrap().0 };
        let d2 = if g1.is_one() { rhs.den.clone() } else { rhs.den.divrem(&g1).unwrap().0 };
        let n2 = if g2.is_one() { rhs.num.clone() } else { rhs.num.divrem(&g2).unwrap().0 };
        let d1 = if g2.is_one() { self.den.clone() } else { self.den.divrem(&g2).unwrap().0 };
        let mut r = RatF { num: n1.mul(&n2), den: d1.mul(&d2) };
        let lead = r.den.leading();
        if lead != 1 {
            let li = r.den.ctx.inv(lead).unwrap();
            r.den = r.den.scale(li);
            r.num = r.num.scale(li);
        }
        r
    }

    pub fn inv(&self) -> Result<RatF, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatF::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, rhs: &RatF) -> Result<RatF, Error> {
        Ok(self.mul(&rhs.inv()?))
    }

    pub fn scale_int(&self, r: i64) -> RatF {
        self.mul(&RatF::from_int(self.ctx(), r))
    }

    pub fn scale_fq(&self, c: FqElem) -> RatF {
        if c == 0 {
            return RatF::zero(self.ctx());
        }
        RatF { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn pow(&self, e: u64) -> RatF {
        RatF::new(self.num.pow(e), self.den.pow(e)).unwrap()
    }

    /// Coefficient-spread Frobenius: f(θ)^q = f(θ^q).
    pub fn frobenius(&self) -> RatF {
        RatF { num: self.num.frobenius(), den: self.den.frobenius() }
    }

    /// The interchange text form: `num` if integral, else `(num)/(den)`.
    pub fn render(&self) -> String {
        if self.den.is_one() {
            self.num.render()
        } else {
            format!("({})/({})", self.num.render(), self.den.render())
        }
    }

    pub fn parse(ctx: &'static FqCtx, s: &str) -> Result<RatF, Error> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('(') {
            let (num_s, den_s) = rest
                .split_once(")/(")
                .ok_or_else(|| Error::Parse(format!("bad fraction '{s}'")))?;
            let den_s = den_s
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("bad fraction '{s}'")))?;
            let num = Poly::parse(ctx, num_s)?;
            let den = Poly::parse(ctx, den_s)?;
            RatF::new(num, den)
        } else {
            Ok(RatF::from_poly(Poly::parse(ctx, s)?))
        }
    }
}

impl fmt::Debug for RatF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> &'static FqCtx {
        FqCtx::get(3).unwrap()
    }

    #[test]
    fn reduction_is_canonical() {
        let ctx = f3();
        let t = Poly::theta(ctx);
        let a = RatF::new(t.pow(2).scale(2), t.clone().mul(&t.add(&Poly::one(ctx)))).unwrap();
        // 2θ^2 / (θ(θ+1)) reduces to 2θ/(θ+1).
        assert_eq!(a.render(), "(2*θ^1)/(1*θ^1 + 1*θ^0)");
        // equality by canonical form: a + (-a) = 0
        assert!(a.add(&a.neg()).is_zero());
    }

    #[test]
    fn field_ops_round_trip() {
        let ctx = f3();
        let a = RatF::parse(ctx, "(1*θ^2 + 2*θ^0)/(1*θ^1)").unwrap();
        let b = RatF::parse(ctx, "2*θ^3 + 1*θ^1").unwrap();
        assert_eq!(RatF::parse(ctx, &a.render()).unwrap(), a);
        assert_eq!(RatF::parse(ctx, &b.render()).unwrap(), b);
        let prod = a.mul(&b);
        assert_eq!(prod.div(&b).unwrap(), a);
        let s = a.add(&b);
        assert_eq!(s.sub(&b), a);
        assert_eq!(a.inv().unwrap().mul(&a), RatF::one(ctx));
    }

    #[test]
    fn denominators_stay_monic() {
        let ctx = f3();
        let a = RatF::new(Poly::one(ctx), Poly::theta(ctx).scale(2)).unwrap();
        assert!(a.den().is_monic());
        assert_eq!(a.render(), "(2*θ^0)/(1*θ^1)");
    }
}
