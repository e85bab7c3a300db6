//! The θ-cyclotomic field K_θ = K(λ) with λ^{q-1} = -θ, the function-field
//! analogue of adjoining a prime-torsion point: λ generates the θ-torsion of
//! the Carlitz module and K_θ/K is Galois of degree q-1.
//!
//! Elements are stored on the power basis 1, λ, .., λ^{q-2}. For q = 2 the
//! extension is trivial and λ = -θ = θ.

use crate::field::{FqCtx, FqElem};
use crate::poly::Poly;
use crate::ratf::RatF;
use crate::Error;

#[derive(Clone, PartialEq, Debug)]
pub struct CycloElem {
    /// Coefficients of 1, λ, .., λ^{q-2}; length exactly q-1.
    pub comps: Vec<RatF>,
}

impl CycloElem {
    fn dim(ctx: &'static FqCtx) -> usize {
        (ctx.q - 1) as usize
    }

    pub fn zero(ctx: &'static FqCtx) -> CycloElem {
        CycloElem { comps: vec![RatF::zero(ctx); Self::dim(ctx)] }
    }

    pub fn one(ctx: &'static FqCtx) -> CycloElem {
        let mut e = Self::zero(ctx);
        e.comps[0] = RatF::one(ctx);
        e
    }

    pub fn from_ratf(ctx: &'static FqCtx, r: RatF) -> CycloElem {
        let mut e = Self::zero(ctx);
        e.comps[0] = r;
        e
    }

    /// λ itself; for q = 2 this is the element θ (= -θ in characteristic 2).
    pub fn lambda(ctx: &'static FqCtx) -> CycloElem {
        let mut e = Self::zero(ctx);
        if ctx.q == 2 {
            e.comps[0] = RatF::from_poly(Poly::theta(ctx));
        } else {
            e.comps[1] = RatF::one(ctx);
        }
        e
    }

    pub fn ctx(&self) -> &'static FqCtx {
        self.comps[0].ctx()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Some(r) when the element lies in the base field K.
    pub fn as_ratf(&self) -> Option<RatF> {
        if self.comps[1..].iter().all(|c| c.is_zero()) {
            Some(self.comps[0].clone())
        } else {
            None
        }
    }

    pub fn add(&self, rhs: &CycloElem) -> CycloElem {
        CycloElem {
            comps: self
                .comps
                .iter()
                .zip(&rhs.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn neg(&self) -> CycloElem {
        CycloElem { comps: self.comps.iter().map(|a| a.neg()).collect() }
    }

    pub fn sub(&self, rhs: &CycloElem) -> CycloElem {
        CycloElem {
            comps: self
                .comps
                .iter()
                .zip(&rhs.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn mul(&self, rhs: &CycloElem) -> CycloElem {
        let ctx = self.ctx();
        let d = Self::dim(ctx);
        let mut raw = vec![RatF::zero(ctx); 2 * d - 1];
        for (i, a) in self.comps.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.comps.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                raw[i + j] = raw[i + j].add(&a.mul(b));
            }
        }
        // λ^{q-1} = -θ
        let neg_theta = RatF::from_poly(Poly::theta(ctx)).neg();
        let mut comps = raw[..d].to_vec();
        for (k, c) in raw[d..].iter().enumerate() {
            if !c.is_zero() {
                comps[k] = comps[k].add(&c.mul(&neg_theta));
            }
        }
        CycloElem { comps }
    }

    pub fn mul_ratf(&self, r: &RatF) -> CycloElem {
        CycloElem { comps: self.comps.iter().map(|a| a.mul(r)).collect() }
    }

    /// Multiplication by λ^j for j ≥ 0.
    pub fn mul_lambda_pow(&self, j: usize) -> CycloElem {
        let ctx = self.ctx();
        let d = Self::dim(ctx);
        let neg_theta = RatF::from_poly(Poly::theta(ctx)).neg();
        let mut out = self.clone();
        for _ in 0..j {
            // single shift by λ with fold-back
            let mut comps = vec![RatF::zero(ctx); d];
            for (i, a) in out.comps.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                if i + 1 < d {
                    comps[i + 1] = comps[i + 1].add(a);
                } else {
                    comps[0] = comps[0].add(&a.mul(&neg_theta));
                }
            }
            out = CycloElem { comps };
        }
        out
    }

    /// Galois twist λ ↦ ζλ for ζ ∈ F_q^×.
    pub fn twist(&self, zeta: FqElem) -> CycloElem {
        let ctx = self.ctx();
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(i, a)| a.scale_fq(ctx.pow(zeta, i as u64)))
            .collect();
        CycloElem { comps }
    }

    pub fn inv(&self) -> Result<CycloElem, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let ctx = self.ctx();
        let d = Self::dim(ctx);
        if d == 1 {
            return Ok(CycloElem { comps: vec![self.comps[0].inv()?] });
        }
        // Extended Euclid in K[x] against the modulus x^{q-1} + θ, which is
        // irreducible over K (Eisenstein at θ), so every nonzero residue is a unit.
        let mut modulus = vec![RatF::zero(ctx); d + 1];
        modulus[0] = RatF::from_poly(Poly::theta(ctx));
        modulus[d] = RatF::one(ctx);
        let (g, _, t) = kx_xgcd(&modulus, &self.comps);
        // g is a nonzero constant; inverse = t/g mod modulus.
        debug_assert_eq!(kx_deg(&g), Some(0));
        let ginv = g[0].inv()?;
        let mut comps: Vec<RatF> = t.iter().map(|c| c.mul(&ginv)).collect();
        comps.resize(d, RatF::zero(ctx));
        Ok(CycloElem { comps })
    }
}

// Minimal polynomial arithmetic over K for the xgcd above. Vectors are
// coefficient lists, not necessarily normalized.

fn kx_deg(a: &[RatF]) -> Option<usize> {
    a.iter().rposition(|c| !c.is_zero())
}

fn kx_divrem(a: &[RatF], b: &[RatF]) -> (Vec<RatF>, Vec<RatF>) {
    let ctx = a.first().or(b.first()).map(|c| c.ctx()).unwrap();
    let db = kx_deg(b).expect("division by zero polynomial");
    let mut rem = a.to_vec();
    let mut quo = vec![RatF::zero(ctx); a.len().saturating_sub(db).max(1)];
    let lead_inv = b[db].inv().unwrap();
    while let Some(dr) = kx_deg(&rem) {
        if dr < db {
            break;
        }
        let f = rem[dr].mul(&lead_inv);
        quo[dr - db] = quo[dr - db].add(&f);
        for i in 0..=db {
            if !b[i].is_zero() {
                rem[dr - db + i] = rem[dr - db + i].sub(&f.mul(&b[i]));
            }
        }
    }
    (quo, rem)
}

fn kx_mul(a: &[RatF], b: &[RatF]) -> Vec<RatF> {
    let ctx = a.first().or(b.first()).map(|c| c.ctx()).unwrap();
    let mut out = vec![RatF::zero(ctx); a.len() + b.len()];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
    }
    out
}

fn kx_sub(a: &[RatF], b: &[RatF]) -> Vec<RatF> {
    let ctx = a.first().or(b.first()).map(|c| c.ctx()).unwrap();
    let n = a.len().max(b.len());
    let z = RatF::zero(ctx);
    (0..n)
        .map(|i| a.get(i).unwrap_or(&z).sub(b.get(i).unwrap_or(&z)))
        .collect()
}

/// Returns (g, s, t) with s·a + t·b = g = gcd(a, b).
fn kx_xgcd(a: &[RatF], b: &[RatF]) -> (Vec<RatF>, Vec<RatF>, Vec<RatF>) {
    let ctx = a.first().or(b.first()).map(|c| c.ctx()).unwrap();
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    let (mut s0, mut s1) = (vec![RatF::one(ctx)], vec![RatF::zero(ctx)]);
    let (mut t0, mut t1) = (vec![RatF::zero(ctx)], vec![RatF::one(ctx)]);
    while kx_deg(&r1).is_some() {
        let (q, r) = kx_divrem(&r0, &r1);
        let s = kx_sub(&s0, &kx_mul(&q, &s1));
        let t = kx_sub(&t0, &kx_mul(&q, &t1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
        t0 = std::mem::replace(&mut t1, t);
    }
    (r0, s0, t0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_power_relation() {
        for q in [3u32, 4, 5] {
            let ctx = FqCtx::get(q).unwrap();
            let l = CycloElem::lambda(ctx);
            let mut p = CycloElem::one(ctx);
            for _ in 0..q - 1 {
                p = p.mul(&l);
            }
            let want = CycloElem::from_ratf(ctx, RatF::from_poly(Poly::theta(ctx)).neg());
            assert_eq!(p, want, "λ^(q-1) = -θ for q={q}");
        }
    }

    #[test]
    fn q2_lambda_is_theta() {
        let ctx = FqCtx::get(2).unwrap();
        let l = CycloElem::lambda(ctx);
        assert_eq!(l.as_ratf().unwrap(), RatF::from_poly(Poly::theta(ctx)));
    }

    #[test]
    fn field_inverse_round_trip() {
        for q in [2u32, 3, 5] {
            let ctx = FqCtx::get(q).unwrap();
            let theta = RatF::from_poly(Poly::theta(ctx));
            // x = λ + θ, and a denser pick
            let mut x = CycloElem::lambda(ctx);
            x.comps[0] = theta.clone();
            let xi = x.inv().unwrap();
            assert_eq!(x.mul(&xi), CycloElem::one(ctx));
            let mut y = CycloElem::lambda(ctx).mul_lambda_pow((q - 2) as usize);
            y.comps[0] = theta.inv().unwrap().neg();
            let yi = y.inv().unwrap();
            assert_eq!(y.mul(&yi), CycloElem::one(ctx));
        }
    }

    #[test]
    fn mul_lambda_pow_matches_repeated_mul() {
        let ctx = FqCtx::get(5).unwrap();
        let mut x = CycloElem::lambda(ctx);
        x.comps[0] = RatF::one(ctx);
        x.comps[3] = RatF::from_poly(Poly::theta(ctx));
        let l = CycloElem::lambda(ctx);
        let mut by_mul = x.clone();
        for j in 0..=9usize {
            assert_eq!(x.mul_lambda_pow(j), by_mul, "λ^{j}");
            by_mul = by_mul.mul(&l);
        }
    }

    #[test]
    fn twist_is_multiplicative_on_lambda() {
        let ctx = FqCtx::get(5).unwrap();
        // ζ = 2 generates F_5^×
        let zeta = ctx.from_int(2);
        let l = CycloElem::lambda(ctx);
        let tl = l.twist(zeta);
        assert_eq!(tl, l.mul_ratf(&RatF::constant(ctx, zeta)));
        // twist respects products
        let a = l.add(&CycloElem::one(ctx));
        let b = l.mul(&l).add(&CycloElem::from_ratf(ctx, RatF::from_poly(Poly::theta(ctx))));
        assert_eq!(a.mul(&b).twist(zeta), a.twist(zeta).mul(&b.twist(zeta)));
    }
}
