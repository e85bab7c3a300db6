//! The Carlitz module: twisted polynomials C_a, their reversed companions
//! 𝔠_a, the factorials D_i and the coefficients of the Carlitz exponential.
//!
//! C_θ = θ + τ with τ the q-power Frobenius; C_a for general a ∈ A is built
//! from F_q-linearity and composition. All values are exact over A.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::field::FqCtx;
use crate::poly::Poly;
use crate::ratf::RatF;
use crate::Error;

/// C_a as a twisted polynomial Σ c_i τ^i, stored by its coefficient list.
/// As an F_q-linear polynomial this is C_a(X) = Σ c_i X^{q^i}.
#[derive(Clone, PartialEq, Debug)]
pub struct CarlitzPoly {
    pub a: Poly,
    /// c_0 .. c_{deg a}; c_0 = a, c_{deg a} = leading coefficient of a.
    pub coeffs: Vec<Poly>,
}

impl CarlitzPoly {
    pub fn new(a: &Poly) -> Result<CarlitzPoly, Error> {
        if a.is_zero() {
            return Err(Error::Domain("Carlitz polynomial of 0 is not used here".into()));
        }
        let ctx = a.ctx;
        // Powers C_{θ^j} by composition with C_θ: coefficient recursion
        // new_i = θ·l_i + l_{i-1}^q.
        let d = a.degree().unwrap();
        let mut pow: Vec<Vec<Poly>> = Vec::with_capacity(d + 1);
        pow.push(vec![Poly::one(ctx)]);
        let theta = Poly::theta(ctx);
        for j in 1..=d {
            let prev = &pow[j - 1];
            let mut next = Vec::with_capacity(j + 1);
            for i in 0..=j {
                let mut c = Poly::zero(ctx);
                if i < prev.len() {
                    c = c.add(&theta.mul(&prev[i]));
                }
                if i >= 1 {
                    c = c.add(&prev[i - 1].frobenius());
                }
                next.push(c);
            }
            pow.push(next);
        }
        let mut coeffs = vec![Poly::zero(ctx); d + 1];
        for (j, &aj) in a.coeffs().iter().enumerate() {
            if aj == 0 {
                continue;
            }
            for (i, c) in pow[j].iter().enumerate() {
                coeffs[i] = coeffs[i].add(&c.scale(aj));
            }
        }
        Ok(CarlitzPoly { a: a.clone(), coeffs })
    }

    /// Composition C_a ∘ C_b (equals C_{ab} by commutativity of the action).
    pub fn compose(&self, rhs: &CarlitzPoly) -> CarlitzPoly {
        let ctx = self.a.ctx;
        let mut coeffs = vec![Poly::zero(ctx); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, ci) in self.coeffs.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            // c_i τ^i ∘ Σ d_j τ^j = Σ c_i d_j^{q^i} τ^{i+j}
            for (j, dj) in rhs.coeffs.iter().enumerate() {
                if dj.is_zero() {
                    continue;
                }
                let mut t = dj.clone();
                for _ in 0..i {
                    t = t.frobenius();
                }
                coeffs[i + j] = coeffs[i + j].add(&ci.mul(&t));
            }
        }
        CarlitzPoly { a: self.a.mul(&rhs.a), coeffs }
    }

    pub fn add(&self, rhs: &CarlitzPoly) -> CarlitzPoly {
        let ctx = self.a.ctx;
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        let z = Poly::zero(ctx);
        for i in 0..n {
            let x = self.coeffs.get(i).unwrap_or(&z);
            let y = rhs.coeffs.get(i).unwrap_or(&z);
            coeffs.push(x.add(y));
        }
        while coeffs.last().map(|c| c.is_zero()) == Some(true) {
            coeffs.pop();
        }
        CarlitzPoly { a: self.a.add(&rhs.a), coeffs }
    }

    /// Evaluation at a plain polynomial argument: Σ c_i x^{q^i}.
    pub fn eval_poly(&self, x: &Poly) -> Poly {
        let ctx = self.a.ctx;
        let mut acc = Poly::zero(ctx);
        let mut xq = x.clone();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                xq = xq.pow(ctx.q as u64);
            }
            if !c.is_zero() {
                acc = acc.add(&c.mul(&xq));
            }
        }
        acc
    }
}

/// Reversed Carlitz polynomial 𝔠_a(X) = X^{|a|} C_a(1/X) = Σ c_i X^{|a|-q^i},
/// an ordinary polynomial of degree |a|-1 whose constant term is the leading
/// coefficient of a (so 1 for monic a).
#[derive(Clone, Debug)]
pub struct ReversedCarlitz {
    pub a: Poly,
    /// (exponent, coefficient), ascending exponents; first entry exponent 0.
    pub terms: Vec<(usize, Poly)>,
}

impl ReversedCarlitz {
    pub fn new(a: &Poly) -> Result<ReversedCarlitz, Error> {
        let c = CarlitzPoly::new(a)?;
        let abs = a.abs_deg() as usize;
        let mut terms: Vec<(usize, Poly)> = c
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, p)| (abs - (a.ctx.q as usize).pow(i as u32), p.clone()))
            .collect();
        terms.sort_by_key(|t| t.0);
        Ok(ReversedCarlitz { a: a.clone(), terms })
    }

    /// Dense coefficient vector in X, length |a|.
    pub fn to_dense(&self) -> Vec<Poly> {
        let abs = self.a.abs_deg() as usize;
        let mut out = vec![Poly::zero(self.a.ctx); abs];
        for (e, c) in &self.terms {
            out[*e] = out[*e].add(c);
        }
        out
    }
}

/// D_i, the Carlitz factorials: D_0 = 1, D_i = (θ^{q^i} - θ) D_{i-1}^q.
/// Process-global memo per q, grown on demand.
pub fn carlitz_d(ctx: &'static FqCtx, i: usize) -> Poly {
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<Poly>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    let list = map.entry(ctx.q).or_insert_with(|| vec![Poly::one(ctx)]);
    while list.len() <= i {
        let n = list.len();
        let prev = list[n - 1].frobenius(); // D^q: coefficients in F_q are Frobenius-fixed
        let theta = Poly::theta(ctx);
        let factor = theta.pow((ctx.q as u64).pow(n as u32)).sub(&theta);
        list.push(factor.mul(&prev));
    }
    list[i].clone()
}

/// Coefficients of the Carlitz exponential: e_C(X) = Σ X^{q^i}/D_i, returned
/// as the list 1/D_0 .. 1/D_imax.
pub fn carlitz_exp_coeffs(ctx: &'static FqCtx, imax: usize) -> Vec<RatF> {
    (0..=imax)
        .map(|i| RatF::new(Poly::one(ctx), carlitz_d(ctx, i)).unwrap())
        .collect()
}

/// Normalized zeta value ζ̃(k) = [X^{k-1}] (1/e_C(X) - 1/X), an element of K.
/// Vanishes unless (q-1) | k. Memoized per q up to the largest k seen.
pub fn zeta_norm(ctx: &'static FqCtx, k: usize) -> RatF {
    assert!(k >= 1, "zeta_norm needs k >= 1");
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<RatF>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    let list = map.entry(ctx.q).or_insert_with(Vec::new);
    if list.len() <= k {
        *list = zeta_row(ctx, k.max(2 * list.len()));
    }
    list[k].clone()
}

/// b_0..b_kmax with Σ b_n X^n = (X/e_C(X))^{-1}... precisely: write
/// e_C(X) = X·w(X); then 1/e_C - 1/X = (w^{-1} - 1)/X and ζ̃(k) = [X^k] w^{-1}.
fn zeta_row(ctx: &'static FqCtx, kmax: usize) -> Vec<RatF> {
    let q = ctx.q as usize;
    // w = 1 + Σ_{i≥1} X^{q^i - 1}/D_i; sparse support.
    let mut sparse: Vec<(usize, RatF)> = Vec::new();
    let mut e = q;
    let mut i = 1usize;
    while e - 1 <= kmax {
        sparse.push((e - 1, RatF::new(Poly::one(ctx), carlitz_d(ctx, i)).unwrap()));
        match e.checked_mul(q) {
            Some(next) => e = next,
            None => break,
        }
        i += 1;
    }
    let mut b = vec![RatF::zero(ctx); kmax + 1];
    b[0] = RatF::one(ctx);
    for n in 1..=kmax {
        let mut acc = RatF::zero(ctx);
        for (off, c) in &sparse {
            if *off <= n && !b[n - off].is_zero() {
                acc = acc.add(&c.mul(&b[n - off]));
            }
        }
        b[n] = acc.neg();
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> &'static FqCtx {
        FqCtx::get(3).unwrap()
    }

    #[test]
    fn carlitz_theta_and_theta_squared() {
        let ctx = f3();
        let c1 = CarlitzPoly::new(&Poly::theta(ctx)).unwrap();
        assert_eq!(c1.coeffs.len(), 2);
        assert_eq!(c1.coeffs[0], Poly::theta(ctx));
        assert_eq!(c1.coeffs[1], Poly::one(ctx));
        // C_{θ^2} = C_θ ∘ C_θ: coefficients (θ^2, θ^q + θ, 1).
        let c2 = CarlitzPoly::new(&Poly::theta(ctx).pow(2)).unwrap();
        assert_eq!(c2.coeffs[0], Poly::theta(ctx).pow(2));
        assert_eq!(c2.coeffs[1], Poly::theta(ctx).pow(3).add(&Poly::theta(ctx)));
        assert_eq!(c2.coeffs[2], Poly::one(ctx));
        assert_eq!(c1.compose(&c1).coeffs, c2.coeffs);
    }

    #[test]
    fn carlitz_additive_and_multiplicative_sampled() {
        let ctx = f3();
        let polys: Vec<Poly> = [
            "1*θ^1",
            "1*θ^1 + 2*θ^0",
            "1*θ^2 + 1*θ^0",
            "2*θ^2 + 1*θ^1",
            "1*θ^3 + 2*θ^1 + 1*θ^0",
        ]
        .iter()
        .map(|s| Poly::parse(ctx, s).unwrap())
        .collect();
        for a in &polys {
            for b in &polys {
                let sum = a.add(b);
                if !sum.is_zero() {
                    let ca = CarlitzPoly::new(a).unwrap();
                    let cb = CarlitzPoly::new(b).unwrap();
                    assert_eq!(ca.add(&cb).coeffs, CarlitzPoly::new(&sum).unwrap().coeffs);
                    assert_eq!(
                        ca.compose(&cb).coeffs,
                        CarlitzPoly::new(&a.mul(b)).unwrap().coeffs
                    );
                }
            }
        }
    }

    #[test]
    fn reversed_carlitz_theta_example() {
        let ctx = f3();
        let r = ReversedCarlitz::new(&Poly::theta(ctx)).unwrap();
        // 𝔠_θ(X) = 1 + θ X^{q-1}
        assert_eq!(r.terms.len(), 2);
        assert_eq!(r.terms[0], (0, Poly::one(ctx)));
        assert_eq!(r.terms[1], (2, Poly::theta(ctx)));
    }

    #[test]
    fn reversed_carlitz_constant_term_is_leading_coeff() {
        let ctx = f3();
        for d in 1..=2 {
            for a in crate::poly::monic_polys(ctx, d) {
                let r = ReversedCarlitz::new(&a).unwrap();
                assert_eq!(r.terms[0], (0, Poly::one(ctx)));
                let dense = r.to_dense();
                assert_eq!(dense.len(), a.abs_deg() as usize);
                assert_eq!(dense[a.abs_deg() as usize - 1], a);
            }
        }
    }

    #[test]
    fn d_recursion_and_functional_equation() {
        let ctx = f3();
        let theta = Poly::theta(ctx);
        let d1 = carlitz_d(ctx, 1);
        assert_eq!(d1, theta.pow(3).sub(&theta));
        let d2 = carlitz_d(ctx, 2);
        assert_eq!(d2, theta.pow(9).sub(&theta).mul(&d1.frobenius()));
        // θ^{q^i}/D_i = θ/D_i + (1/D_{i-1})^q, the e_C(θX) = C_θ(e_C(X)) law.
        for i in 1..=4usize {
            let di = RatF::new(Poly::one(ctx), carlitz_d(ctx, i)).unwrap();
            let dprev = RatF::new(Poly::one(ctx), carlitz_d(ctx, i - 1)).unwrap();
            let tq = RatF::from_poly(theta.pow(3u64.pow(i as u32)));
            let t = RatF::from_poly(theta.clone());
            assert_eq!(tq.mul(&di), t.mul(&di).add(&dprev.frobenius()));
        }
    }

    #[test]
    fn zeta_vanishes_off_multiples_and_first_value() {
        let ctx = f3();
        for k in 1..=13usize {
            let z = zeta_norm(ctx, k);
            if k % 2 == 0 {
                if k == 2 {
                    // ζ̃(q-1) = -1/D_1
                    let want = RatF::new(Poly::one(ctx), carlitz_d(ctx, 1)).unwrap().neg();
                    assert_eq!(z, want);
                }
            } else {
                assert!(z.is_zero(), "ζ̃({k}) should vanish for q=3");
            }
        }
        // stability under recomputation at doubled window
        let z8 = zeta_norm(ctx, 8);
        let row = zeta_row(ctx, 40);
        assert_eq!(row[8], z8);
    }

    #[test]
    fn zeta_q2_small_values() {
        let ctx = FqCtx::get(2).unwrap();
        let theta = Poly::theta(ctx);
        // q = 2: every k qualifies; ζ̃(1) = 1/(θ^2+θ) = -1/D_1.
        let z1 = zeta_norm(ctx, 1);
        assert_eq!(z1, RatF::new(Poly::one(ctx), theta.pow(2).add(&theta)).unwrap());
    }
}
