//! Dense polynomials A = F_q[θ], the coefficient ring of everything here.
//!
//! Values are canonical (no trailing zero coefficients) and carry their field
//! context. The textual form is the interchange grammar used by the CLI:
//! terms `c*θ^e` joined by ` + ` in descending exponent order, where c is a
//! plain integer for prime q and an F_p-coordinate vector `[a0,a1,..]`
//! otherwise. The zero polynomial prints as `0`.

use std::fmt;

use crate::field::{FqCtx, FqElem};
use crate::Error;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    pub ctx: &'static FqCtx,
    coeffs: Vec<FqElem>,
}

impl Poly {
    pub fn zero(ctx: &'static FqCtx) -> Self {
        Poly { ctx, coeffs: Vec::new() }
    }

    pub fn one(ctx: &'static FqCtx) -> Self {
        Poly::constant(ctx, 1)
    }

    pub fn constant(ctx: &'static FqCtx, c: FqElem) -> Self {
        if c == 0 {
            Poly::zero(ctx)
        } else {
            Poly { ctx, coeffs: vec![c] }
        }
    }

    /// θ^e with coefficient c.
    pub fn term(ctx: &'static FqCtx, c: FqElem, e: usize) -> Self {
        if c == 0 {
            return Poly::zero(ctx);
        }
        let mut coeffs = vec![0; e + 1];
        coeffs[e] = c;
        Poly { ctx, coeffs }
    }

    pub fn theta(ctx: &'static FqCtx) -> Self {
        Poly::term(ctx, 1, 1)
    }

    pub fn from_coeffs(ctx: &'static FqCtx, coeffs: Vec<FqElem>) -> Self {
        let mut p = Poly { ctx, coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with deg 0 = -1 by convention here exposed as None.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> FqElem {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[FqElem] {
        &self.coeffs
    }

    pub fn leading(&self) -> FqElem {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 1
    }

    /// |a| = q^deg a; 0 for the zero polynomial by convention unused.
    pub fn abs_deg(&self) -> u64 {
        match self.degree() {
            None => 0,
            Some(d) => (self.ctx.q as u64).pow(d as u32),
        }
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let ctx = self.ctx;
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(ctx.add(self.coeff(i), rhs.coeff(i)));
        }
        Poly::from_coeffs(ctx, out)
    }

    pub fn neg(&self) -> Poly {
        let ctx = self.ctx;
        Poly {
            ctx,
            coeffs: self.coeffs.iter().map(|&c| ctx.neg(c)).collect(),
        }
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        let ctx = self.ctx;
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(ctx.sub(self.coeff(i), rhs.coeff(i)));
        }
        Poly::from_coeffs(ctx, out)
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero(self.ctx);
        }
        if self.ctx.q == 2 {
            return self.mul_f2(rhs);
        }
        let ctx = self.ctx;
        let mut out = vec![0 as FqElem; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                out[i + j] = ctx.add(out[i + j], ctx.mul(a, b));
            }
        }
        Poly::from_coeffs(ctx, out)
    }

    /// Carry-less word convolution over F_2; the coefficient vectors here
    /// grow to the full series precision, so the 64x packing matters.
    fn mul_f2(&self, rhs: &Poly) -> Poly {
        let nb = rhs.coeffs.len();
        let out_len = self.coeffs.len() + nb - 1;
        let words = nb / 64 + 1;
        let mut packed = vec![0u64; words];
        for (j, &b) in rhs.coeffs.iter().enumerate() {
            if b == 1 {
                packed[j / 64] |= 1 << (j % 64);
            }
        }
        let mut acc = vec![0u64; out_len / 64 + 2];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let (w, s) = (i / 64, (i % 64) as u32);
            for (t, &src) in packed.iter().enumerate() {
                acc[w + t] ^= src << s;
                if s > 0 {
                    acc[w + t + 1] ^= src >> (64 - s);
                }
            }
        }
        let coeffs = (0..out_len).map(|e| ((acc[e / 64] >> (e % 64)) & 1) as FqElem).collect();
        Poly::from_coeffs(self.ctx, coeffs)
    }

    pub fn scale(&self, c: FqElem) -> Poly {
        if c == 0 {
            return Poly::zero(self.ctx);
        }
        let ctx = self.ctx;
        Poly {
            ctx,
            coeffs: self.coeffs.iter().map(|&a| ctx.mul(a, c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u64) -> Poly {
        let mut base = self.clone();
        let mut out = Poly::one(self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// a(θ)^q = a(θ^q): spreads coefficient i to position q·i.
    pub fn frobenius(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let q = self.ctx.q as usize;
        let mut out = vec![0 as FqElem; (self.coeffs.len() - 1) * q + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i * q] = c;
        }
        Poly::from_coeffs(self.ctx, out)
    }

    /// Quotient and remainder; divisor must be nonzero.
    pub fn divrem(&self, d: &Poly) -> Result<(Poly, Poly), Error> {
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let ctx = self.ctx;
        let dd = d.degree().unwrap();
        let lead_inv = ctx.inv(d.leading())?;
        let mut rem = self.coeffs.clone();
        if rem.len() < dd + 1 {
            return Ok((Poly::zero(ctx), self.clone()));
        }
        let mut quo = vec![0 as FqElem; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = rem[i];
            if c == 0 {
                continue;
            }
            let f = ctx.mul(c, lead_inv);
            quo[i - dd] = f;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                let idx = i - dd + j;
                rem[idx] = ctx.sub(rem[idx], ctx.mul(f, dc));
            }
        }
        Ok((Poly::from_coeffs(ctx, quo), Poly::from_coeffs(ctx, rem)))
    }

    /// Monic gcd.
    pub fn gcd(&self, rhs: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = rhs.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).unwrap();
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            let li = a.ctx.inv(a.leading()).unwrap();
            a.scale(li)
        }
    }

    pub fn eval(&self, x: FqElem) -> FqElem {
        let ctx = self.ctx;
        let mut acc = 0 as FqElem;
        for &c in self.coeffs.iter().rev() {
            acc = ctx.add(ctx.mul(acc, x), c);
        }
        acc
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

fn render_coeff(ctx: &FqCtx, c: FqElem) -> String {
    if ctx.n == 1 {
        format!("{c}")
    } else {
        let v = ctx.to_vec(c);
        let parts: Vec<String> = v.iter().map(|d| d.to_string()).collect();
        format!("[{}]", parts.join(","))
    }
}

impl Poly {
    /// The interchange text form. Round-trips through `parse`.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut terms = Vec::new();
        for (e, &c) in self.coeffs.iter().enumerate().rev() {
            if c != 0 {
                terms.push(format!("{}*θ^{}", render_coeff(self.ctx, c), e));
            }
        }
        terms.join(" + ")
    }

    pub fn parse(ctx: &'static FqCtx, s: &str) -> Result<Poly, Error> {
        let s = s.trim();
        if s == "0" {
            return Ok(Poly::zero(ctx));
        }
        let mut acc = Poly::zero(ctx);
        for term in s.split('+') {
            let term = term.trim();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in '{s}'")));
            }
            let (cs, es) = match term.split_once('*') {
                Some((c, rest)) => {
                    let rest = rest.trim();
                    let exp = rest
                        .strip_prefix("θ^")
                        .or_else(|| rest.strip_prefix("t^"))
                        .ok_or_else(|| Error::Parse(format!("bad term '{term}'")))?;
                    (c.trim(), exp.trim())
                }
                None => return Err(Error::Parse(format!("term '{term}' lacks 'c*θ^e' shape"))),
            };
            let coeff = parse_coeff(ctx, cs)?;
            let exp: usize = es
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent '{es}'")))?;
            acc = acc.add(&Poly::term(ctx, coeff, exp));
        }
        Ok(acc)
    }
}

fn parse_coeff(ctx: &'static FqCtx, s: &str) -> Result<FqElem, Error> {
    if let Some(body) = s.strip_prefix('[') {
        let body = body
            .strip_suffix(']')
            .ok_or_else(|| Error::Parse(format!("unclosed vector '{s}'")))?;
        let digits: Result<Vec<u32>, _> = body.split(',').map(|d| d.trim().parse::<u32>()).collect();
        let digits = digits.map_err(|_| Error::Parse(format!("bad vector '{s}'")))?;
        ctx.from_vec(&digits)
    } else {
        let v: u32 = s
            .parse()
            .map_err(|_| Error::Parse(format!("bad coefficient '{s}'")))?;
        if ctx.n == 1 {
            if v >= ctx.p {
                return Err(Error::Parse(format!("coefficient {v} out of range for F_{}", ctx.q)));
            }
            Ok(v as FqElem)
        } else if v < ctx.p {
            Ok(v as FqElem)
        } else {
            Err(Error::Parse(format!(
                "scalar coefficient {v} needs vector form over F_{}",
                ctx.q
            )))
        }
    }
}

/// All monic polynomials of exact degree d, in deterministic order: the tail
/// coefficients (c_0, .., c_{d-1}) run through base-q counter order with c_0
/// as the least significant digit.
pub fn monic_polys(ctx: &'static FqCtx, d: usize) -> Vec<Poly> {
    let q = ctx.q as u64;
    let total = q.pow(d as u32);
    let mut out = Vec::with_capacity(total as usize);
    for code in 0..total {
        let mut coeffs = Vec::with_capacity(d + 1);
        let mut c = code;
        for _ in 0..d {
            coeffs.push((c % q) as FqElem);
            c /= q;
        }
        coeffs.push(1);
        out.push(Poly { ctx, coeffs });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> &'static FqCtx {
        FqCtx::get(3).unwrap()
    }

    #[test]
    fn f2_word_mul_matches_convolution() {
        let ctx = FqCtx::get(2).unwrap();
        // pseudo-random 0/1 vectors long enough to cross word boundaries
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for (la, lb) in [(1usize, 1usize), (63, 2), (64, 64), (130, 67), (200, 3)] {
            let a: Vec<FqElem> = (0..la).map(|_| (next() & 1) as FqElem).collect();
            let b: Vec<FqElem> = (0..lb).map(|_| (next() & 1) as FqElem).collect();
            let pa = Poly::from_coeffs(ctx, a.clone());
            let pb = Poly::from_coeffs(ctx, b.clone());
            let mut conv = vec![0u32; la + lb];
            for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    conv[i + j] ^= (x & y) as u32;
                }
            }
            let want = Poly::from_coeffs(ctx, conv.iter().map(|&c| c as FqElem).collect());
            assert_eq!(pa.mul(&pb), want, "lengths {la}x{lb}");
        }
    }

    #[test]
    fn ring_basics() {
        let ctx = f3();
        let a = Poly::parse(ctx, "1*θ^2 + 2*θ^0").unwrap();
        let b = Poly::parse(ctx, "2*θ^1 + 1*θ^0").unwrap();
        let ab = a.mul(&b);
        // (θ^2+2)(2θ+1) = 2θ^3 + θ^2 + 4θ + 2 = 2θ^3 + θ^2 + θ + 2 over F_3.
        assert_eq!(ab.render(), "2*θ^3 + 1*θ^2 + 1*θ^1 + 2*θ^0");
        let (qu, re) = ab.divrem(&b).unwrap();
        assert_eq!(qu, a);
        assert!(re.is_zero());
    }

    #[test]
    fn render_parse_round_trip() {
        let ctx = f3();
        let samples = ["0", "2*θ^0", "1*θ^3 + 2*θ^0", "2*θ^5 + 1*θ^4 + 2*θ^1"];
        for s in samples {
            let p = Poly::parse(ctx, s).unwrap();
            assert_eq!(p.render(), s);
            assert_eq!(Poly::parse(ctx, &p.render()).unwrap(), p);
        }
    }

    #[test]
    fn vector_coefficients_over_f4() {
        let ctx = FqCtx::get(4).unwrap();
        let p = Poly::term(ctx, 2, 3).add(&Poly::constant(ctx, 3));
        let s = p.render();
        assert_eq!(s, "[0,1]*θ^3 + [1,1]*θ^0");
        assert_eq!(Poly::parse(ctx, &s).unwrap(), p);
    }

    #[test]
    fn frobenius_spreads_exponents() {
        let ctx = f3();
        let a = Poly::parse(ctx, "1*θ^2 + 2*θ^1 + 1*θ^0").unwrap();
        let f = a.frobenius();
        assert_eq!(f, Poly::parse(ctx, "1*θ^6 + 2*θ^3 + 1*θ^0").unwrap());
        // And it agrees with the honest cube.
        assert_eq!(f, a.pow(3));
    }

    #[test]
    fn monic_enumeration_order_and_count() {
        let ctx = f3();
        let d1: Vec<String> = monic_polys(ctx, 1).iter().map(|p| p.render()).collect();
        assert_eq!(
            d1,
            vec!["1*θ^1", "1*θ^1 + 1*θ^0", "1*θ^1 + 2*θ^0"]
        );
        for d in 0..4 {
            assert_eq!(monic_polys(ctx, d).len(), 3usize.pow(d as u32));
            assert!(monic_polys(ctx, d).iter().all(|p| p.is_monic()));
        }
    }

    #[test]
    fn gcd_is_monic_and_divides() {
        let ctx = f3();
        let a = Poly::parse(ctx, "1*θ^1 + 1*θ^0").unwrap();
        let b = Poly::parse(ctx, "1*θ^1 + 2*θ^0").unwrap();
        let p1 = a.pow(2).mul(&b);
        let p2 = a.mul(&b.pow(2)).scale(2);
        let g = p1.gcd(&p2);
        assert_eq!(g, a.mul(&b));
        assert!(p1.divrem(&g).unwrap().1.is_zero());
        assert!(p2.divrem(&g).unwrap().1.is_zero());
    }
}
