//! u-expansions of the level-1 generators: the false Eisenstein series E,
//! the normalized lattice Eisenstein series Ê_k, and the generator triple
//! g̃, Δ̃, h̃ together with the j-invariant.
//!
//! Everything is stored in π̃-normalized coordinates, so all coefficients lie
//! in K; the π̃-power divided out of each classical generator is recorded in
//! the normalization ledger.
//!
//! The pipeline: Ê_k = −ζ̃(k) − Σ_{a monic} 𝒢_k(u(az)) for k = m(q−1),
//! m ≤ q+1; the normalized lattice exponential is recovered by inverting
//! W/Exp(W) = 1 − Σ_m Ê_{m(q−1)} W^{m(q−1)}, whose W^{q^i}-coefficients ᾱ_i
//! feed the Carlitz functional equation Exp(θW) = θExp + g̃Exp^q + Δ̃Exp^{q²}.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use dmf_algebra::{goss_coeffs, monic_polys, zeta_norm, Error, FqCtx, Poly, RatF, ReversedCarlitz, USeries};
use rayon::prelude::*;

/// The four stored generators, by name.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Generator {
    E,
    G,
    Delta,
    H,
}

impl Generator {
    /// Weight of the generator as a (quasi-)modular form.
    pub fn weight(self, q: u32) -> i64 {
        match self {
            Generator::E => 2,
            Generator::G => (q - 1) as i64,
            Generator::Delta => (q * q - 1) as i64,
            Generator::H => (q + 1) as i64,
        }
    }

    /// Type (determinant character exponent) mod q-1.
    pub fn typ(self) -> i64 {
        match self {
            Generator::E | Generator::H => 1,
            Generator::G | Generator::Delta => 0,
        }
    }

    /// Power of π̃ divided out of the classical lattice function to make the
    /// stored u-expansion K-rational.
    pub fn pi_power(self, q: u32) -> i64 {
        self.weight(q)
    }
}

/// Memoized generator expansions at a fixed precision.
pub struct GeneratorTable {
    pub ctx: &'static FqCtx,
    pub prec: i64,
    pub e: USeries<RatF>,
    pub g: USeries<RatF>,
    pub delta: USeries<RatF>,
    pub h: USeries<RatF>,
}

impl GeneratorTable {
    /// Process-wide table for F_q, built once per q at the largest precision
    /// requested so far and reused (truncation is free for callers).
    pub fn get(ctx: &'static FqCtx, prec: i64) -> Result<Arc<GeneratorTable>, Error> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<GeneratorTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap();
        if let Some(t) = map.get(&ctx.q) {
            if t.prec >= prec {
                return Ok(t.clone());
            }
        }
        let built = Arc::new(GeneratorTable::build(ctx, prec)?);
        map.insert(ctx.q, built.clone());
        Ok(built)
    }

    pub fn series(&self, gen: Generator) -> &USeries<RatF> {
        match gen {
            Generator::E => &self.e,
            Generator::G => &self.g,
            Generator::Delta => &self.delta,
            Generator::H => &self.h,
        }
    }

    fn build(ctx: &'static FqCtx, prec_out: i64) -> Result<GeneratorTable, Error> {
        let q = ctx.q as i64;
        if prec_out < q * q {
            return Err(Error::Precision(format!(
                "generator pipeline needs prec ≥ q² = {}, got {prec_out}",
                q * q
            )));
        }
        // pad so the root extraction still delivers prec_out, then truncate
        // everything to a uniform window
        let prec = prec_out + q;
        let ks: Vec<usize> = (1..=(ctx.q as usize + 1)).map(|m| m * (ctx.q as usize - 1)).collect();
        let sums = monic_sums(ctx, prec, &ks, true)?;
        let e = sums.e.expect("requested E accumulator");

        // Ê_{m(q-1)} = -ζ̃ - Σ_a 𝒢(u(az))
        let ehat: Vec<USeries<RatF>> = ks
            .iter()
            .zip(sums.per_k)
            .map(|(&k, acc)| {
                let z = zeta_norm(ctx, k);
                acc.neg().sub(&USeries::monomial(&z, 0, prec))
            })
            .collect();

        // Exp(W) = W·Σ b_n W^{n(q-1)}: invert 1 - Σ_m Ê_{m(q-1)} Y^m.
        let n_top = ctx.q as usize + 1;
        let mut b: Vec<USeries<RatF>> = Vec::with_capacity(n_top + 1);
        b.push(USeries::one(&RatF::zero(ctx), prec));
        for n in 1..=n_top {
            let mut acc = USeries::zero_prec(&RatF::zero(ctx), prec);
            for m in 1..=n {
                acc = acc.add(&ehat[m - 1].mul(&b[n - m]).truncate_to(prec));
            }
            b.push(acc);
        }
        // The exponential is F_q-linear, so b_n = 0 unless n(q-1)+1 is a
        // power of q. For 2 ≤ n ≤ q this is a nontrivial consistency check
        // on the whole Eisenstein table.
        for (n, bn) in b.iter().enumerate().take(n_top).skip(2) {
            if !bn.is_zero() {
                return Err(Error::Domain(format!(
                    "lattice exponential has a stray W-coefficient at n = {n}; Eisenstein table is inconsistent"
                )));
            }
        }

        let theta = Poly::theta(ctx);
        let d1 = RatF::from_poly(theta.pow(ctx.q as u64).sub(&theta));
        let d2_factor = RatF::from_poly(theta.pow(ctx.q as u64 * ctx.q as u64).sub(&theta));
        let alpha1 = &b[1];
        let alpha2 = &b[n_top];
        let g = alpha1.scale(&d1);
        let delta = alpha2
            .scale(&d2_factor)
            .sub(&alpha1.pow(ctx.q as u64 + 1).scale(&d1).truncate_to(prec));

        if g.coeff(0) != RatF::one(ctx) {
            return Err(Error::Domain("g̃ does not have constant term 1".into()));
        }
        if delta.valuation() != Some(q - 1) || delta.coeff(q - 1) != RatF::from_int(ctx, -1) {
            return Err(Error::Domain("Δ̃ does not lead with -u^{q-1}".into()));
        }
        let h = delta.neg().nth_root(ctx.q - 1, &RatF::from_int(ctx, -1))?;
        if h.prec() < prec_out {
            return Err(Error::Precision(format!(
                "root extraction delivered precision {} < {prec_out}",
                h.prec()
            )));
        }

        Ok(GeneratorTable {
            ctx,
            prec: prec_out,
            e: e.truncate_to(prec_out),
            g: g.truncate_to(prec_out),
            delta: delta.truncate_to(prec_out),
            h: h.truncate_to(prec_out),
        })
    }

    /// j = g̃^{q+1}/Δ̃, a Laurent series of valuation -(q-1).
    pub fn j_invariant(&self) -> USeries<RatF> {
        self.g.pow(self.ctx.q as u64 + 1).mul(&self.delta.invert().expect("Δ̃ is nonzero"))
    }
}

/// g̃, with constant term 1; needs prec ≥ q² for the functional-equation
/// coefficient extraction.
pub fn generator_g(ctx: &'static FqCtx, prec: i64) -> Result<USeries<RatF>, Error> {
    generator(ctx, Generator::G, prec)
}

/// Δ̃, the cusp form with leading term -u^{q-1}.
pub fn generator_delta(ctx: &'static FqCtx, prec: i64) -> Result<USeries<RatF>, Error> {
    generator(ctx, Generator::Delta, prec)
}

/// h̃, the (q-1)-st root of -Δ̃ with leading term -u.
pub fn generator_h(ctx: &'static FqCtx, prec: i64) -> Result<USeries<RatF>, Error> {
    generator(ctx, Generator::H, prec)
}

fn generator(ctx: &'static FqCtx, gen: Generator, prec: i64) -> Result<USeries<RatF>, Error> {
    let q = ctx.q as i64;
    if prec < q * q {
        return Err(Error::Precision(format!(
            "generator extraction needs prec ≥ q² = {}, got {prec}",
            q * q
        )));
    }
    Ok(GeneratorTable::get(ctx, prec)?.series(gen).truncate_to(prec))
}

/// j = g̃^{q+1}/Δ̃ as a Laurent series.
pub fn j_invariant(ctx: &'static FqCtx, prec: i64) -> Result<USeries<RatF>, Error> {
    let q = ctx.q as i64;
    let table = GeneratorTable::get(ctx, (prec + 2 * (q - 1)).max(q * q))?;
    let j = table.j_invariant();
    Ok(if j.prec() > prec { j.truncate_to(prec) } else { j })
}

/// E = Σ_{a monic} a·u(az), the weight-2 type-1 quasi-modular generator.
pub fn false_eisenstein(ctx: &'static FqCtx, prec: i64) -> Result<USeries<RatF>, Error> {
    if prec < 1 {
        return Err(Error::Precision("E needs prec ≥ 1".into()));
    }
    let sums = monic_sums(ctx, prec, &[], true)?;
    Ok(sums.e.unwrap())
}

/// Normalized weight-k lattice Eisenstein series Ê_k, k ≡ 0 mod (q-1);
/// constant term -ζ̃(k).
pub fn eisenstein_norm(ctx: &'static FqCtx, k: usize, prec: i64) -> Result<USeries<RatF>, Error> {
    if k == 0 || k % (ctx.q as usize - 1).max(1) != 0 {
        return Err(Error::Domain(format!(
            "Ê_k vanishes identically unless (q-1) | k; got k = {k}"
        )));
    }
    if prec < 1 {
        return Err(Error::Precision("Ê needs prec ≥ 1".into()));
    }
    let sums = monic_sums(ctx, prec, &[k], false)?;
    let z = zeta_norm(ctx, k);
    Ok(sums.per_k[0].neg().sub(&USeries::monomial(&z, 0, prec)))
}

struct MonicSums {
    e: Option<USeries<RatF>>,
    per_k: Vec<USeries<RatF>>,
}

/// One pass over monic a, accumulating a·u(az) (for E) and 𝒢_k(u(az)) for
/// each requested k, sharing the power ladder u(az)^j between all targets.
fn monic_sums(ctx: &'static FqCtx, prec: i64, ks: &[usize], want_e: bool) -> Result<MonicSums, Error> {
    let zero = RatF::zero(ctx);
    let rows: Vec<Arc<Vec<RatF>>> = ks.iter().map(|&k| goss_coeffs(ctx, k)).collect();
    let kmax = ks.iter().copied().max().unwrap_or(0).max(if want_e { 1 } else { 0 });

    let width = prec.max(0) as usize;
    let fresh = || Accum {
        e: if want_e { Some(vec![zero.clone(); width]) } else { None },
        per_k: vec![vec![zero.clone(); width]; ks.len()],
    };

    let mut total = fresh();
    let mut d = 0u32;
    loop {
        let abs = (ctx.q as i64).checked_pow(d).filter(|&v| v < prec);
        let abs = match abs {
            Some(v) => v,
            None => break,
        };
        let polys = monic_polys(ctx, d as usize);
        let part = polys
            .par_iter()
            .try_fold(
                || fresh(),
                |mut acc, a| -> Result<Accum, Error> {
                    accumulate_one(ctx, a, abs, prec, &rows, ks, kmax, &mut acc)?;
                    Ok(acc)
                },
            )
            .try_reduce(|| fresh(), |a, b| Ok(a.merge(b)));
        total = total.merge(part?);
        d += 1;
    }

    let e = total.e.map(|v| USeries::from_coeffs(&zero, 0, v, prec));
    let per_k = total
        .per_k
        .into_iter()
        .map(|v| USeries::from_coeffs(&zero, 0, v, prec))
        .collect();
    Ok(MonicSums { e, per_k })
}

struct Accum {
    e: Option<Vec<RatF>>,
    per_k: Vec<Vec<RatF>>,
}

impl Accum {
    fn merge(mut self, other: Accum) -> Accum {
        if let (Some(dst), Some(src)) = (self.e.as_mut(), other.e.as_ref()) {
            for (d, s) in dst.iter_mut().zip(src) {
                if !s.is_zero() {
                    *d = d.add(s);
                }
            }
        }
        for (dst, src) in self.per_k.iter_mut().zip(&other.per_k) {
            for (d, s) in dst.iter_mut().zip(src) {
                if !s.is_zero() {
                    *d = d.add(s);
                }
            }
        }
        self
    }
}

fn accumulate_one(
    ctx: &'static FqCtx,
    a: &Poly,
    abs: i64,
    prec: i64,
    rows: &[Arc<Vec<RatF>>],
    ks: &[usize],
    kmax: usize,
    acc: &mut Accum,
) -> Result<(), Error> {
    let one = RatF::one(ctx);
    let rc = ReversedCarlitz::new(a)?;
    let terms: Vec<(usize, RatF)> = rc
        .terms
        .iter()
        .map(|(e, c)| (*e, RatF::from_poly(c.clone())))
        .collect();
    let jmax = (kmax as i64).min((prec - 1) / abs);
    let mut pow = USeries::monomial(&one, abs, prec).div_sparse_poly(&terms)?;
    let a_ratf = RatF::from_poly(a.clone());
    for j in 1..=jmax {
        if j == 1 {
            if let Some(e_acc) = acc.e.as_mut() {
                add_scaled(e_acc, &pow, &a_ratf);
            }
        }
        for (ki, &k) in ks.iter().enumerate() {
            if (j as usize) <= k {
                let gamma = &rows[ki][j as usize];
                if !gamma.is_zero() {
                    add_scaled(&mut acc.per_k[ki], &pow, gamma);
                }
            }
        }
        if j < jmax {
            pow = pow.shift(abs).truncate_to(prec).div_sparse_poly(&terms)?;
        }
    }
    Ok(())
}

fn add_scaled(dst: &mut [RatF], src: &USeries<RatF>, factor: &RatF) {
    for (e, c) in src.support() {
        let idx = e as usize;
        dst[idx] = dst[idx].add(&c.mul(factor));
    }
}
