//! The formal slash model: polynomials in the generators g, h, E together
//! with the cocycle variable X, the nearly holomorphic variable Y, and a
//! second cocycle variable X′ reserved for composition checks.
//!
//! Slashing by a group element substitutes E ↦ E−X and Y ↦ Y−X, with all
//! modular coefficients invariant; a form is (nearly holomorphic) modular
//! exactly when its slash is X-free. X carries the Hasse action
//! ∂ⁿ(X^m) = (−1)ⁿ·binom(m+n−1, n)·X^{m+n}; Y carries none (the analytic
//! Y is built from ψ(z), which has no z-derivative), and this asymmetry is
//! what the formal covariance checks exercise.
//!
//! The ring is deliberately ungraded scratch space; weight and type
//! discipline is enforced at the GradedForm boundary.

use std::collections::{BTreeMap, HashMap};

use dmf_algebra::binom::binom_mod_p;
use dmf_algebra::{Error, FqCtx, RatF, USeries};

use crate::graded::{atom_hyper, GradedForm};
use crate::eisenstein::Generator;

/// Formal variables, in exponent-vector order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Var {
    G = 0,
    H = 1,
    E = 2,
    X = 3,
    Y = 4,
    X2 = 5,
}

type Exps = [u32; 6];

#[derive(Clone, PartialEq)]
pub struct FormPoly {
    ctx: &'static FqCtx,
    terms: BTreeMap<Exps, RatF>,
}

impl std::fmt::Debug for FormPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl FormPoly {
    pub fn zero(ctx: &'static FqCtx) -> FormPoly {
        FormPoly { ctx, terms: BTreeMap::new() }
    }

    pub fn constant(ctx: &'static FqCtx, c: RatF) -> FormPoly {
        FormPoly::monomial(ctx, [0; 6], c)
    }

    pub fn monomial(ctx: &'static FqCtx, exps: Exps, coeff: RatF) -> FormPoly {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exps, coeff);
        }
        FormPoly { ctx, terms }
    }

    pub fn var(ctx: &'static FqCtx, v: Var) -> FormPoly {
        let mut exps = [0; 6];
        exps[v as usize] = 1;
        FormPoly::monomial(ctx, exps, RatF::one(ctx))
    }

    pub fn from_graded(f: &GradedForm) -> FormPoly {
        let ctx = f.ctx();
        let mut out = FormPoly::zero(ctx);
        for ((a, b, c), coeff) in f.terms() {
            out.add_term([a, b, c, 0, 0, 0], coeff.clone());
        }
        out
    }

    pub fn ctx(&self) -> &'static FqCtx {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exps, &RatF)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn coeff(&self, exps: Exps) -> RatF {
        self.terms.get(&exps).cloned().unwrap_or_else(|| RatF::zero(self.ctx))
    }

    pub fn degree_of(&self, v: Var) -> u32 {
        self.terms.keys().map(|e| e[v as usize]).max().unwrap_or(0)
    }

    fn add_term(&mut self, exps: Exps, coeff: RatF) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(|| RatF::zero(self.ctx));
        *entry = entry.add(&coeff);
        if entry.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn add(&self, rhs: &FormPoly) -> FormPoly {
        let mut out = self.clone();
        for (&e, c) in &rhs.terms {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> FormPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, rhs: &FormPoly) -> FormPoly {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, c: &RatF) -> FormPoly {
        if c.is_zero() {
            return FormPoly::zero(self.ctx);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.mul(c);
        }
        out
    }

    pub fn scale_int(&self, n: i64) -> FormPoly {
        self.scale(&RatF::from_int(self.ctx, n))
    }

    pub fn mul(&self, rhs: &FormPoly) -> FormPoly {
        let mut out = FormPoly::zero(self.ctx);
        for (&e1, c1) in &self.terms {
            for (&e2, c2) in &rhs.terms {
                let mut e = [0u32; 6];
                for i in 0..6 {
                    e[i] = e1[i] + e2[i];
                }
                out.add_term(e, c1.mul(c2));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> FormPoly {
        let mut out = FormPoly::constant(self.ctx, RatF::one(self.ctx));
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Substitute E ↦ E−s and Y ↦ Y−s; s must involve neither E nor Y.
    pub fn slashed_by(&self, s: &FormPoly) -> FormPoly {
        debug_assert!(
            s.terms.keys().all(|e| e[Var::E as usize] == 0 && e[Var::Y as usize] == 0),
            "shift must not involve E or Y"
        );
        let ctx = self.ctx;
        let cmax = self.degree_of(Var::E) as usize;
        let ymax = self.degree_of(Var::Y) as usize;
        // ladders of (E−s)^j and (Y−s)^j
        let e_shift = FormPoly::var(ctx, Var::E).sub(s);
        let y_shift = FormPoly::var(ctx, Var::Y).sub(s);
        let ladder = |base: &FormPoly, top: usize| {
            let mut v = vec![FormPoly::constant(ctx, RatF::one(ctx))];
            for j in 1..=top {
                v.push(v[j - 1].mul(base));
            }
            v
        };
        let ep = ladder(&e_shift, cmax);
        let yp = ladder(&y_shift, ymax);
        let mut out = FormPoly::zero(ctx);
        for (&e, coeff) in &self.terms {
            let mut rest = e;
            let c = rest[Var::E as usize] as usize;
            let y = rest[Var::Y as usize] as usize;
            rest[Var::E as usize] = 0;
            rest[Var::Y as usize] = 0;
            let base = FormPoly::monomial(ctx, rest, coeff.clone());
            out = out.add(&base.mul(&ep[c]).mul(&yp[y]));
        }
        out
    }

    /// The formal slash: E ↦ E−X, Y ↦ Y−X.
    pub fn slash_x(&self) -> FormPoly {
        self.slashed_by(&FormPoly::var(self.ctx, Var::X))
    }

    /// Collect coefficients by X-power (X stripped from each).
    pub fn x_coefficients(&self) -> Vec<FormPoly> {
        let top = self.degree_of(Var::X) as usize;
        let mut out = vec![FormPoly::zero(self.ctx); top + 1];
        for (&e, c) in &self.terms {
            let mut rest = e;
            let x = rest[Var::X as usize] as usize;
            rest[Var::X as usize] = 0;
            out[x].add_term(rest, c.clone());
        }
        out
    }

    /// n-th Hasse derivative: atoms on g, h, E; the closed rule on X; Y is
    /// inert. The reserved X′ has no assigned action.
    pub fn hyper(&self, n: u32) -> Result<FormPoly, Error> {
        let ctx = self.ctx;
        let mut memo: HashMap<([u32; 4], u32), FormPoly> = HashMap::new();
        let mut out = FormPoly::zero(ctx);
        for (&e, coeff) in &self.terms {
            if e[Var::X2 as usize] != 0 {
                return Err(Error::Domain(
                    "no Hasse action is defined for the second cocycle variable".into(),
                ));
            }
            let core = [e[0], e[1], e[2], e[3]];
            let d = hyper_core(ctx, core, n, &mut memo)?;
            let mut y_exps = [0u32; 6];
            y_exps[Var::Y as usize] = e[Var::Y as usize];
            out = out.add(&d.mul(&FormPoly::monomial(ctx, y_exps, coeff.clone())));
        }
        Ok(out)
    }

    /// Maass-Shimura operator on the formal model: termwise in Y-degree μ,
    /// δ_k^r = Σ_i binom(k−μ+r−1, i)·∂^{r−i}(·)·Y^{μ+i}.
    pub fn delta(&self, k: i64, r: u32) -> Result<FormPoly, Error> {
        self.delta_with(k, r, false)
    }

    /// As delta, optionally corrupting one binomial weight (negative
    /// control for the covariance checks).
    pub fn delta_with(&self, k: i64, r: u32, corrupt: bool) -> Result<FormPoly, Error> {
        let ctx = self.ctx;
        let p = ctx.p;
        // split by Y-degree
        let mut by_mu: BTreeMap<u32, FormPoly> = BTreeMap::new();
        for (&e, c) in &self.terms {
            let mut rest = e;
            let mu = rest[Var::Y as usize];
            rest[Var::Y as usize] = 0;
            by_mu.entry(mu).or_insert_with(|| FormPoly::zero(ctx)).add_term(rest, c.clone());
        }
        let mut out = FormPoly::zero(ctx);
        for (mu, p_mu) in by_mu {
            if k < 2 * mu as i64 {
                return Err(Error::Domain(format!(
                    "Maass-Shimura needs k ≥ 2μ; got k = {k}, μ = {mu}"
                )));
            }
            for i in 0..=r {
                let mut b = if i == 0 {
                    1
                } else {
                    binom_mod_p((k - mu as i64 + r as i64 - 1) as u64, i as u64, p)
                };
                if corrupt && i == 1 {
                    b = (b + 1) % p;
                }
                if b == 0 {
                    continue;
                }
                let mut y_exps = [0u32; 6];
                y_exps[Var::Y as usize] = mu + i;
                let term = p_mu
                    .hyper(r - i)?
                    .scale_int(b as i64)
                    .mul(&FormPoly::monomial(ctx, y_exps, RatF::one(ctx)));
                out = out.add(&term);
            }
        }
        Ok(out)
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let names = ["g", "h", "E", "X", "Y", "X'"];
        let pieces: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut s = format!("({})", c.render());
                for (i, name) in names.iter().enumerate() {
                    if e[i] == 1 {
                        s.push_str(&format!("*{name}"));
                    } else if e[i] > 1 {
                        s.push_str(&format!("*{name}^{}", e[i]));
                    }
                }
                s
            })
            .collect();
        pieces.join(" + ")
    }
}

/// ∂ⁿ(g^a h^b E^c X^m), peeling generator factors via the atom tables and
/// finishing with the closed X-power rule.
fn hyper_core(
    ctx: &'static FqCtx,
    core: [u32; 4],
    n: u32,
    memo: &mut HashMap<([u32; 4], u32), FormPoly>,
) -> Result<FormPoly, Error> {
    if let Some(hit) = memo.get(&(core, n)) {
        return Ok(hit.clone());
    }
    let [a, b, c, x] = core;
    let result = if n == 0 {
        FormPoly::monomial(ctx, [a, b, c, x, 0, 0], RatF::one(ctx))
    } else if a == 0 && b == 0 && c == 0 {
        // pure X-power: ∂ⁿ(X^m) = (−1)ⁿ binom(m+n−1, n) X^{m+n}
        if x == 0 {
            FormPoly::zero(ctx)
        } else {
            let mut coeff = binom_mod_p((x + n - 1) as u64, n as u64, ctx.p) as i64;
            if n % 2 == 1 {
                coeff = -coeff;
            }
            FormPoly::monomial(ctx, [0, 0, 0, x + n, 0, 0], RatF::from_int(ctx, coeff))
        }
    } else {
        let (gen, rest) = if a > 0 {
            (Generator::G, [a - 1, b, c, x])
        } else if b > 0 {
            (Generator::H, [a, b - 1, c, x])
        } else {
            (Generator::E, [a, b, c - 1, x])
        };
        let mut acc = FormPoly::zero(ctx);
        for i in 0..=n {
            let left = FormPoly::from_graded(atom_hyper(ctx, gen, i)?.as_ref());
            let right = hyper_core(ctx, rest, n - i, memo)?;
            acc = acc.add(&left.mul(&right));
        }
        acc
    };
    memo.insert((core, n), result.clone());
    Ok(result)
}

/// Polynomial in X with u-series coefficients, index = X-power.
#[derive(Clone, PartialEq, Debug)]
pub struct XPoly {
    pub coeffs: Vec<USeries<RatF>>,
}

impl XPoly {
    pub fn new(coeffs: Vec<USeries<RatF>>) -> XPoly {
        XPoly { coeffs }
    }

    pub fn mul(&self, rhs: &XPoly) -> XPoly {
        let zero = self.coeffs[0].witness().clone();
        let prec = self
            .coeffs
            .iter()
            .chain(&rhs.coeffs)
            .map(|s| s.prec())
            .min()
            .expect("nonempty operands");
        let mut out =
            vec![USeries::zero_prec(&zero, prec); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, f) in self.coeffs.iter().enumerate() {
            for (j, g) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&f.mul(g).truncate_to(prec));
            }
        }
        XPoly { coeffs: out }
    }

    pub fn add(&self, rhs: &XPoly) -> XPoly {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() {
            (&self.coeffs, &rhs.coeffs)
        } else {
            (&rhs.coeffs, &self.coeffs)
        };
        let mut out = long.clone();
        for (i, s) in short.iter().enumerate() {
            out[i] = out[i].add(s);
        }
        XPoly { coeffs: out }
    }

    pub fn agrees_with(&self, rhs: &XPoly) -> bool {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero_a = self.coeffs[0].witness().clone();
        for i in 0..n {
            let blank = USeries::zero_prec(&zero_a, i64::MAX / 4);
            let a = self.coeffs.get(i).unwrap_or(&blank);
            let b = rhs.coeffs.get(i).unwrap_or(&blank);
            if !a.agrees_with(b) {
                return false;
            }
        }
        true
    }
}

/// n-th Hasse derivative of an X-polynomial over u-series: Leibniz across
/// the coefficient (series hyperderivative) and the X-power rule.
pub fn hasse_on_x(n: u32, poly: &XPoly) -> XPoly {
    let zero = poly.coeffs[0].witness().clone();
    let ctx = zero.ctx();
    let prec = poly.coeffs.iter().map(|s| s.prec()).min().unwrap() - n as i64;
    let top = poly.coeffs.len() - 1 + n as usize;
    let mut out = vec![USeries::zero_prec(&zero, prec); top + 1];
    for (m, f) in poly.coeffs.iter().enumerate() {
        for i in 0..=n {
            let j = n - i; // X receives ∂^j, the coefficient ∂^i
            let sign_binom: i64 = if j == 0 {
                1
            } else if m == 0 {
                0
            } else {
                let b = binom_mod_p((m as u64) + (j as u64) - 1, j as u64, ctx.p) as i64;
                if j % 2 == 1 {
                    -b
                } else {
                    b
                }
            };
            if sign_binom == 0 {
                continue;
            }
            let df = f.hyper(i).scale_int(sign_binom).truncate_to(prec);
            let idx = m + j as usize;
            out[idx] = out[idx].add(&df);
        }
    }
    XPoly { coeffs: out }
}
