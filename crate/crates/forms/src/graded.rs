//! The graded quasi-modular algebra K[g, h, E]: polynomials in the abstract
//! generators with weight, type and depth metadata, the evaluation map into
//! u-series, and exact membership testing by linear algebra on coefficients.
//!
//! Monomial g^a h^b E^c has weight (q-1)a + (q+1)b + 2c and type
//! b + c mod (q-1); the depth of a form is its E-degree. Modular forms are
//! the depth-0 forms.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use dmf_algebra::{Error, FqCtx, RatF, USeries};

use crate::eisenstein::{Generator, GeneratorTable};

/// Exponent vector (a, b, c) for g^a h^b E^c.
pub type Mono = (u32, u32, u32);

#[derive(Clone, PartialEq)]
pub struct GradedForm {
    ctx: &'static FqCtx,
    weight: i64,
    /// reduced representative in 0..q-1
    typ: i64,
    terms: BTreeMap<Mono, RatF>,
}

impl std::fmt::Debug for GradedForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[w={} m={}] {}", self.weight, self.typ, self.render())
    }
}

pub fn mono_weight(q: u32, (a, b, c): Mono) -> i64 {
    let q = q as i64;
    (q - 1) * a as i64 + (q + 1) * b as i64 + 2 * c as i64
}

pub fn mono_type(q: u32, (_, b, c): Mono) -> i64 {
    (b as i64 + c as i64).rem_euclid((q as i64 - 1).max(1))
}

pub(crate) fn reduce_type(q: u32, m: i64) -> i64 {
    m.rem_euclid((q as i64 - 1).max(1))
}

impl GradedForm {
    pub fn zero(ctx: &'static FqCtx, weight: i64, typ: i64) -> GradedForm {
        GradedForm { ctx, weight, typ: reduce_type(ctx.q, typ), terms: BTreeMap::new() }
    }

    /// Single monomial coeff·g^a h^b E^c; weight and type are derived.
    pub fn monomial(ctx: &'static FqCtx, mono: Mono, coeff: RatF) -> GradedForm {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(mono, coeff);
        }
        GradedForm { ctx, weight: mono_weight(ctx.q, mono), typ: mono_type(ctx.q, mono), terms }
    }

    pub fn generator(ctx: &'static FqCtx, gen: Generator) -> GradedForm {
        let mono = match gen {
            Generator::G => (1, 0, 0),
            Generator::H => (0, 1, 0),
            Generator::E => (0, 0, 1),
            Generator::Delta => (0, 0, 0), // replaced below
        };
        match gen {
            Generator::Delta => {
                // Δ = -h^{q-1}
                GradedForm::monomial(ctx, (0, ctx.q - 1, 0), RatF::from_int(ctx, -1))
            }
            _ => GradedForm::monomial(ctx, mono, RatF::one(ctx)),
        }
    }

    /// Assemble from explicit terms; every monomial must match the declared
    /// weight and type, so sums of mixed weight never exist.
    pub fn from_terms(
        ctx: &'static FqCtx,
        weight: i64,
        typ: i64,
        terms: Vec<(Mono, RatF)>,
    ) -> Result<GradedForm, Error> {
        let mut f = GradedForm::zero(ctx, weight, typ);
        for (mono, coeff) in terms {
            if mono_weight(ctx.q, mono) != weight || mono_type(ctx.q, mono) != f.typ {
                return Err(Error::Domain(format!(
                    "monomial g^{} h^{} E^{} has weight {} type {}, expected weight {} type {}",
                    mono.0,
                    mono.1,
                    mono.2,
                    mono_weight(ctx.q, mono),
                    mono_type(ctx.q, mono),
                    weight,
                    f.typ
                )));
            }
            if !coeff.is_zero() {
                let entry = f.terms.entry(mono).or_insert_with(|| RatF::zero(ctx));
                *entry = entry.add(&coeff);
                if entry.is_zero() {
                    f.terms.remove(&mono);
                }
            }
        }
        Ok(f)
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

    /// E-degree.
    pub fn depth(&self) -> u32 {
        self.terms.keys().map(|&(_, _, c)| c).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_modular(&self) -> bool {
        self.depth() == 0
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mono, &RatF)> {
        self.terms.iter().map(|(&m, c)| (m, c))
    }

    pub fn coeff(&self, mono: Mono) -> RatF {
        self.terms.get(&mono).cloned().unwrap_or_else(|| RatF::zero(self.ctx))
    }

    pub fn add(&self, rhs: &GradedForm) -> Result<GradedForm, Error> {
        if self.weight != rhs.weight || self.typ != rhs.typ {
            return Err(Error::Domain(format!(
                "cannot add weight {} type {} to weight {} type {}",
                rhs.weight, rhs.typ, self.weight, self.typ
            )));
        }
        let mut out = self.clone();
        for (&mono, c) in &rhs.terms {
            let entry = out.terms.entry(mono).or_insert_with(|| RatF::zero(self.ctx));
            *entry = entry.add(c);
            if entry.is_zero() {
                out.terms.remove(&mono);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &GradedForm) -> Result<GradedForm, Error> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> GradedForm {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn scale(&self, c: &RatF) -> GradedForm {
        if c.is_zero() {
            return GradedForm::zero(self.ctx, self.weight, self.typ);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.mul(c);
        }
        out
    }

    pub fn mul(&self, rhs: &GradedForm) -> GradedForm {
        let mut out = GradedForm::zero(self.ctx, self.weight + rhs.weight, self.typ + rhs.typ);
        for (&(a1, b1, c1), x) in &self.terms {
            for (&(a2, b2, c2), y) in &rhs.terms {
                let mono = (a1 + a2, b1 + b2, c1 + c2);
                let prod = x.mul(y);
                let entry = out.terms.entry(mono).or_insert_with(|| RatF::zero(self.ctx));
                *entry = entry.add(&prod);
                if entry.is_zero() {
                    out.terms.remove(&mono);
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> GradedForm {
        let mut out = GradedForm::monomial(self.ctx, (0, 0, 0), RatF::one(self.ctx));
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Evaluation homomorphism into u-series at the table's precision.
    pub fn expand(&self, table: &GeneratorTable) -> USeries<RatF> {
        self.expand_at(table, table.prec)
    }

    /// Evaluation at an explicit precision ≤ the table's.
    pub fn expand_at(&self, table: &GeneratorTable, prec: i64) -> USeries<RatF> {
        let monos: Vec<Mono> = self.terms.keys().copied().collect();
        let basis = expand_monomials(table, &monos, prec);
        let zero = RatF::zero(self.ctx);
        let mut acc = USeries::zero_prec(&zero, prec);
        for (mono, series) in monos.iter().zip(basis) {
            acc = acc.add(&series.scale(&self.terms[mono]));
        }
        acc
    }

    /// n-th hyperderivative, staying inside the quasi-modular algebra:
    /// weight gains 2n, type gains n, depth at most n more.
    pub fn hyper(&self, n: u32) -> Result<GradedForm, Error> {
        let mut acc = GradedForm::zero(self.ctx, self.weight + 2 * n as i64, self.typ + n as i64);
        let mut memo: HashMap<(Mono, u32), GradedForm> = HashMap::new();
        for (&mono, coeff) in &self.terms {
            let d = hyper_monomial(self.ctx, mono, n, &mut memo)?;
            acc = acc.add(&d.scale(coeff))?;
        }
        Ok(acc)
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let pieces: Vec<String> = self
            .terms
            .iter()
            .map(|(&(a, b, c), coeff)| {
                let mut s = format!("({})", coeff.render());
                for (name, e) in [("g", a), ("h", b), ("E", c)] {
                    if e == 1 {
                        s.push_str(&format!("*{name}"));
                    } else if e > 1 {
                        s.push_str(&format!("*{name}^{e}"));
                    }
                }
                s
            })
            .collect();
        pieces.join(" + ")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let monomials: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(&(a, b, c), coeff)| {
                serde_json::json!({"g": a, "h": b, "E": c, "coeff": coeff.render()})
            })
            .collect();
        serde_json::json!({"weight": self.weight, "type": self.typ, "monomials": monomials})
    }

    pub fn from_json(ctx: &'static FqCtx, v: &serde_json::Value) -> Result<GradedForm, Error> {
        let bad = |m: &str| Error::Parse(format!("GradedForm JSON: {m}"));
        let weight = v["weight"].as_i64().ok_or_else(|| bad("missing weight"))?;
        let typ = v["type"].as_i64().ok_or_else(|| bad("missing type"))?;
        let monos = v["monomials"].as_array().ok_or_else(|| bad("missing monomials"))?;
        let mut terms = Vec::with_capacity(monos.len());
        for mv in monos {
            let e = |key: &str| -> Result<u32, Error> {
                mv[key]
                    .as_u64()
                    .map(|x| x as u32)
                    .ok_or_else(|| bad(&format!("missing exponent {key}")))
            };
            let coeff = RatF::parse(ctx, mv["coeff"].as_str().ok_or_else(|| bad("missing coeff"))?)?;
            terms.push(((e("g")?, e("h")?, e("E")?), coeff));
        }
        GradedForm::from_terms(ctx, weight, typ, terms)
    }
}

/// Expand a batch of monomials sharing one set of generator power ladders.
fn expand_monomials(table: &GeneratorTable, monos: &[Mono], prec: i64) -> Vec<USeries<RatF>> {
    let zero = RatF::zero(table.ctx);
    let one = USeries::one(&zero, prec);
    let amax = monos.iter().map(|m| m.0).max().unwrap_or(0) as usize;
    let bmax = monos.iter().map(|m| m.1).max().unwrap_or(0) as usize;
    let cmax = monos.iter().map(|m| m.2).max().unwrap_or(0) as usize;
    let ladder = |base: &USeries<RatF>, top: usize| -> Vec<USeries<RatF>> {
        let mut v = Vec::with_capacity(top + 1);
        v.push(one.clone());
        for i in 1..=top {
            v.push(v[i - 1].mul(base).truncate_to(prec));
        }
        v
    };
    let gp = ladder(&table.g.truncate_to(prec), amax);
    let hp = ladder(&table.h.truncate_to(prec), bmax);
    let ep = ladder(&table.e.truncate_to(prec), cmax);
    monos
        .iter()
        .map(|&(a, b, c)| {
            gp[a as usize].mul(&hp[b as usize]).mul(&ep[c as usize]).truncate_to(prec)
        })
        .collect()
}

/// Outcome of recognizing a u-series inside the (quasi-)modular algebra.
#[derive(Clone, PartialEq, Debug)]
pub enum Membership {
    Member(GradedForm),
    /// the linear system on the solving rows is already unsolvable
    NotMember,
    /// a candidate fit the solving rows but failed at the named exponent;
    /// either the series is not in the span or it was truncated inconsistently
    InconsistentTruncation { exponent: i64 },
}

/// All exponent vectors of the given weight and type with E-degree ≤ max_depth.
pub fn candidate_monomials(q: u32, k: i64, m: i64, max_depth: u32) -> Vec<Mono> {
    let qi = q as i64;
    let m_red = reduce_type(q, m);
    let mut out = Vec::new();
    for c in 0..=max_depth as i64 {
        if 2 * c > k {
            break;
        }
        let mut b = 0i64;
        while (qi + 1) * b + 2 * c <= k {
            let rem = k - (qi + 1) * b - 2 * c;
            if rem % (qi - 1).max(1) == 0 && reduce_type(q, b + c) == m_red {
                out.push(((rem / (qi - 1).max(1)) as u32, b as u32, c as u32));
            }
            b += 1;
        }
    }
    out
}

/// Recognize f as a modular form of weight k and type m: a polynomial in
/// g and h alone.
pub fn membership(f: &USeries<RatF>, k: i64, m: i64) -> Result<Membership, Error> {
    qm_membership(f, k, m, 0)
}

/// Recognize f in the quasi-modular algebra with depth ≤ max_depth. Solves
/// on the first dim+8 supported rows and verifies the candidate on every
/// remaining available coefficient.
pub fn qm_membership(
    f: &USeries<RatF>,
    k: i64,
    m: i64,
    max_depth: u32,
) -> Result<Membership, Error> {
    let ctx = f.witness().ctx();
    let cands = candidate_monomials(ctx.q, k, m, max_depth);
    let dim = cands.len();
    let prec = f.prec();
    if prec < 2 * dim as i64 + k.max(0) {
        return Err(Error::Precision(format!(
            "membership at weight {k} needs prec ≥ {}, got {prec}",
            2 * dim as i64 + k.max(0)
        )));
    }
    // the basis has no polar part, so any pole rules f out immediately
    if let Some(v) = f.valuation() {
        if v < 0 {
            return Ok(Membership::NotMember);
        }
    }
    if dim == 0 {
        // no candidates at all: only the zero series belongs
        return Ok(if f.is_zero() {
            Membership::Member(GradedForm::zero(ctx, k, m))
        } else {
            Membership::NotMember
        });
    }

    let table = GeneratorTable::get(ctx, prec.max((ctx.q * ctx.q) as i64))?;
    let basis = expand_monomials(&table, &cands, prec);

    // type forces the support into one residue class mod q-1, so exponents
    // where neither the basis nor f is supported are skipped: they carry no
    // constraint and would starve the solve block of rank
    let n_solve = dim + 8;
    let mut rows = Vec::with_capacity(n_solve);
    for n in 0..prec {
        if rows.len() >= n_solve {
            break;
        }
        let mut row: Vec<RatF> = basis.iter().map(|s| s.coeff(n)).collect();
        let target = f.coeff(n);
        if target.is_zero() && row.iter().all(|c| c.is_zero()) {
            continue;
        }
        row.push(target);
        rows.push(row);
    }
    let solution = match gauss_solve(ctx, rows, dim) {
        Gauss::Inconsistent => return Ok(Membership::NotMember),
        Gauss::RankDeficient => {
            return Err(Error::Precision(format!(
                "membership solving block at weight {k} is rank-deficient; raise precision"
            )))
        }
        Gauss::Unique(x) => x,
    };

    // residual over every available coefficient
    let mut residual = f.truncate_to(prec);
    for (series, x) in basis.iter().zip(&solution) {
        residual = residual.sub(&series.scale(x));
    }
    if let Some(e) = residual.valuation() {
        return Ok(Membership::InconsistentTruncation { exponent: e });
    }

    let terms: Vec<(Mono, RatF)> = cands.into_iter().zip(solution).collect();
    Ok(Membership::Member(GradedForm::from_terms(ctx, k, m, terms)?))
}

enum Gauss {
    Unique(Vec<RatF>),
    Inconsistent,
    RankDeficient,
}

/// Row-reduce an augmented system (ncols unknowns, last column the target).
fn gauss_solve(ctx: &'static FqCtx, mut rows: Vec<Vec<RatF>>, ncols: usize) -> Gauss {
    let nrows = rows.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut next_row = 0usize;
    for col in 0..ncols {
        let Some(p) = (next_row..nrows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(next_row, p);
        let inv = rows[next_row][col].inv().expect("pivot is nonzero");
        for v in rows[next_row].iter_mut().skip(col) {
            *v = v.mul(&inv);
        }
        for r in 0..nrows {
            if r != next_row && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in col..=ncols {
                    let delta = rows[next_row][c].mul(&factor);
                    rows[r][c] = rows[r][c].sub(&delta);
                }
            }
        }
        pivot_of_col[col] = Some(next_row);
        next_row += 1;
    }
    // any surviving nonzero target entry in a zero row kills solvability
    for row in rows.iter().skip(next_row) {
        if !row[ncols].is_zero() {
            return Gauss::Inconsistent;
        }
    }
    if pivot_of_col.iter().any(|p| p.is_none()) {
        return Gauss::RankDeficient;
    }
    let mut x = vec![RatF::zero(ctx); ncols];
    for (col, p) in pivot_of_col.into_iter().enumerate() {
        x[col] = rows[p.unwrap()][ncols].clone();
    }
    Gauss::Unique(x)
}

/// ∂^j of a single generator as a quasi-modular form, discovered once per
/// (q, generator, j) by expanding, differentiating and re-recognizing.
pub(crate) fn atom_hyper(ctx: &'static FqCtx, gen: Generator, j: u32) -> Result<Arc<GradedForm>, Error> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u8, u32), Arc<GradedForm>>>> = OnceLock::new();
    let tag = match gen {
        Generator::E => 0u8,
        Generator::G => 1,
        Generator::H => 2,
        Generator::Delta => 3,
    };
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&(ctx.q, tag, j)) {
        return Ok(hit.clone());
    }
    let result = if j == 0 {
        GradedForm::generator(ctx, gen)
    } else {
        let base_depth = if gen == Generator::E { 1 } else { 0 };
        let k = gen.weight(ctx.q) + 2 * j as i64;
        let m = gen.typ() + j as i64;
        let depth = base_depth + j;
        let dim = candidate_monomials(ctx.q, k, m, depth).len() as i64;
        let prec = (2 * dim + k + 9 + j as i64).max((ctx.q * ctx.q) as i64 + j as i64);
        let table = GeneratorTable::get(ctx, prec)?;
        let series = table.series(gen).truncate_to(prec).hyper(j);
        match qm_membership(&series, k, m, depth)? {
            Membership::Member(f) => f,
            other => {
                return Err(Error::Domain(format!(
                    "∂^{j} of a generator left the quasi-modular algebra ({other:?}); this is a pipeline bug"
                )))
            }
        }
    };
    let arc = Arc::new(result);
    cache.lock().unwrap().insert((ctx.q, tag, j), arc.clone());
    Ok(arc)
}

/// ∂^n(g^a h^b E^c) by peeling one generator and applying the Leibniz rule.
fn hyper_monomial(
    ctx: &'static FqCtx,
    mono: Mono,
    n: u32,
    memo: &mut HashMap<(Mono, u32), GradedForm>,
) -> Result<GradedForm, Error> {
    if let Some(hit) = memo.get(&(mono, n)) {
        return Ok(hit.clone());
    }
    let (a, b, c) = mono;
    let result = if n == 0 {
        GradedForm::monomial(ctx, mono, RatF::one(ctx))
    } else if a == 0 && b == 0 && c == 0 {
        GradedForm::zero(ctx, 2 * n as i64, n as i64)
    } else {
        let (gen, rest) = if a > 0 {
            (Generator::G, (a - 1, b, c))
        } else if b > 0 {
            (Generator::H, (a, b - 1, c))
        } else {
            (Generator::E, (a, b, c - 1))
        };
        let mut acc = GradedForm::zero(ctx, mono_weight(ctx.q, mono) + 2 * n as i64, mono_type(ctx.q, mono) + n as i64);
        for i in 0..=n {
            let left = atom_hyper(ctx, gen, i)?;
            let right = hyper_monomial(ctx, rest, n - i, memo)?;
            acc = acc.add(&left.mul(&right))?;
        }
        acc
    };
    memo.insert((mono, n), result.clone());
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dmf_algebra::Poly;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(q: u32, prec: i64) -> Arc<GeneratorTable> {
        GeneratorTable::get(FqCtx::get(q).unwrap(), prec).unwrap()
    }

    #[test]
    fn grading_invariants() {
        let ctx = FqCtx::get(3).unwrap();
        let g = GradedForm::generator(ctx, Generator::G);
        assert_eq!((g.weight(), g.typ(), g.depth()), (2, 0, 0));
        let e = GradedForm::generator(ctx, Generator::E);
        assert_eq!((e.weight(), e.typ(), e.depth()), (2, 1, 1));
        let h = GradedForm::generator(ctx, Generator::H);
        assert_eq!((h.weight(), h.typ(), h.depth()), (4, 1, 0));
        // mixed weight is rejected
        assert!(g.add(&h).is_err());
        // same weight, different type is rejected (q=5: g² vs E of weight 8?)
        let prod = g.mul(&e);
        assert_eq!((prod.weight(), prod.typ(), prod.depth()), (4, 1, 1));
        assert!(prod.add(&h).is_ok());
    }

    #[test]
    fn expand_generators_and_products() {
        let t = table(3, 40);
        let ctx = t.ctx;
        let g = GradedForm::generator(ctx, Generator::G);
        assert!(g.expand(&t).agrees_with(&t.g));
        let gh = g.mul(&GradedForm::generator(ctx, Generator::H));
        assert!(gh.expand(&t).agrees_with(&t.g.mul(&t.h).truncate_to(40)));
        let delta = GradedForm::generator(ctx, Generator::Delta);
        assert!(delta.expand(&t).agrees_with(&t.delta));
    }

    #[test]
    fn membership_examples() {
        for q in [2u32, 3] {
            let prec = 3 * (q as i64 + 1) * (q as i64 + 1) + 20;
            let t = table(q, prec);
            let ctx = t.ctx;
            let qi = q as i64;
            // Δ̃ is -h^{q-1}
            match membership(&t.delta, qi * qi - 1, 0).unwrap() {
                Membership::Member(f) => {
                    assert_eq!(f, GradedForm::generator(ctx, Generator::Delta), "q={q}");
                }
                other => panic!("Δ̃ not recognized (q={q}): {other:?}"),
            }
            // E is quasi-modular but not modular
            assert_eq!(membership(&t.e, 2, 1).unwrap(), Membership::NotMember, "q={q}");
            // but it is recognized at depth 1
            match qm_membership(&t.e, 2, 1, 1).unwrap() {
                Membership::Member(f) => {
                    assert_eq!(f, GradedForm::generator(ctx, Generator::E), "q={q}")
                }
                other => panic!("E not recognized at depth 1 (q={q}): {other:?}"),
            }
            // g̃h̃ is the monomial gh
            let gh_series = t.g.mul(&t.h).truncate_to(prec);
            match membership(&gh_series, 2 * qi, 1).unwrap() {
                Membership::Member(f) => {
                    let want = GradedForm::monomial(ctx, (1, 1, 0), RatF::one(ctx));
                    assert_eq!(f, want, "q={q}");
                }
                other => panic!("g̃h̃ not recognized (q={q}): {other:?}"),
            }
        }
    }

    #[test]
    fn membership_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(421);
        for q in [2u32, 3] {
            let ctx = FqCtx::get(q).unwrap();
            let k = (q as i64 - 1) * 2 + (q as i64 + 1) * 2; // realizable weight
            for m in 0..(q as i64 - 1).max(1) {
                let cands = candidate_monomials(q, k, m, 2);
                if cands.is_empty() {
                    continue;
                }
                let terms: Vec<(Mono, RatF)> = cands
                    .iter()
                    .map(|&mono| {
                        let c = RatF::from_int(ctx, rng.gen_range(-4..5));
                        (mono, c)
                    })
                    .collect();
                let f = GradedForm::from_terms(ctx, k, m, terms).unwrap();
                let prec = 2 * cands.len() as i64 + k + 12;
                let t = table(q, prec);
                let series = f.expand_at(&t, prec);
                match qm_membership(&series, k, m, 2).unwrap() {
                    Membership::Member(back) => assert_eq!(back, f, "q={q} m={m}"),
                    other => panic!("round trip failed (q={q}, m={m}): {other:?}"),
                }
            }
        }
    }

    #[test]
    fn membership_detects_late_corruption() {
        let q = 3u32;
        let prec = 40i64;
        let t = table(q, prec);
        let ctx = t.ctx;
        let k = (q as i64) * (q as i64) - 1;
        // corrupt one coefficient beyond every exponent the solve block can
        // consume: past the (dim+8)-th supported exponent of the basis
        let cands = candidate_monomials(q, k, 0, 0);
        let dim = cands.len();
        let basis: Vec<USeries<RatF>> = cands
            .iter()
            .map(|&mono| GradedForm::monomial(ctx, mono, RatF::one(ctx)).expand_at(&t, prec))
            .collect();
        let supported: Vec<i64> = (0..prec)
            .filter(|&n| basis.iter().any(|s| !s.coeff(n).is_zero()))
            .collect();
        let late = supported[dim + 8 - 1] + 1;
        assert!(late < prec, "test window too small");
        let spike = USeries::monomial(&RatF::one(ctx), late, prec);
        let corrupted = t.delta.truncate_to(prec).add(&spike);
        match membership(&corrupted, k, 0).unwrap() {
            Membership::InconsistentTruncation { exponent } => assert_eq!(exponent, late),
            other => panic!("expected inconsistent truncation, got {other:?}"),
        }
        // corrupt a solving row: plainly not a member
        let spike = USeries::monomial(&RatF::one(ctx), 1, prec);
        let corrupted = t.delta.truncate_to(prec).add(&spike);
        assert_eq!(membership(&corrupted, k, 0).unwrap(), Membership::NotMember);
    }

    #[test]
    fn membership_precision_guard() {
        let t = table(3, 40);
        let small = t.delta.truncate_to(6);
        assert!(matches!(membership(&small, 8, 0), Err(Error::Precision(_))));
    }

    #[test]
    fn monomial_independence_full_rank() {
        // columns of the membership system stay independent through
        // weight 3(q²-1): solve for the zero series and expect zero
        for q in [2u32, 3] {
            let qi = q as i64;
            for k in 0..=3 * (qi * qi - 1) {
                for m in 0..(qi - 1).max(1) {
                    let dim = candidate_monomials(q, k, m, 0).len() as i64;
                    if dim == 0 {
                        continue;
                    }
                    let prec = 2 * dim + k + 10;
                    let t = table(q, prec);
                    let zero = USeries::zero_prec(&RatF::zero(t.ctx), prec);
                    match membership(&zero, k, m).unwrap() {
                        Membership::Member(f) => {
                            assert!(f.is_zero(), "q={q} k={k} m={m}: zero series must map to 0")
                        }
                        other => panic!("q={q} k={k} m={m}: {other:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn hyper_matches_series_hyperderivative() {
        for q in [2u32, 3] {
            let ctx = FqCtx::get(q).unwrap();
            let forms = [
                GradedForm::generator(ctx, Generator::G),
                GradedForm::generator(ctx, Generator::Delta),
                GradedForm::generator(ctx, Generator::G)
                    .mul(&GradedForm::generator(ctx, Generator::E)),
            ];
            for f in &forms {
                for n in 1..=3u32 {
                    let df = f.hyper(n).unwrap();
                    let prec = 30 + n as i64;
                    let t = table(q, prec);
                    let want = f.expand_at(&t, prec).hyper(n);
                    let got = df.expand_at(&t, prec).truncate_to(want.prec());
                    assert!(got.agrees_with(&want), "q={q} n={n} f={}", f.render());
                }
            }
        }
    }

    #[test]
    fn hyper_delta_is_e_times_delta() {
        for q in [2u32, 3, 5] {
            let ctx = FqCtx::get(q).unwrap();
            let delta = GradedForm::generator(ctx, Generator::Delta);
            let want = GradedForm::generator(ctx, Generator::E).mul(&delta);
            assert_eq!(delta.hyper(1).unwrap(), want, "q={q}");
        }
    }

    #[test]
    fn json_roundtrip() {
        let ctx = FqCtx::get(3).unwrap();
        let f = GradedForm::from_terms(
            ctx,
            8,
            0,
            vec![
                ((4, 0, 0), RatF::from_int(ctx, 2)),
                ((0, 2, 0), RatF::new(Poly::one(ctx), Poly::theta(ctx).add(&Poly::one(ctx))).unwrap()),
                ((1, 1, 1), RatF::from_int(ctx, -1)),
            ],
        )
        .unwrap();
        let back = GradedForm::from_json(ctx, &f.to_json()).unwrap();
        assert_eq!(back, f);
    }
}
