//! Finite fields F_q (q = p^n ≤ 2^16) and extensions F_{q^m}, with table-backed
//! arithmetic behind interned, process-global contexts.
//!
//! Elements are stored as raw indices: the index of Σ aᵢ xⁱ (aᵢ ∈ F_p) is
//! Σ aᵢ pⁱ, so the F_p-vector of an element is just its base-p digit string.
//! Contexts are interned and leaked, so `&'static FqCtx` is freely copyable
//! and aggregate types can carry a context pointer without reference counting.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::Error;

/// An element of F_q, meaningful only together with its `FqCtx`.
pub type FqElem = u16;

/// An element of F_{q^m}, as an index in the extension's tables.
pub type FqmElem = u32;

/// Arithmetic context for F_q, q = p^n.
///
/// The modulus is the lexicographically smallest primitive monic polynomial of
/// degree n over F_p (coefficients compared low-degree-first as base-p digits),
/// so x itself generates F_q^× and the exp/log tables are built from it.
/// Contexts are interned, one per q, so equality is just equality of q.
pub struct FqCtx {
    pub p: u32,
    pub n: u32,
    pub q: u32,
    /// Modulus coefficients c_0..c_n over F_p (c_n = 1). For n = 1 this is
    /// x - g with g the smallest primitive root of p.
    pub modulus: Vec<u32>,
    exp: Vec<u16>,
    log: Vec<u32>,
    neg: Vec<u16>,
    add: Option<Vec<u16>>,
}

fn is_prime(m: u32) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut m: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2u32;
    while d as u64 * d as u64 <= m as u64 {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Splits q into (p, n) with q = p^n, p prime.
pub fn split_prime_power(q: u32) -> Result<(u32, u32), Error> {
    if q < 2 {
        return Err(Error::BadField(format!("q = {q} is not a prime power")));
    }
    let fac = prime_factors(q);
    if fac.len() != 1 {
        return Err(Error::BadField(format!("q = {q} is not a prime power")));
    }
    let p = fac[0];
    let mut n = 0;
    let mut m = q;
    while m > 1 {
        if m % p != 0 {
            return Err(Error::BadField(format!("q = {q} is not a prime power")));
        }
        m /= p;
        n += 1;
    }
    Ok((p, n))
}

impl PartialEq for FqCtx {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
    }
}

impl Eq for FqCtx {}

impl std::hash::Hash for FqCtx {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.q.hash(state);
    }
}

impl FqCtx {
    /// Interned context for F_q. Panics only on invalid q; q ≤ 2^16 enforced.
    pub fn get(q: u32) -> Result<&'static FqCtx, Error> {
        static REGISTRY: OnceLock<Mutex<HashMap<u32, &'static FqCtx>>> = OnceLock::new();
        let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = reg.lock().unwrap();
        if let Some(ctx) = map.get(&q) {
            return Ok(ctx);
        }
        if q > 1 << 16 {
            return Err(Error::BadField(format!("q = {q} exceeds the 2^16 desk-scale bound")));
        }
        let (p, n) = split_prime_power(q)?;
        let ctx: &'static FqCtx = Box::leak(Box::new(FqCtx::build(p, n)));
        map.insert(q, ctx);
        Ok(ctx)
    }

    fn build(p: u32, n: u32) -> FqCtx {
        let q = p.pow(n);
        let modulus = find_primitive_modulus(p, n);
        // exp/log over the generator x (index p). Reduction of x^n uses the
        // modulus tail: x^n = -(c_0 + c_1 x + ... + c_{n-1} x^{n-1}).
        let mut exp = vec![0u16; 2 * (q as usize - 1)];
        let mut log = vec![u32::MAX; q as usize];
        let mut cur: Vec<u32> = vec![0; n as usize];
        cur[0] = 1;
        for i in 0..(q - 1) as usize {
            let idx = vec_to_index(&cur, p);
            exp[i] = idx as u16;
            exp[i + (q as usize - 1)] = idx as u16;
            debug_assert!(log[idx as usize] == u32::MAX, "modulus not primitive");
            log[idx as usize] = i as u32;
            cur = mul_by_x(&cur, &modulus, p, n);
        }
        let neg = (0..q)
            .map(|i| {
                let mut v = index_to_vec(i, p, n);
                for d in v.iter_mut() {
                    *d = (p - *d) % p;
                }
                vec_to_index(&v, p) as u16
            })
            .collect();
        let add = if (q as u64) * (q as u64) <= 1 << 20 {
            let mut t = vec![0u16; (q * q) as usize];
            for a in 0..q {
                let va = index_to_vec(a, p, n);
                for b in 0..q {
                    let vb = index_to_vec(b, p, n);
                    let s: Vec<u32> = va.iter().zip(&vb).map(|(x, y)| (x + y) % p).collect();
                    t[(a * q + b) as usize] = vec_to_index(&s, p) as u16;
                }
            }
            Some(t)
        } else {
            None
        };
        FqCtx { p, n, q, modulus, exp, log, neg, add }
    }

    #[inline]
    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        if self.p == 2 {
            return a ^ b;
        }
        if let Some(t) = &self.add {
            return t[a as usize * self.q as usize + b as usize];
        }
        let (mut a, mut b) = (a as u32, b as u32);
        let (mut out, mut pw) = (0u32, 1u32);
        while a > 0 || b > 0 {
            out += ((a + b) % self.p) * pw;
            a /= self.p;
            b /= self.p;
            pw *= self.p;
        }
        out as FqElem
    }

    #[inline]
    pub fn neg(&self, a: FqElem) -> FqElem {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    #[inline]
    pub fn inv(&self, a: FqElem) -> Result<FqElem, Error> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        let l = self.log[a as usize];
        Ok(self.exp[((self.q - 1 - l) % (self.q - 1)) as usize])
    }

    pub fn pow(&self, a: FqElem, e: u64) -> FqElem {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let l = self.log[a as usize] as u64;
        self.exp[((l * (e % (self.q as u64 - 1))) % (self.q as u64 - 1)) as usize]
    }

    /// q-power Frobenius is the identity on F_q; provided for symmetry.
    #[inline]
    pub fn frob(&self, a: FqElem) -> FqElem {
        self.pow(a, self.q as u64)
    }

    /// Embedding of the prime field: r mod p, as a constant.
    #[inline]
    pub fn from_int(&self, r: i64) -> FqElem {
        (r.rem_euclid(self.p as i64)) as FqElem
    }

    /// The element with the given F_p-coordinate vector (low degree first).
    pub fn from_vec(&self, v: &[u32]) -> Result<FqElem, Error> {
        if v.len() > self.n as usize || v.iter().any(|&d| d >= self.p) {
            return Err(Error::Parse(format!(
                "coefficient vector {v:?} invalid over F_{}^{}",
                self.p, self.n
            )));
        }
        Ok(vec_to_index(v, self.p) as FqElem)
    }

    /// F_p-coordinate vector of an element, length n.
    pub fn to_vec(&self, a: FqElem) -> Vec<u32> {
        index_to_vec(a as u32, self.p, self.n)
    }

    /// Iterator index order: 0, 1, .., q-1 (base-p digit encoding).
    pub fn elements(&self) -> impl Iterator<Item = FqElem> {
        0..self.q as FqElem
    }
}

fn vec_to_index(v: &[u32], p: u32) -> u32 {
    let mut out = 0u32;
    for &d in v.iter().rev() {
        out = out * p + d;
    }
    out
}

fn index_to_vec(mut i: u32, p: u32, n: u32) -> Vec<u32> {
    let mut v = vec![0u32; n as usize];
    for slot in v.iter_mut() {
        *slot = i % p;
        i /= p;
    }
    debug_assert_eq!(i, 0);
    v
}

fn mul_by_x(cur: &[u32], modulus: &[u32], p: u32, n: u32) -> Vec<u32> {
    let n = n as usize;
    let mut out = vec![0u32; n];
    let top = cur[n - 1];
    for i in 1..n {
        out[i] = cur[i - 1];
    }
    if top != 0 {
        // x^n ≡ -(c_0 + ... + c_{n-1} x^{n-1})
        for i in 0..n {
            let sub = (top * modulus[i]) % p;
            out[i] = (out[i] + p - sub) % p;
        }
    }
    out
}

/// Order of the element x in (F_p[x]/f)^× equals p^n - 1, checked by direct
/// iteration while building the candidate power sequence.
fn x_is_primitive(modulus: &[u32], p: u32, n: u32) -> bool {
    let q = p.pow(n);
    let mut cur = vec![0u32; n as usize];
    cur[0] = 1;
    for step in 1..q {
        cur = mul_by_x(&cur, modulus, p, n);
        let is_one = cur[0] == 1 && cur[1..].iter().all(|&d| d == 0);
        let is_zero = cur.iter().all(|&d| d == 0);
        if is_zero {
            return false; // f not squarefree/irreducible enough to matter
        }
        if is_one {
            return step == q - 1;
        }
    }
    false
}

fn find_primitive_modulus(p: u32, n: u32) -> Vec<u32> {
    if n == 1 {
        // x - g, g the smallest primitive root mod p.
        let fac = prime_factors(p - 1);
        for g in 1..p {
            if fac.iter().all(|&l| mod_pow(g, (p - 1) / l, p) != 1) {
                return vec![(p - g) % p, 1];
            }
        }
        unreachable!("no primitive root mod {p}");
    }
    assert!(is_prime(p));
    // Enumerate tails (c_0, .., c_{n-1}) in base-p counter order.
    let total = p.pow(n);
    for code in 0..total {
        let mut modulus = index_to_vec(code, p, n);
        modulus.push(1);
        if modulus[0] == 0 {
            continue; // x | f
        }
        if x_is_primitive(&modulus, p, n) {
            return modulus;
        }
    }
    unreachable!("no primitive polynomial of degree {n} over F_{p}");
}

fn mod_pow(b: u32, mut e: u32, m: u32) -> u32 {
    let mut out = 1u64;
    let mut bb = b as u64 % m as u64;
    while e > 0 {
        if e & 1 == 1 {
            out = out * bb % m as u64;
        }
        bb = bb * bb % m as u64;
        e >>= 1;
    }
    out as u32
}

/// Arithmetic context for F_{q^m}, realized as F_q[y]/(g) with g the smallest
/// primitive monic polynomial of degree m over F_q (same digit-counter order
/// as for `FqCtx`, using F_q element indices as digits).
pub struct FqmCtx {
    pub base: &'static FqCtx,
    pub m: u32,
    pub qm: u64,
    /// Modulus coefficients over F_q, length m+1, monic.
    pub modulus: Vec<FqElem>,
    exp: Vec<u32>,
    log: Vec<u32>,
    frob_q: Vec<u32>,
}

impl FqmCtx {
    pub fn get(q: u32, m: u32) -> Result<&'static FqmCtx, Error> {
        static REGISTRY: OnceLock<Mutex<HashMap<(u32, u32), &'static FqmCtx>>> = OnceLock::new();
        let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = reg.lock().unwrap();
        if let Some(ctx) = map.get(&(q, m)) {
            return Ok(ctx);
        }
        if m == 0 || m > 16 {
            return Err(Error::BadField(format!("extension degree m = {m} out of range")));
        }
        let base = FqCtx::get(q)?;
        let qm = (q as u64).pow(m);
        if qm > 1 << 16 {
            return Err(Error::BadField(format!(
                "q^m = {qm} exceeds the 2^16 table bound for extension fields"
            )));
        }
        let ctx: &'static FqmCtx = Box::leak(Box::new(FqmCtx::build(base, m)));
        map.insert((q, m), ctx);
        Ok(ctx)
    }

    fn build(base: &'static FqCtx, m: u32) -> FqmCtx {
        let q = base.q;
        let qm = (q as u64).pow(m);
        let modulus = find_primitive_modulus_ext(base, m);
        let mut exp = vec![0u32; 2 * (qm as usize - 1)];
        let mut log = vec![u32::MAX; qm as usize];
        let mut cur: Vec<FqElem> = vec![0; m as usize];
        cur[0] = 1;
        for i in 0..(qm as usize - 1) {
            let idx = ext_vec_to_index(&cur, q);
            exp[i] = idx;
            exp[i + (qm as usize - 1)] = idx;
            debug_assert!(log[idx as usize] == u32::MAX);
            log[idx as usize] = i as u32;
            cur = ext_mul_by_y(&cur, &modulus, base);
        }
        let frob_q = (0..qm as u32)
            .map(|a| {
                if a == 0 {
                    0
                } else {
                    let l = log[a as usize] as u64;
                    exp[((l * q as u64) % (qm - 1)) as usize]
                }
            })
            .collect();
        FqmCtx { base, m, qm, modulus, exp, log, frob_q }
    }

    #[inline]
    pub fn add(&self, a: FqmElem, b: FqmElem) -> FqmElem {
        let q = self.base.q;
        let (mut a, mut b) = (a, b);
        let (mut out, mut pw) = (0u64, 1u64);
        while a > 0 || b > 0 {
            let s = self.base.add((a % q) as FqElem, (b % q) as FqElem) as u64;
            out += s * pw;
            a /= q;
            b /= q;
            pw *= q as u64;
        }
        out as FqmElem
    }

    #[inline]
    pub fn neg(&self, a: FqmElem) -> FqmElem {
        let q = self.base.q;
        let mut a = a;
        let (mut out, mut pw) = (0u64, 1u64);
        while a > 0 {
            out += self.base.neg((a % q) as FqElem) as u64 * pw;
            a /= q;
            pw *= q as u64;
        }
        out as FqmElem
    }

    #[inline]
    pub fn sub(&self, a: FqmElem, b: FqmElem) -> FqmElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FqmElem, b: FqmElem) -> FqmElem {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: FqmElem) -> Result<FqmElem, Error> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        let l = self.log[a as usize] as u64;
        Ok(self.exp[((self.qm - 1 - l) % (self.qm - 1)) as usize])
    }

    pub fn pow(&self, a: FqmElem, e: u64) -> FqmElem {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let l = self.log[a as usize] as u64;
        self.exp[((l as u128 * (e % (self.qm - 1)) as u128) % (self.qm - 1) as u128) as usize]
    }

    /// The q-power Frobenius x ↦ x^q, a generator of Gal(F_{q^m}/F_q).
    #[inline]
    pub fn frob(&self, a: FqmElem) -> FqmElem {
        self.frob_q[a as usize]
    }

    /// Embedding F_q ↪ F_{q^m} (constant polynomials in y).
    #[inline]
    pub fn embed(&self, a: FqElem) -> FqmElem {
        a as FqmElem
    }

    /// Inverse of `embed` when the element lies in the base field.
    pub fn try_to_base(&self, a: FqmElem) -> Option<FqElem> {
        if a < self.base.q {
            Some(a as FqElem)
        } else {
            None
        }
    }

    pub fn from_int(&self, r: i64) -> FqmElem {
        self.base.from_int(r) as FqmElem
    }

    /// F_q-coordinate vector (low power of y first), length m.
    pub fn to_vec(&self, a: FqmElem) -> Vec<FqElem> {
        let q = self.base.q;
        let mut v = vec![0 as FqElem; self.m as usize];
        let mut a = a;
        for slot in v.iter_mut() {
            *slot = (a % q) as FqElem;
            a /= q;
        }
        v
    }

    pub fn from_vec(&self, v: &[FqElem]) -> Result<FqmElem, Error> {
        if v.len() > self.m as usize || v.iter().any(|&d| d as u32 >= self.base.q) {
            return Err(Error::Parse(format!("vector {v:?} invalid over F_q^{}", self.m)));
        }
        Ok(ext_vec_to_index(v, self.base.q))
    }

    /// Flat F_p-coordinate vector, length n·m (per F_q digit, low first).
    pub fn to_flat_vec(&self, a: FqmElem) -> Vec<u32> {
        self.to_vec(a).iter().flat_map(|&d| self.base.to_vec(d)).collect()
    }

    pub fn from_flat_vec(&self, v: &[u32]) -> Result<FqmElem, Error> {
        let n = self.base.n as usize;
        if v.len() > n * self.m as usize {
            return Err(Error::Parse("flat vector too long".into()));
        }
        let mut digits = Vec::new();
        for chunk in v.chunks(n) {
            digits.push(self.base.from_vec(chunk)?);
        }
        Ok(ext_vec_to_index(&digits, self.base.q))
    }

    pub fn elements(&self) -> impl Iterator<Item = FqmElem> {
        0..self.qm as FqmElem
    }

    /// Trace to the prime field F_p (used for the even-characteristic data).
    pub fn abs_trace(&self, a: FqmElem) -> u32 {
        let p = self.base.p as u64;
        let total_deg = (self.base.n * self.m) as u64;
        let mut acc = 0;
        let mut cur = a;
        for _ in 0..total_deg {
            acc = self.add(acc, cur);
            cur = self.pow(cur, p);
        }
        debug_assert!(acc < self.base.p);
        acc
    }
}

fn ext_vec_to_index(v: &[FqElem], q: u32) -> u32 {
    let mut out = 0u64;
    for &d in v.iter().rev() {
        out = out * q as u64 + d as u64;
    }
    out as u32
}

fn ext_mul_by_y(cur: &[FqElem], modulus: &[FqElem], base: &FqCtx) -> Vec<FqElem> {
    let m = cur.len();
    let mut out = vec![0 as FqElem; m];
    let top = cur[m - 1];
    for i in 1..m {
        out[i] = cur[i - 1];
    }
    if top != 0 {
        for i in 0..m {
            out[i] = base.sub(out[i], base.mul(top, modulus[i]));
        }
    }
    out
}

fn find_primitive_modulus_ext(base: &'static FqCtx, m: u32) -> Vec<FqElem> {
    let q = base.q;
    let qm = (q as u64).pow(m);
    for code in 0..qm as u32 {
        let mut tail = Vec::with_capacity(m as usize);
        let mut c = code;
        for _ in 0..m {
            tail.push((c % q) as FqElem);
            c /= q;
        }
        if tail[0] == 0 {
            continue;
        }
        let mut modulus = tail.clone();
        modulus.push(1);
        if ext_y_is_primitive(&modulus, base, m, qm) {
            return modulus;
        }
    }
    unreachable!("no primitive polynomial of degree {m} over F_{q}");
}

fn ext_y_is_primitive(modulus: &[FqElem], base: &FqCtx, m: u32, qm: u64) -> bool {
    let mut cur = vec![0 as FqElem; m as usize];
    cur[0] = 1;
    for step in 1..qm {
        cur = ext_mul_by_y(&cur, modulus, base);
        let is_one = cur[0] == 1 && cur[1..].iter().all(|&d| d == 0);
        let is_zero = cur.iter().all(|&d| d == 0);
        if is_zero {
            return false;
        }
        if is_one {
            return step == qm - 1;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f5_basic_arithmetic() {
        let f = FqCtx::get(5).unwrap();
        assert_eq!(f.add(3, 4), 2);
        assert_eq!(f.mul(3, 4), 2);
        assert_eq!(f.inv(2).unwrap(), 3);
        assert_eq!(f.neg(1), 4);
    }

    #[test]
    fn f4_has_primitive_modulus_and_frobenius_fixes_f2() {
        let f = FqCtx::get(4).unwrap();
        // x^2 + x + 1 is the only irreducible quadratic over F_2.
        assert_eq!(f.modulus, vec![1, 1, 1]);
        for a in f.elements() {
            let fr = f.pow(a, 2);
            if a < 2 {
                assert_eq!(fr, a);
            }
        }
        // x * (x+1) = x^2 + x = 1 for this modulus.
        assert_eq!(f.mul(2, 3), 1);
    }

    #[test]
    fn field_axioms_sampled() {
        for q in [2u32, 3, 4, 5, 8, 9, 27, 49] {
            let f = FqCtx::get(q).unwrap();
            let els: Vec<FqElem> = f.elements().collect();
            let pick = |i: usize| els[(i * 7 + 3) % els.len()];
            for i in 0..60 {
                let (a, b, c) = (pick(i), pick(i + 1), pick(i + 2));
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                // Freshman's dream: (a+b)^p = a^p + b^p.
                assert_eq!(
                    f.pow(f.add(a, b), f.p as u64),
                    f.add(f.pow(a, f.p as u64), f.pow(b, f.p as u64))
                );
            }
        }
    }

    #[test]
    fn extension_frobenius_fixed_field_is_fq_exhaustive() {
        for (q, m) in [(2u32, 2u32), (2, 4), (3, 2), (3, 4), (4, 2), (5, 2), (5, 4), (4, 4)] {
            let ext = FqmCtx::get(q, m).unwrap();
            let mut fixed = Vec::new();
            for a in ext.elements() {
                if ext.frob(a) == a {
                    fixed.push(a);
                }
            }
            let embedded: Vec<FqmElem> =
                ext.base.elements().map(|a| ext.embed(a)).collect();
            assert_eq!(fixed, embedded, "q={q} m={m}");
        }
    }

    #[test]
    fn extension_arithmetic_respects_embedding() {
        let f = FqCtx::get(9).unwrap();
        let ext = FqmCtx::get(9, 2).unwrap();
        for a in f.elements() {
            for b in [0u16, 1, 2, 5, 8] {
                assert_eq!(ext.embed(f.mul(a, b)), ext.mul(ext.embed(a), ext.embed(b)));
                assert_eq!(ext.embed(f.add(a, b)), ext.add(ext.embed(a), ext.embed(b)));
            }
        }
    }

    #[test]
    fn flat_vector_round_trip() {
        let ext = FqmCtx::get(4, 2).unwrap();
        for a in ext.elements() {
            let v = ext.to_flat_vec(a);
            assert_eq!(ext.from_flat_vec(&v).unwrap(), a);
        }
    }

    #[test]
    fn rejects_non_prime_powers_and_oversize() {
        assert!(FqCtx::get(6).is_err());
        assert!(FqCtx::get(12).is_err());
        assert!(FqCtx::get(1).is_err());
        assert!(FqCtx::get(1 << 17).is_err());
    }
}
