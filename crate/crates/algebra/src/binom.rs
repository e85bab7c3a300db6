//! Binomial coefficients: exact big integers, residues mod p via Lucas, and
//! p-adic generalizations used for binomial series with exponent in Z_p.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Exact binomial coefficient via the multiplicative formula.
pub fn binom_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut out = BigUint::one();
    for i in 0..k {
        out *= n - i;
        out /= i + 1;
    }
    out
}

/// binom(n, k) mod p by Lucas' theorem: the product of digit binomials of n
/// and k in base p. Any digit of k exceeding the digit of n kills the product.
pub fn binom_mod_p(n: u64, k: u64, p: u32) -> u32 {
    if k > n {
        return 0;
    }
    let p64 = p as u64;
    let mut n = n;
    let mut k = k;
    let mut out = 1u64;
    while k > 0 || n > 0 {
        let (nd, kd) = (n % p64, k % p64);
        if kd > nd {
            return 0;
        }
        out = out * small_binom_mod(nd, kd, p64) % p64;
        n /= p64;
        k /= p64;
    }
    out as u32
}

/// Signed-argument convenience: binom over the integers, reduced mod p.
/// For negative n uses binom(n, k) = (-1)^k binom(k - n - 1, k).
pub fn binom_mod_p_signed(n: i64, k: u64, p: u32) -> u32 {
    if n >= 0 {
        binom_mod_p(n as u64, k, p)
    } else {
        let b = binom_mod_p((k as i64 - n - 1) as u64, k, p);
        if k % 2 == 0 {
            b
        } else {
            (p - b) % p
        }
    }
}

fn small_binom_mod(n: u64, k: u64, p: u64) -> u64 {
    // n, k < p: direct product with modular inverses, p small.
    let mut num = 1u64;
    let mut den = 1u64;
    let k = k.min(n - k);
    for i in 0..k {
        num = num * ((n - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    num * mod_inv(den, p) % p
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p prime, a != 0 mod p.
    mod_pow(a, p - 2, p)
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut out = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            out = out * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    out
}

/// binom(α, k) mod p for a p-adic integer α given by its low base-p digits.
///
/// The p-adic Lucas theorem: binom(α, k) ≡ Π binom(α_i, k_i) (mod p), where
/// α_i are the base-p digits of α and k_i those of k. `alpha_digits` must
/// cover every nonzero digit position of k.
pub fn binom_padic_mod_p(alpha_digits: &[u32], k: u64, p: u32) -> u32 {
    let p64 = p as u64;
    let mut k = k;
    let mut out = 1u64;
    let mut pos = 0usize;
    while k > 0 {
        let kd = k % p64;
        let ad = *alpha_digits
            .get(pos)
            .expect("alpha digit window too short for requested k") as u64;
        if kd > ad {
            return 0;
        }
        out = out * small_binom_mod(ad, kd, p64) % p64;
        k /= p64;
        pos += 1;
    }
    out as u32
}

/// Base-p digits of the p-adic integer a/b (b invertible mod p), enough of
/// them to evaluate `binom_padic_mod_p` for k < p^len.
pub fn padic_digits_of_fraction(a: i64, b: i64, p: u32, len: usize) -> Vec<u32> {
    assert!(b % p as i64 != 0, "denominator not a p-adic unit");
    // a/b mod p^len by modular inversion, then digit extraction.
    let modulus = (p as u128).pow(len as u32);
    let bm = (b.rem_euclid(modulus as i64)) as u128;
    let am = (a.rem_euclid(modulus as i64)) as u128;
    let inv = mod_inv_u128(bm, modulus);
    let mut x = am * inv % modulus;
    let mut digits = Vec::with_capacity(len);
    for _ in 0..len {
        digits.push((x % p as u128) as u32);
        x /= p as u128;
    }
    digits
}

fn mod_inv_u128(a: u128, m: u128) -> u128 {
    // Extended Euclid; gcd(a, m) must be 1.
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    assert!(r0 == 1, "not invertible");
    t0.rem_euclid(m as i128) as u128
}
