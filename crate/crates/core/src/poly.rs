//! Dense univariate polynomials over one tower level, coefficients
//! low-degree-first as packed elements.

use crate::gf::{prime_factors, LevelField};

pub(crate) fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub(crate) fn mul(f: &LevelField, a: &[u32], b: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    trim(out)
}

pub(crate) fn sub(f: &LevelField, a: &[u32], b: &[u32]) -> Vec<u32> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            f.sub(
                a.get(i).copied().unwrap_or(0),
                b.get(i).copied().unwrap_or(0),
            )
        })
        .collect();
    trim(out)
}

/// Remainder modulo a nonzero polynomial.
pub(crate) fn rem(f: &LevelField, a: &[u32], m: &[u32]) -> Vec<u32> {
    let m = trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = f.inv(m[dm]).expect("nonzero modulus");
    let mut r = trim(a.to_vec());
    while r.len() > dm {
        let k = r.len() - 1;
        let c = f.mul(r[k], lead_inv);
        let shift = k - dm;
        for (i, &mi) in m.iter().enumerate() {
            r[shift + i] = f.sub(r[shift + i], f.mul(c, mi));
        }
        r = trim(r);
    }
    r
}

pub(crate) fn gcd(f: &LevelField, a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = rem(f, &a, &b);
        a = b;
        b = r;
    }
    a
}

fn mulmod(f: &LevelField, a: &[u32], b: &[u32], m: &[u32]) -> Vec<u32> {
    rem(f, &mul(f, a, b), m)
}

fn powmod(f: &LevelField, a: &[u32], mut e: u64, m: &[u32]) -> Vec<u32> {
    let mut acc = rem(f, &[1], m);
    let mut base = rem(f, a, m);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(f, &acc, &base, m);
        }
        base = mulmod(f, &base, &base, m);
        e >>= 1;
    }
    acc
}

#[cfg(test)]
pub(crate) fn eval(f: &LevelField, a: &[u32], x: u32) -> u32 {
    a.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
}

/// Rabin's test: `m` of degree `d` is irreducible over `F_Q` iff
/// `X^{Q^d} ≡ X (mod m)` and `gcd(X^{Q^{d/r}} - X, m) = 1` for each prime `r | d`.
/// Coefficients of `m` must lie in `f`.
pub(crate) fn is_irreducible(f: &LevelField, m: &[u32]) -> bool {
    let m = trim(m.to_vec());
    if m.len() < 2 {
        return false;
    }
    let d = m.len() - 1;
    if d == 1 {
        return true;
    }
    let q = f.size() as u64;
    let x = vec![0, 1];
    // h_k = X^{Q^k} mod m
    let mut frob = Vec::with_capacity(d + 1);
    let mut h = rem(f, &x, &m);
    frob.push(h.clone());
    for _ in 0..d {
        h = powmod(f, &h, q, &m);
        frob.push(h.clone());
    }
    if frob[d] != rem(f, &x, &m) {
        return false;
    }
    prime_factors(d as u64).into_iter().all(|r| {
        let k = d / r as usize;
        let diff = sub(f, &frob[k], &x);
        let g = gcd(f, &m, &diff);
        g.len() == 1
    })
}
