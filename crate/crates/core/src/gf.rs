//! Exact arithmetic in a four-level finite field tower
//! `F_p ⊆ F_q ⊆ F_{q^t} ⊆ F_{q^{2t}}`.
//!
//! Every element of every level is packed into a single `u32`: the base-`p`
//! digits of the integer are the `F_p`-coordinates of the element with respect
//! to the tower basis, lowest coordinate least significant. Each level's basis
//! extends the basis of the level below, so a sublevel element has the same
//! packed value in every level above it, and its coordinates over any sublevel
//! `B` are the base-`|B|` digits of the packed value. Element order is the
//! integer order of the packed values.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::poly;

/// Largest number of elements a single full scan may visit unless overridden.
pub const DEFAULT_ENUMERATION_BOUND: u64 = 1 << 20;

/// Largest level for which log/antilog tables are built.
const TABLE_LIMIT: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("invalid tower parameter: {0}")]
    BadParameter(String),
    #[error("defining polynomial for level {0} is not irreducible")]
    Reducible(Level),
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(Level, Level),
    #[error("element of level {found} given where level {expected} is required")]
    WrongLevel { expected: Level, found: Level },
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("enumeration of {size} elements exceeds bound {bound}")]
    BoundExceeded { size: u64, bound: u64 },
    #[error("field of size {0} is beyond arithmetic limits")]
    TooLarge(u64),
    #[error("parse error: {0}")]
    Parse(String),
}

/// One level of the tower.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Level {
    /// `F_p`
    Prime,
    /// `F_q`, `q = p^e`
    Base,
    /// `F_{q^t}`
    Mid,
    /// `F_{q^{2t}}`
    Top,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Prime, Level::Base, Level::Mid, Level::Top];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn below(self) -> Option<Level> {
        match self {
            Level::Prime => None,
            Level::Base => Some(Level::Prime),
            Level::Mid => Some(Level::Base),
            Level::Top => Some(Level::Mid),
        }
    }

    pub fn above(self) -> Option<Level> {
        match self {
            Level::Prime => Some(Level::Base),
            Level::Base => Some(Level::Mid),
            Level::Mid => Some(Level::Top),
            Level::Top => None,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Prime => "p",
            Level::Base => "q",
            Level::Mid => "q^t",
            Level::Top => "q^2t",
        })
    }
}

/// Arithmetic tables for a single level. Values are packed elements.
#[derive(Clone)]
pub struct LevelField {
    level: Level,
    p: u32,
    degree: u32,
    size: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl fmt::Debug for LevelField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevelField")
            .field("level", &self.level)
            .field("p", &self.p)
            .field("degree", &self.degree)
            .field("size", &self.size)
            .finish()
    }
}

#[inline]
pub(crate) fn add_packed(p: u32, a: u32, b: u32) -> u32 {
    if p == 2 {
        return a ^ b;
    }
    let (mut a, mut b) = (a, b);
    let (mut out, mut place) = (0u32, 1u32);
    while a > 0 || b > 0 {
        let d = (a % p + b % p) % p;
        out += d * place;
        place *= p;
        a /= p;
        b /= p;
    }
    out
}

#[inline]
pub(crate) fn neg_packed(p: u32, a: u32) -> u32 {
    if p == 2 {
        return a;
    }
    let mut a = a;
    let (mut out, mut place) = (0u32, 1u32);
    while a > 0 {
        let d = a % p;
        out += ((p - d) % p) * place;
        place *= p;
        a /= p;
    }
    out
}

impl LevelField {
    pub fn level(&self) -> Level {
        self.level
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    /// Degree over `F_p`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// Order of the multiplicative group.
    pub fn order(&self) -> u32 {
        self.size - 1
    }

    pub fn contains(&self, x: u32) -> bool {
        x < self.size
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        add_packed(self.p, a, b)
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        neg_packed(self.p, a)
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        add_packed(self.p, a, neg_packed(self.p, b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] + self.log[b as usize];
        let order = self.size - 1;
        self.exp[(if s >= order { s - order } else { s }) as usize]
    }

    #[inline]
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let l = self.log[a as usize];
        Some(self.exp[if l == 0 { 0 } else { (self.size - 1 - l) as usize }])
    }

    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = (self.size - 1) as u64;
        let l = (self.log[a as usize] as u64 * (e % order)) % order;
        self.exp[l as usize]
    }

    /// Discrete log of a nonzero element with respect to the table generator.
    pub fn log(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    /// Power of the table generator.
    pub fn exp(&self, k: u64) -> u32 {
        self.exp[(k % (self.size - 1) as u64) as usize]
    }

    /// `a^{m^k}` for a sublevel of size `m`.
    pub fn frobenius(&self, a: u32, m: u32, k: u32) -> u32 {
        self.pow(a, frobenius_exponent(m, k, self.size - 1))
    }

    /// Multiply by an `F_p` scalar.
    pub fn scale_prime(&self, c: u32, a: u32) -> u32 {
        let p = self.p;
        let c = c % p;
        if c == 0 {
            return 0;
        }
        if p == 2 {
            return a;
        }
        let mut a = a;
        let (mut out, mut place) = (0u32, 1u32);
        while a > 0 {
            out += ((a % p) * c % p) * place;
            place *= p;
            a /= p;
        }
        out
    }

    fn prime(p: u32) -> Self {
        let order = p - 1;
        let factors = prime_factors(order as u64);
        let g = (1..p)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&r| mod_pow(g as u64, order as u64 / r, p as u64) != 1)
            })
            .expect("prime field has a primitive root");
        Self::from_generator(Level::Prime, p, 1, p, g, |a, b| {
            ((a as u64 * b as u64) % p as u64) as u32
        })
    }

    fn extension(lower: &LevelField, level: Level, modulus: &[u32]) -> Self {
        let d = modulus.len() - 1;
        if d == 1 {
            let mut f = lower.clone();
            f.level = level;
            return f;
        }
        let qb = lower.size;
        let size = qb.pow(d as u32);
        let mul = |a: u32, b: u32| -> u32 {
            let da = digits(a, qb, d);
            let db = digits(b, qb, d);
            let prod = poly::mul(lower, &da, &db);
            let rem = poly::rem(lower, &prod, modulus);
            pack(&rem, qb)
        };
        let order = (size - 1) as u64;
        let factors = prime_factors(order);
        let slow_pow = |a: u32, mut e: u64| {
            let (mut base, mut acc) = (a, 1u32);
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul(acc, base);
                }
                base = mul(base, base);
                e >>= 1;
            }
            acc
        };
        let g = (1..size)
            .find(|&g| factors.iter().all(|&r| slow_pow(g, order / r) != 1))
            .expect("finite field has a primitive element");
        Self::from_generator(level, lower.p, lower.degree * d as u32, size, g, mul)
    }

    fn from_generator(
        level: Level,
        p: u32,
        degree: u32,
        size: u32,
        g: u32,
        mul: impl Fn(u32, u32) -> u32,
    ) -> Self {
        let order = size - 1;
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![0u32; size as usize];
        let mut x = 1u32;
        for k in 0..order {
            exp.push(x);
            log[x as usize] = k;
            x = mul(x, g);
        }
        debug_assert_eq!(x, 1);
        LevelField {
            level,
            p,
            degree,
            size,
            exp,
            log,
        }
    }
}

/// `m^k mod order`, the exponent of the `k`-th power of the `m`-Frobenius.
pub(crate) fn frobenius_exponent(m: u32, k: u32, order: u32) -> u64 {
    if order <= 1 {
        return 1;
    }
    mod_pow(m as u64, k as u64, order as u64)
}

pub(crate) fn digits(mut x: u32, base: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(x % base);
        x /= base;
    }
    out
}

pub(crate) fn pack(coords: &[u32], base: u32) -> u32 {
    coords.iter().rev().fold(0u32, |acc, &c| acc * base + c)
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn is_prime(n: u32) -> bool {
    n >= 2 && prime_factors(n as u64) == [n as u64]
}

/// Optional replacements for the default defining polynomials, coefficients
/// low-degree-first as packed elements of the level below, leading 1 included.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub base: Option<Vec<u32>>,
    pub mid: Option<Vec<u32>>,
    pub top: Option<Vec<u32>>,
}

struct TowerData {
    p: u32,
    e: u32,
    t: u32,
    polys: [Vec<u32>; 3],
    fields: [LevelField; 4],
    xi_a: u32,
    xi_b: u32,
}

/// The tower `F_p ⊆ F_q ⊆ F_{q^t} ⊆ F_{q^{2t}}` with fixed defining
/// polynomials. Cheap to clone.
#[derive(Clone)]
pub struct FieldTower(Arc<TowerData>);

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldTower({})", self.to_text())
    }
}

impl PartialEq for FieldTower {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p
                && self.0.e == other.0.e
                && self.0.t == other.0.t
                && self.0.polys == other.0.polys)
    }
}

impl Eq for FieldTower {}

/// A packed element tagged with its level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    level: Level,
    value: u32,
}

impl FieldElement {
    pub fn level(self) -> Level {
        self.level
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }
}

impl FieldTower {
    /// Tower with the default (lexicographically smallest) defining polynomials.
    pub fn new(p: u32, e: u32, t: u32) -> Result<Self, FieldError> {
        Self::with_overrides(p, e, t, &Overrides::default())
    }

    pub fn with_overrides(p: u32, e: u32, t: u32, ov: &Overrides) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 || t == 0 {
            return Err(FieldError::BadParameter("e and t must be positive".into()));
        }
        let top = (p as u64)
            .checked_pow(2 * e * t)
            .filter(|&s| s <= TABLE_LIMIT)
            .ok_or(FieldError::TooLarge(
                (p as u64).saturating_pow((2 * e * t).min(64)),
            ))?;
        debug_assert!(top <= TABLE_LIMIT);

        let prime = LevelField::prime(p);
        let base_poly = choose_poly(&prime, Level::Base, e as usize, ov.base.as_deref())?;
        let base = LevelField::extension(&prime, Level::Base, &base_poly);
        let mid_poly = choose_poly(&base, Level::Mid, t as usize, ov.mid.as_deref())?;
        let mid = LevelField::extension(&base, Level::Mid, &mid_poly);
        let top_poly = choose_poly(&mid, Level::Top, 2, ov.top.as_deref())?;
        let topf = LevelField::extension(&mid, Level::Top, &top_poly);

        // X^2 + c1 X + c0 = X^2 - A X - B
        let xi_a = mid.neg(top_poly[1]);
        let xi_b = mid.neg(top_poly[0]);
        Ok(FieldTower(Arc::new(TowerData {
            p,
            e,
            t,
            polys: [base_poly, mid_poly, top_poly],
            fields: [prime, base, mid, topf],
            xi_a,
            xi_b,
        })))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn e(&self) -> u32 {
        self.0.e
    }

    pub fn t(&self) -> u32 {
        self.0.t
    }

    pub fn n(&self) -> u32 {
        2 * self.0.t
    }

    pub fn q(&self) -> u32 {
        self.0.fields[1].size
    }

    pub fn field(&self, level: Level) -> &LevelField {
        &self.0.fields[level.index()]
    }

    pub fn size(&self, level: Level) -> u32 {
        self.field(level).size
    }

    /// Degree of `upper` over `lower`.
    pub fn relative_degree(&self, upper: Level, lower: Level) -> u32 {
        self.field(upper).degree / self.field(lower).degree
    }

    /// Defining polynomials of `F_q/F_p`, `F_{q^t}/F_q`, `F_{q^{2t}}/F_{q^t}`.
    pub fn polys(&self) -> &[Vec<u32>; 3] {
        &self.0.polys
    }

    /// The canonical generator of the top level over `F_{q^t}`.
    pub fn xi(&self) -> u32 {
        self.size(Level::Mid)
    }

    /// `A` in `ξ² = Aξ + B`.
    pub fn xi_a(&self) -> u32 {
        self.0.xi_a
    }

    /// `B` in `ξ² = Aξ + B`.
    pub fn xi_b(&self) -> u32 {
        self.0.xi_b
    }

    pub fn ptr_eq(&self, other: &FieldTower) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Conjugate of a top-level element over `F_{q^t}`.
    pub fn conjugate(&self, x: u32) -> u32 {
        let top = self.field(Level::Top);
        top.frobenius(x, self.size(Level::Mid), 1)
    }

    /// Coordinates `(x0, x1)` of `x = x0 + x1·w` over `F_{q^t}` for a
    /// top-level `w ∉ F_{q^t}`.
    pub fn split_over(&self, x: u32, w: u32) -> (u32, u32) {
        let top = self.field(Level::Top);
        let wb = self.conjugate(w);
        let num = top.sub(x, self.conjugate(x));
        let den = top.sub(w, wb);
        let x1 = top.div(num, den).expect("generator lies outside F_{q^t}");
        let x0 = top.sub(x, top.mul(x1, w));
        debug_assert!(x0 < self.size(Level::Mid) && x1 < self.size(Level::Mid));
        (x0, x1)
    }

    /// `(A, B)` with `w² = A·w + B`.
    pub fn quadratic_of(&self, w: u32) -> (u32, u32) {
        let top = self.field(Level::Top);
        let wb = self.conjugate(w);
        (top.add(w, wb), top.neg(top.mul(w, wb)))
    }

    pub fn element(&self, level: Level, value: u32) -> Result<FieldElement, FieldError> {
        if value >= self.size(level) {
            return Err(FieldError::Parse(format!(
                "value {value} does not lie in level {level}"
            )));
        }
        Ok(FieldElement { level, value })
    }

    pub fn zero(&self, level: Level) -> FieldElement {
        FieldElement { level, value: 0 }
    }

    pub fn one(&self, level: Level) -> FieldElement {
        FieldElement { level, value: 1 }
    }

    /// Element of `level` from coordinates over the level immediately below.
    pub fn from_coords(
        &self,
        level: Level,
        coords: &[FieldElement],
    ) -> Result<FieldElement, FieldError> {
        let below = level
            .below()
            .ok_or_else(|| FieldError::BadParameter("F_p has no lower level".into()))?;
        let d = self.relative_degree(level, below) as usize;
        if coords.len() != d {
            return Err(FieldError::BadParameter(format!(
                "expected {d} coordinates, got {}",
                coords.len()
            )));
        }
        for c in coords {
            self.expect_level(*c, below)?;
        }
        let vals: Vec<u32> = coords.iter().map(|c| c.value).collect();
        Ok(FieldElement {
            level,
            value: pack(&vals, self.size(below)),
        })
    }

    /// Coordinates over the level immediately below (`F_p` elements are their
    /// own single coordinate).
    pub fn coords(&self, x: FieldElement) -> Vec<FieldElement> {
        match x.level.below() {
            None => vec![x],
            Some(below) => {
                let d = self.relative_degree(x.level, below) as usize;
                digits(x.value, self.size(below), d)
                    .into_iter()
                    .map(|value| FieldElement {
                        level: below,
                        value,
                    })
                    .collect()
            }
        }
    }

    fn expect_level(&self, x: FieldElement, level: Level) -> Result<(), FieldError> {
        if x.level != level {
            return Err(FieldError::WrongLevel {
                expected: level,
                found: x.level,
            });
        }
        Ok(())
    }

    fn same_level(&self, a: FieldElement, b: FieldElement) -> Result<Level, FieldError> {
        if a.level != b.level {
            return Err(FieldError::LevelMismatch(a.level, b.level));
        }
        Ok(a.level)
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        let level = self.same_level(a, b)?;
        Ok(FieldElement {
            level,
            value: self.field(level).add(a.value, b.value),
        })
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        let level = self.same_level(a, b)?;
        Ok(FieldElement {
            level,
            value: self.field(level).sub(a.value, b.value),
        })
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        let level = self.same_level(a, b)?;
        Ok(FieldElement {
            level,
            value: self.field(level).mul(a.value, b.value),
        })
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement {
            level: a.level,
            value: self.field(a.level).neg(a.value),
        }
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        let value = self
            .field(a.level)
            .inv(a.value)
            .ok_or(FieldError::ZeroInverse)?;
        Ok(FieldElement {
            level: a.level,
            value,
        })
    }

    /// `x^{q^k}`.
    pub fn frobenius(&self, x: FieldElement, k: u32) -> FieldElement {
        FieldElement {
            level: x.level,
            value: self.field(x.level).frobenius(x.value, self.q(), k),
        }
    }

    pub fn embed(&self, x: FieldElement, to: Level) -> Result<FieldElement, FieldError> {
        if to < x.level {
            return Err(FieldError::WrongLevel {
                expected: to,
                found: x.level,
            });
        }
        Ok(FieldElement {
            level: to,
            value: x.value,
        })
    }

    /// The preimage in the lower level `to`, or `None` when `x` lies outside it.
    pub fn project(&self, x: FieldElement, to: Level) -> Result<Option<FieldElement>, FieldError> {
        if to > x.level {
            return Err(FieldError::WrongLevel {
                expected: to,
                found: x.level,
            });
        }
        Ok((x.value < self.size(to)).then_some(FieldElement {
            level: to,
            value: x.value,
        }))
    }

    /// `Tr_{q^t/q}` on a packed element of `F_{q^t}`.
    pub fn trace_mid(&self, x: u32) -> u32 {
        let mid = self.field(Level::Mid);
        let q = self.q();
        (0..self.t()).fold(0, |acc, i| mid.add(acc, mid.frobenius(x, q, i)))
    }

    /// `N_{q^t/q}` on a packed element of `F_{q^t}`.
    pub fn norm_mid(&self, x: u32) -> u32 {
        let mid = self.field(Level::Mid);
        let q = self.q();
        (0..self.t()).fold(1, |acc, i| mid.mul(acc, mid.frobenius(x, q, i)))
    }

    /// `Tr_{q^{2t}/q^t}` on a packed element of `F_{q^{2t}}`.
    pub fn trace_top(&self, x: u32) -> u32 {
        self.field(Level::Top).add(x, self.conjugate(x))
    }

    /// `N_{q^{2t}/q^t}` on a packed element of `F_{q^{2t}}`.
    pub fn norm_top(&self, x: u32) -> u32 {
        self.field(Level::Top).mul(x, self.conjugate(x))
    }

    /// `Tr_{q^t/q}`; the result is checked to lie in `F_q`.
    pub fn rel_trace(&self, x: FieldElement) -> Result<FieldElement, FieldError> {
        self.expect_level(x, Level::Mid)?;
        let value = self.trace_mid(x.value);
        assert!(value < self.q(), "relative trace left F_q");
        Ok(FieldElement {
            level: Level::Base,
            value,
        })
    }

    /// `N_{q^t/q}`; the result is checked to lie in `F_q`.
    pub fn rel_norm(&self, x: FieldElement) -> Result<FieldElement, FieldError> {
        self.expect_level(x, Level::Mid)?;
        let value = self.norm_mid(x.value);
        assert!(value < self.q(), "relative norm left F_q");
        Ok(FieldElement {
            level: Level::Base,
            value,
        })
    }

    /// `Tr_{q^{2t}/q^t}`.
    pub fn top_trace(&self, x: FieldElement) -> Result<FieldElement, FieldError> {
        self.expect_level(x, Level::Top)?;
        let value = self.trace_top(x.value);
        assert!(value < self.size(Level::Mid));
        Ok(FieldElement {
            level: Level::Mid,
            value,
        })
    }

    /// `N_{q^{2t}/q^t}`.
    pub fn top_norm(&self, x: FieldElement) -> Result<FieldElement, FieldError> {
        self.expect_level(x, Level::Top)?;
        let value = self.norm_top(x.value);
        assert!(value < self.size(Level::Mid));
        Ok(FieldElement {
            level: Level::Mid,
            value,
        })
    }

    /// Every element of `level` in packed order.
    pub fn enumerate_level(
        &self,
        level: Level,
        bound: u64,
    ) -> Result<impl Iterator<Item = FieldElement>, FieldError> {
        let size = self.size(level);
        check_bound(size as u64, bound)?;
        Ok((0..size).map(move |value| FieldElement { level, value }))
    }

    /// Flattened `F_p` coordinates in brackets, lowest first.
    pub fn format_element(&self, level: Level, x: u32) -> String {
        let d = self.field(level).degree as usize;
        let ds: Vec<String> = digits(x, self.p(), d)
            .iter()
            .map(|c| c.to_string())
            .collect();
        format!("[{}]", ds.join(","))
    }

    pub fn parse_element(&self, level: Level, s: &str) -> Result<u32, FieldError> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| FieldError::Parse(format!("expected [..] element, got {s:?}")))?;
        let d = self.field(level).degree as usize;
        let cs = inner
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<u32>()
                    .ok()
                    .filter(|&v| v < self.p())
                    .ok_or_else(|| FieldError::Parse(format!("bad coordinate {c:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if cs.len() != d {
            return Err(FieldError::Parse(format!(
                "element of level {level} needs {d} coordinates, got {}",
                cs.len()
            )));
        }
        Ok(pack(&cs, self.p()))
    }

    /// Canonical text form `p,e,t;poly1;poly2;poly3`.
    pub fn to_text(&self) -> String {
        let polys: Vec<String> = self
            .0
            .polys
            .iter()
            .map(|c| {
                c.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        format!(
            "{},{},{};{}",
            self.0.p,
            self.0.e,
            self.0.t,
            polys.join(";")
        )
    }

    /// Minimal polynomial over `F_q` of a top-level element, low-degree-first.
    pub fn min_poly_over_base(&self, x: u32) -> Vec<u32> {
        let top = self.field(Level::Top);
        let q = self.q();
        let mut conj = vec![x];
        loop {
            let next = top.frobenius(*conj.last().unwrap(), q, 1);
            if next == x {
                break;
            }
            conj.push(next);
        }
        let mut acc = vec![1u32];
        for c in conj {
            acc = poly::mul(top, &acc, &[top.neg(c), 1]);
        }
        debug_assert!(acc.iter().all(|&c| c < q));
        acc
    }
}

pub fn check_bound(size: u64, bound: u64) -> Result<(), FieldError> {
    if size > bound {
        return Err(FieldError::BoundExceeded { size, bound });
    }
    Ok(())
}

impl fmt::Display for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for FieldTower {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(';').collect();
        if parts.len() != 4 {
            return Err(FieldError::Parse(format!("expected 4 ';' fields in {s:?}")));
        }
        let nums = |text: &str| -> Result<Vec<u32>, FieldError> {
            text.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<u32>()
                        .map_err(|_| FieldError::Parse(format!("bad integer {x:?}")))
                })
                .collect()
        };
        let head = nums(parts[0])?;
        let [p, e, t] = head[..] else {
            return Err(FieldError::Parse("expected p,e,t".into()));
        };
        let ov = Overrides {
            base: Some(nums(parts[1])?),
            mid: Some(nums(parts[2])?),
            top: Some(nums(parts[3])?),
        };
        FieldTower::with_overrides(p, e, t, &ov)
    }
}

fn choose_poly(
    lower: &LevelField,
    level: Level,
    degree: usize,
    given: Option<&[u32]>,
) -> Result<Vec<u32>, FieldError> {
    if let Some(given) = given {
        if given.len() != degree + 1
            || given[degree] != 1
            || given.iter().any(|&c| c >= lower.size)
        {
            return Err(FieldError::BadParameter(format!(
                "override for level {level} must be monic of degree {degree} over the level below"
            )));
        }
        if !poly::is_irreducible(lower, given) {
            return Err(FieldError::Reducible(level));
        }
        return Ok(given.to_vec());
    }
    let qb = lower.size as u64;
    let count = qb.pow(degree as u32);
    for idx in 0..count {
        let mut coeffs = digits(idx as u32, lower.size, degree);
        coeffs.push(1);
        if poly::is_irreducible(lower, &coeffs) {
            return Ok(coeffs);
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cardinalities() {
        let t = FieldTower::new(2, 1, 2).unwrap();
        assert_eq!(t.size(Level::Top), 16);
        assert_eq!(t.n(), 4);
        let t = FieldTower::new(3, 1, 3).unwrap();
        assert_eq!(t.size(Level::Top), 729);
        assert_eq!(t.q(), 3);
        let t = FieldTower::new(2, 2, 2).unwrap();
        assert_eq!(t.q(), 4);
        assert_eq!(t.size(Level::Top), 256);
    }

    #[test]
    fn deterministic_polys() {
        let a = FieldTower::new(2, 1, 2).unwrap();
        let b = FieldTower::new(2, 1, 2).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert!(!a.ptr_eq(&b));
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(FieldTower::new(4, 1, 2).unwrap_err(), FieldError::NotPrime(4));
        assert!(matches!(
            FieldTower::new(2, 0, 2),
            Err(FieldError::BadParameter(_))
        ));
        // x^2 + 1 = (x + 1)^2 over F_2
        let ov = Overrides {
            mid: Some(vec![1, 0, 1]),
            ..Default::default()
        };
        assert_eq!(
            FieldTower::with_overrides(2, 1, 2, &ov).unwrap_err(),
            FieldError::Reducible(Level::Mid)
        );
        assert!(matches!(
            FieldTower::new(2, 1, 20),
            Err(FieldError::TooLarge(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        for (p, e, t) in [(2, 1, 2), (3, 1, 3), (2, 2, 2), (5, 1, 1), (2, 1, 5)] {
            let tower = FieldTower::new(p, e, t).unwrap();
            let text = tower.to_text();
            let back: FieldTower = text.parse().unwrap();
            assert_eq!(back.to_text(), text);
            assert_eq!(back, tower);
        }
        assert!("2,1,2;0,1".parse::<FieldTower>().is_err());
    }

    #[test]
    fn xi_satisfies_its_quadratic() {
        for (p, e, t) in [(2, 1, 2), (3, 1, 3), (2, 2, 2), (3, 1, 2)] {
            let tower = FieldTower::new(p, e, t).unwrap();
            let top = tower.field(Level::Top);
            let xi = tower.xi();
            assert!(xi >= tower.size(Level::Mid));
            let lhs = top.mul(xi, xi);
            let rhs = top.add(top.mul(tower.xi_a(), xi), tower.xi_b());
            assert_eq!(lhs, rhs);
            assert_eq!(tower.quadratic_of(xi), (tower.xi_a(), tower.xi_b()));
            let xi_el = tower.element(Level::Top, xi).unwrap();
            assert_eq!(tower.project(xi_el, Level::Mid).unwrap(), None);
        }
    }

    #[test]
    fn field_axioms_on_samples() {
        let tower = FieldTower::new(3, 1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for level in Level::ALL {
            let size = tower.size(level);
            for _ in 0..50 {
                let x = tower
                    .element(level, rng.random_range(1..size))
                    .unwrap();
                let y = tower.element(level, rng.random_range(0..size)).unwrap();
                let z = tower.element(level, rng.random_range(0..size)).unwrap();
                let xi = tower.inv(x).unwrap();
                assert_eq!(tower.mul(x, xi).unwrap(), tower.one(level));
                assert_eq!(tower.add(x, tower.neg(x)).unwrap(), tower.zero(level));
                let lhs = tower.mul(x, tower.add(y, z).unwrap()).unwrap();
                let rhs = tower
                    .add(tower.mul(x, y).unwrap(), tower.mul(x, z).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs);
                let a = tower.mul(tower.mul(x, y).unwrap(), z).unwrap();
                let b = tower.mul(x, tower.mul(y, z).unwrap()).unwrap();
                assert_eq!(a, b);
            }
        }
        assert_eq!(
            tower.inv(tower.zero(Level::Top)).unwrap_err(),
            FieldError::ZeroInverse
        );
        assert!(matches!(
            tower.add(tower.one(Level::Top), tower.one(Level::Mid)),
            Err(FieldError::LevelMismatch(..))
        ));
    }

    #[test]
    fn squaring_is_frobenius_in_characteristic_two() {
        let tower = FieldTower::new(2, 1, 3).unwrap();
        for x in tower.enumerate_level(Level::Top, 1 << 20).unwrap() {
            assert_eq!(tower.mul(x, x).unwrap(), tower.frobenius(x, 1));
        }
    }

    #[test]
    fn embed_and_project() {
        let tower = FieldTower::new(2, 1, 2).unwrap();
        for x in tower.enumerate_level(Level::Mid, 1 << 20).unwrap() {
            let up = tower.embed(x, Level::Top).unwrap();
            assert_eq!(tower.project(up, Level::Mid).unwrap(), Some(x));
        }
        assert_eq!(
            tower.embed(tower.one(Level::Base), Level::Top).unwrap(),
            tower.one(Level::Top)
        );
        let tower = FieldTower::new(3, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mid = tower.size(Level::Mid);
        for _ in 0..100 {
            let a = tower.element(Level::Mid, rng.random_range(0..mid)).unwrap();
            let b = tower.element(Level::Mid, rng.random_range(0..mid)).unwrap();
            let prod_then = tower.embed(tower.mul(a, b).unwrap(), Level::Top).unwrap();
            let then_prod = tower
                .mul(
                    tower.embed(a, Level::Top).unwrap(),
                    tower.embed(b, Level::Top).unwrap(),
                )
                .unwrap();
            assert_eq!(prod_then, then_prod);
        }
    }

    #[test]
    fn coords_round_trip() {
        let tower = FieldTower::new(3, 2, 2).unwrap();
        for level in [Level::Base, Level::Mid, Level::Top] {
            for v in [0, 1, 5, tower.size(level) - 1] {
                let x = tower.element(level, v).unwrap();
                let c = tower.coords(x);
                assert_eq!(tower.from_coords(level, &c).unwrap(), x);
            }
        }
    }

    #[test]
    fn trace_and_norm() {
        let tower = FieldTower::new(3, 1, 3).unwrap();
        let one = tower.one(Level::Mid);
        assert_eq!(tower.rel_trace(one).unwrap().value(), 0);
        assert_eq!(tower.rel_norm(one).unwrap().value(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x = tower.element(Level::Mid, rng.random_range(0..27)).unwrap();
            let y = tower.element(Level::Mid, rng.random_range(0..27)).unwrap();
            let lhs = tower.rel_trace(tower.add(x, y).unwrap()).unwrap();
            let rhs = tower
                .add(tower.rel_trace(x).unwrap(), tower.rel_trace(y).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
        assert!(tower.rel_trace(tower.one(Level::Top)).is_err());
    }

    #[test]
    fn trace_is_frobenius_fixed() {
        let tower = FieldTower::new(2, 2, 3).unwrap();
        for x in tower.enumerate_level(Level::Mid, 1 << 20).unwrap() {
            let tr = tower.rel_trace(x).unwrap();
            let up = tower.embed(tr, Level::Mid).unwrap();
            assert_eq!(tower.frobenius(up, 1), up);
        }
    }

    #[test]
    fn frobenius_is_a_bijection_on_every_level() {
        let tower = FieldTower::new(2, 2, 2).unwrap();
        for level in Level::ALL {
            let mut seen = vec![false; tower.size(level) as usize];
            for x in tower.enumerate_level(level, 1 << 20).unwrap() {
                let y = tower.frobenius(x, 1);
                assert!(!seen[y.value() as usize]);
                seen[y.value() as usize] = true;
            }
        }
    }

    #[test]
    fn enumeration_order_and_bound() {
        let tower = FieldTower::new(2, 1, 2).unwrap();
        let base: Vec<_> = tower.enumerate_level(Level::Base, 1 << 20).unwrap().collect();
        assert_eq!(base.len(), 2);
        assert!(base[0].is_zero());
        let tower = FieldTower::new(3, 1, 3).unwrap();
        let a: Vec<_> = tower.enumerate_level(Level::Mid, 1 << 20).unwrap().collect();
        let b: Vec<_> = tower.enumerate_level(Level::Mid, 1 << 20).unwrap().collect();
        assert_eq!(a.len(), 27);
        assert_eq!(a, b);
        assert!(matches!(
            tower.enumerate_level(Level::Top, 100),
            Err(FieldError::BoundExceeded { .. })
        ));
    }

    #[test]
    fn element_text() {
        let tower = FieldTower::new(3, 1, 2).unwrap();
        for v in 0..81 {
            let s = tower.format_element(Level::Top, v);
            assert_eq!(tower.parse_element(Level::Top, &s).unwrap(), v);
        }
        assert!(tower.parse_element(Level::Top, "[1,2]").is_err());
        assert!(tower.parse_element(Level::Top, "[3,0,0,0]").is_err());
    }

    #[test]
    fn split_over_generator() {
        let tower = FieldTower::new(3, 1, 2).unwrap();
        let top = tower.field(Level::Top);
        let w = top.add(tower.xi(), 1);
        for x in 0..81 {
            let (x0, x1) = tower.split_over(x, w);
            assert_eq!(top.add(x0, top.mul(x1, w)), x);
        }
    }

    #[test]
    fn min_poly_has_element_as_root() {
        let tower = FieldTower::new(2, 1, 2).unwrap();
        let top = tower.field(Level::Top);
        let g = top.exp(1);
        let m = tower.min_poly_over_base(g);
        assert_eq!(m.len(), 5);
        assert_eq!(poly::eval(top, &m, g), 0);
        assert!(poly::is_irreducible(tower.field(Level::Base), &m));
    }
}
