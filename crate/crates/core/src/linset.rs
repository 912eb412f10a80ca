//! Linear sets on the projective line over one tower level.
//!
//! A linear set is given by a subspace `U` of `F²` over a sublevel `B`
//! (normally `F_q`); the weight of a point `⟨v⟩` is `dim_B {λ ∈ F : λv ∈ U}`.
//! The default weight route turns that into a rank: with `H` a parity check
//! of `U` and `M_v` the matrix of `λ ↦ λv`, the weight is `m − rank(H·M_v)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gf::{check_bound, digits, FieldError, FieldTower, Level};
use crate::linalg;
use crate::linpoly::{LinPoly, PolyError};
use crate::subspace::{Ambient, FqSubspace, SubspaceError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinSetError {
    #[error("linear set has no product structure S x T")]
    NotSplit,
    #[error("the point parameter must be nonzero")]
    ZeroPoint,
    #[error("layer {i} outside 1..={max}")]
    LayerOutOfRange { i: usize, max: usize },
    #[error("criterion needs both factors of dimension at least 2")]
    FactorTooSmall,
    #[error("the zero codeword has no rank weight")]
    ZeroCodeword,
    #[error("generator must lie outside F_{{q^t}}")]
    GeneratorInSubfield,
    #[error("{0}")]
    Subspace(#[from] SubspaceError),
    #[error("{0}")]
    Poly(#[from] PolyError),
    #[error("{0}")]
    Field(#[from] FieldError),
}

/// A point of the projective line in normal form: `Affine(α)` is `⟨(1, α)⟩`,
/// `Infinity` is `⟨(0, 1)⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ProjPoint {
    Affine(u32),
    Infinity,
}

impl ProjPoint {
    /// Normal form of `⟨(x, y)⟩`; `None` for the zero vector.
    pub fn normalize(tower: &FieldTower, level: Level, x: u32, y: u32) -> Option<ProjPoint> {
        match (x, y) {
            (0, 0) => None,
            (0, _) => Some(ProjPoint::Infinity),
            _ => Some(ProjPoint::Affine(tower.field(level).div(y, x).unwrap())),
        }
    }

    /// A representative vector.
    pub fn vector(self) -> [u32; 2] {
        match self {
            ProjPoint::Affine(a) => [1, a],
            ProjPoint::Infinity => [0, 1],
        }
    }

    /// The point after exchanging the two coordinates.
    pub fn swapped(self, tower: &FieldTower, level: Level) -> ProjPoint {
        let [x, y] = self.vector();
        ProjPoint::normalize(tower, level, y, x).unwrap()
    }

    /// All `|F| + 1` points, affine ones first in element order.
    pub fn all(size: u32) -> impl Iterator<Item = ProjPoint> {
        (0..size).map(ProjPoint::Affine).chain(std::iter::once(ProjPoint::Infinity))
    }

    pub fn format(self, tower: &FieldTower, level: Level) -> String {
        match self {
            ProjPoint::Affine(a) => format!("(1,{})", tower.format_element(level, a)),
            ProjPoint::Infinity => "(0,1)".to_string(),
        }
    }
}

/// Point counts by weight, `w ↦ A_w` for `w ≥ 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeightEnumerator {
    counts: BTreeMap<usize, u64>,
}

impl Serialize for WeightEnumerator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.counts.iter())
    }
}

impl fmt::Display for WeightEnumerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.counts.is_empty() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .counts
            .iter()
            .rev()
            .map(|(&w, &c)| {
                let c = if c == 1 { String::new() } else { c.to_string() };
                match w {
                    1 => format!("{c}X"),
                    _ => format!("{c}X^{w}"),
                }
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

impl FromIterator<(usize, u64)> for WeightEnumerator {
    fn from_iter<I: IntoIterator<Item = (usize, u64)>>(iter: I) -> Self {
        let mut e = WeightEnumerator::default();
        for (w, c) in iter {
            e.add(w, c);
        }
        e
    }
}

impl WeightEnumerator {
    /// Add `count` points of weight `w`; weight 0 is ignored.
    pub fn add(&mut self, w: usize, count: u64) {
        if w > 0 && count > 0 {
            *self.counts.entry(w).or_default() += count;
        }
    }

    pub fn count(&self, w: usize) -> u64 {
        self.counts.get(&w).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn max_weight(&self) -> usize {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// Number of points of the set.
    pub fn size(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `Σ_w A_w (Q^w − 1)`, which equals `Q^rank − 1` for every linear set.
    pub fn vector_count(&self, base_size: u64) -> u128 {
        self.counts
            .iter()
            .map(|(&w, &c)| c as u128 * ((base_size as u128).pow(w as u32) - 1))
            .sum()
    }

    pub fn satisfies_identity(&self, base_size: u64, rank: usize) -> bool {
        self.vector_count(base_size) == (base_size as u128).pow(rank as u32) - 1
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: u64, other: &WeightEnumerator, b: u64) -> WeightEnumerator {
        let mut out = WeightEnumerator::default();
        for (&w, &c) in &self.counts {
            out.add(w, a * c);
        }
        for (&w, &c) in &other.counts {
            out.add(w, b * c);
        }
        out
    }
}

#[derive(Clone)]
pub struct LinearSet {
    u: FqSubspace,
    split: Option<(FqSubspace, FqSubspace)>,
    parity: Vec<Vec<u32>>,
}

impl fmt::Debug for LinearSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearSet(rank {}, U = {})", self.rank(), self.u)
    }
}

impl LinearSet {
    /// `L_U` for a subspace `U` of `F²`.
    pub fn new(u: FqSubspace) -> Result<Self, LinSetError> {
        if u.ambient().copies != 2 {
            return Err(SubspaceError::AmbientMismatch.into());
        }
        let len = 2 * u.degree();
        let parity = linalg::kernel(u.base_field(), u.coord_rows(), len);
        Ok(LinearSet {
            u,
            split: None,
            parity,
        })
    }

    /// `L_{S×T}` for subspaces `S, T` of one field.
    pub fn product(s: &FqSubspace, t: &FqSubspace) -> Result<Self, LinSetError> {
        if s.ambient().copies != 1 || s.ambient() != t.ambient() || s.base() != t.base() || s.tower() != t.tower() {
            return Err(SubspaceError::AmbientMismatch.into());
        }
        let level = s.ambient().level;
        let mut vs: Vec<Vec<u32>> = s.basis_elements().into_iter().map(|x| vec![x, 0]).collect();
        vs.extend(t.basis_elements().into_iter().map(|y| vec![0, y]));
        let u = FqSubspace::span(s.tower(), Ambient::pair(level), s.base(), &vs)?;
        let mut ls = Self::new(u)?;
        ls.split = Some((s.clone(), t.clone()));
        Ok(ls)
    }

    /// `L_f = {⟨(x, f(x))⟩}`.
    pub fn graph(f: &LinPoly) -> Result<Self, LinSetError> {
        let bq = f.tower().size(f.base());
        let vs: Vec<Vec<u32>> = (0..f.degree())
            .map(|j| {
                let e = bq.pow(j as u32);
                vec![e, f.eval(e)]
            })
            .collect();
        let u = FqSubspace::span(f.tower(), Ambient::pair(f.level()), f.base(), &vs)?;
        Self::new(u)
    }

    pub fn subspace(&self) -> &FqSubspace {
        &self.u
    }

    pub fn split(&self) -> Option<&(FqSubspace, FqSubspace)> {
        self.split.as_ref()
    }

    pub fn tower(&self) -> &FieldTower {
        self.u.tower()
    }

    pub fn level(&self) -> Level {
        self.u.ambient().level
    }

    pub fn base(&self) -> Level {
        self.u.base()
    }

    pub fn base_size(&self) -> u64 {
        self.tower().size(self.base()) as u64
    }

    pub fn rank(&self) -> usize {
        self.u.dim()
    }

    /// Degree of the field over the base.
    pub fn degree(&self) -> usize {
        self.u.degree()
    }

    /// Weight of a point by the rank of `H·M_v`.
    pub fn weight_oracle(&self, p: ProjPoint) -> usize {
        self.weight_of_vector(p.vector())
    }

    /// `dim_B {λ : λv ∈ U}` for a nonzero vector `v`.
    pub fn weight_of_vector(&self, v: [u32; 2]) -> usize {
        let m = self.degree();
        if self.parity.is_empty() {
            return m;
        }
        let tower = self.tower();
        let f = tower.field(self.level());
        let bf = self.u.base_field();
        let bq = tower.size(self.base());
        // columns of H·M_v, stored as rows (rank is transpose invariant)
        let cols: Vec<Vec<u32>> = (0..m)
            .map(|j| {
                let e = bq.pow(j as u32);
                let mut c = digits(f.mul(e, v[0]), bq, m);
                c.extend(digits(f.mul(e, v[1]), bq, m));
                self.parity
                    .iter()
                    .map(|h| h.iter().zip(&c).fold(0, |acc, (&a, &b)| bf.add(acc, bf.mul(a, b))))
                    .collect()
            })
            .collect();
        m - linalg::rank(bf, &cols)
    }

    /// `(point, weight)` for every point of the set, in point order.
    pub fn point_weights(&self, bound: u64) -> Result<Vec<(ProjPoint, usize)>, LinSetError> {
        let size = self.tower().size(self.level());
        check_bound(size as u64 + 1, bound)?;
        let pts: Vec<ProjPoint> = ProjPoint::all(size).collect();
        Ok(pts
            .into_par_iter()
            .map(|p| (p, self.weight_oracle(p)))
            .filter(|&(_, w)| w > 0)
            .collect())
    }

    pub fn weight_enumerator(&self, bound: u64) -> Result<WeightEnumerator, LinSetError> {
        Ok(self
            .point_weights(bound)?
            .into_iter()
            .map(|(_, w)| (w, 1))
            .collect())
    }

    /// Rank weight of the codeword `(x0, x1)·G`, where the columns of `G`
    /// are the basis vectors of `U`: `k − w(⟨(x1, −x0)⟩)`.
    pub fn rank_weight(&self, x0: u32, x1: u32) -> Result<usize, LinSetError> {
        let f = self.tower().field(self.level());
        if x0 == 0 && x1 == 0 {
            return Err(LinSetError::ZeroCodeword);
        }
        Ok(self.rank() - self.weight_of_vector([x1, f.neg(x0)]))
    }

    /// The same rank weight computed directly as the base rank of the
    /// codeword entries.
    pub fn rank_weight_direct(&self, x0: u32, x1: u32) -> Result<usize, LinSetError> {
        if x0 == 0 && x1 == 0 {
            return Err(LinSetError::ZeroCodeword);
        }
        let f = self.tower().field(self.level());
        let entries: Vec<u32> = self
            .u
            .basis()
            .iter()
            .map(|u| f.add(f.mul(x0, u[0]), f.mul(x1, u[1])))
            .collect();
        let s = FqSubspace::span_elements(self.tower(), self.level(), self.base(), &entries)?;
        Ok(s.dim())
    }
}

/// `dim(S ∩ α⁻¹T)`, the weight of `⟨(1, α)⟩` in `L_{S×T}`.
pub fn weight_via_alpha(s: &FqSubspace, t: &FqSubspace, alpha: u32) -> Result<usize, LinSetError> {
    if alpha == 0 {
        return Err(LinSetError::ZeroPoint);
    }
    let f = s.tower().field(s.ambient().level);
    let inv = f.inv(alpha).ok_or(LinSetError::ZeroPoint)?;
    Ok(s.intersect(&t.scalar_coset(inv)?)?.dim())
}

/// Points of weight at least `i` of `L_{S×T}` other than the heavier axis
/// point. Writes `r = min(dim S, dim T)`; when `dim T > dim S` the two
/// coordinates are exchanged for the computation and mapped back, so the
/// excluded point is `(0,1)` instead of `(1,0)`.
pub fn points_weight_at_least(
    s: &FqSubspace,
    t: &FqSubspace,
    i: usize,
    budget: u64,
) -> Result<BTreeSet<ProjPoint>, LinSetError> {
    let swap = t.dim() > s.dim();
    let (s, t) = if swap { (t, s) } else { (s, t) };
    let r = t.dim();
    if i == 0 || i > r {
        return Err(LinSetError::LayerOutOfRange { i, max: r });
    }
    let tower = s.tower();
    let level = s.ambient().level;
    let f = tower.field(level);
    let mut params = BTreeSet::new();
    for w in t.enumerate_subspaces(i, budget)? {
        let basis = w.basis_elements();
        let mut acc = s.scalar_coset(f.inv(basis[0]).unwrap())?;
        for &a in &basis[1..] {
            if acc.dim() == 0 {
                break;
            }
            acc = acc.intersect(&s.scalar_coset(f.inv(a).unwrap())?)?;
        }
        for v in acc.vectors(budget)? {
            params.insert(v[0]);
        }
    }
    Ok(params
        .into_iter()
        .map(|xi| {
            let p = ProjPoint::normalize(tower, level, xi, 1).unwrap();
            if swap {
                p.swapped(tower, level)
            } else {
                p
            }
        })
        .collect())
}

/// Points of weight exactly `i`, as the difference of consecutive layers.
pub fn points_weight_exactly(
    s: &FqSubspace,
    t: &FqSubspace,
    i: usize,
    budget: u64,
) -> Result<BTreeSet<ProjPoint>, LinSetError> {
    let r = s.dim().min(t.dim());
    let layer = points_weight_at_least(s, t, i, budget)?;
    if i == r {
        return Ok(layer);
    }
    let next = points_weight_at_least(s, t, i + 1, budget)?;
    Ok(layer.difference(&next).copied().collect())
}

/// True iff `dim(a₁S ∩ a₂S) = 0` for every independent pair `a₁, a₂ ∈ T`,
/// i.e. the axis points are the only points of weight at least two.
pub fn two_heavy_points_check(s: &FqSubspace, t: &FqSubspace, budget: u64) -> Result<bool, LinSetError> {
    if s.dim() < 2 || t.dim() < 2 {
        return Err(LinSetError::FactorTooSmall);
    }
    for w in t.enumerate_subspaces(2, budget)? {
        let b = w.basis_elements();
        if s.scalar_coset(b[0])?.intersect(&s.scalar_coset(b[1])?)?.dim() > 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `S_{f,ξ} = {u + ξf(u) : u ∈ F_{q^t}}` inside the top level.
pub fn make_s_f(f: &LinPoly, xi: u32) -> Result<FqSubspace, LinSetError> {
    let tower = f.tower();
    if f.level() != Level::Mid || xi < tower.size(Level::Mid) || xi >= tower.size(Level::Top) {
        return Err(LinSetError::GeneratorInSubfield);
    }
    let top = tower.field(Level::Top);
    let bq = tower.size(f.base());
    let elems: Vec<u32> = (0..f.degree())
        .map(|j| {
            let u = bq.pow(j as u32);
            top.add(u, top.mul(xi, f.eval(u)))
        })
        .collect();
    Ok(FqSubspace::span_elements(tower, Level::Top, f.base(), &elems)?)
}

/// Weight of `⟨(1, α)⟩` in `L_{S_{f,ξ} × S_{g,η}}` as the kernel dimension
/// of a linearized polynomial over `F_{q^t}`. With `ξ² = Aξ + B`,
/// `η = aξ + b` and `α⁻¹ = α₀ + α₁ξ` the polynomial is
/// `f(α₀X + (α₀b + aα₁B)g(X)) − α₁X − (aα₀ + aα₁A + bα₁)g(X)`.
pub fn weight_via_kernel(f: &LinPoly, xi: u32, g: &LinPoly, eta: u32, alpha: u32) -> Result<usize, LinSetError> {
    Ok(kernel_polynomial(f, xi, g, eta, alpha)?.kernel_dim())
}

pub fn kernel_polynomial(f: &LinPoly, xi: u32, g: &LinPoly, eta: u32, alpha: u32) -> Result<LinPoly, LinSetError> {
    let tower = f.tower();
    let mid_size = tower.size(Level::Mid);
    if alpha == 0 {
        return Err(LinSetError::ZeroPoint);
    }
    if xi < mid_size || eta < mid_size {
        return Err(LinSetError::GeneratorInSubfield);
    }
    let top = tower.field(Level::Top);
    let mid = tower.field(Level::Mid);
    let (qa, qb) = tower.quadratic_of(xi);
    let (a0, a1) = tower.split_over(top.inv(alpha).unwrap(), xi);
    let id = LinPoly::identity(tower, Level::Mid, f.base())?;
    if eta == xi {
        // f(α₀X + α₁B·g(X)) − (α₀ + α₁A)g(X) − α₁X
        let inner = id.post_scale(a0).add(&g.post_scale(mid.mul(a1, qb)))?;
        let c = mid.add(a0, mid.mul(a1, qa));
        return Ok(f.compose(&inner)?.sub(&g.post_scale(c))?.sub(&id.post_scale(a1))?);
    }
    let (b, a) = tower.split_over(eta, xi);
    let c1 = mid.add(mid.mul(a0, b), mid.mul(a, mid.mul(a1, qb)));
    let c2 = mid.add(
        mid.add(mid.mul(a, a0), mid.mul(a, mid.mul(a1, qa))),
        mid.mul(b, a1),
    );
    let inner = id.post_scale(a0).add(&g.post_scale(c1))?;
    Ok(f.compose(&inner)?.sub(&id.post_scale(a1))?.sub(&g.post_scale(c2))?)
}
