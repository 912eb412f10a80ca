//! Subspaces of `F_{q^n}` and `F_{q^n}²` over a sublevel of the tower.
//!
//! A vector of the ambient space is a slice of `copies` packed elements of the
//! ambient level. Its coordinate vector over the base level concatenates the
//! base-`|B|` digits of each element, so `F_{q^n}²` is flattened to length
//! `2n`. A subspace stores its reduced row echelon basis, which is canonical:
//! two subspaces are equal iff their bases are.

use std::fmt;

use thiserror::Error;

use crate::gf::{check_bound, digits, pack, FieldError, FieldTower, Level, LevelField};
use crate::linalg;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubspaceError {
    #[error("subspaces live in different ambient spaces")]
    AmbientMismatch,
    #[error("vector has {found} components, ambient needs {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("scalar must be nonzero")]
    ZeroScalar,
    #[error("dimension {requested} out of range 0..={max}")]
    BadDimension { requested: usize, max: usize },
    #[error("{0}")]
    Field(#[from] FieldError),
}

/// `copies` copies of the field `level`, i.e. `F^copies`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ambient {
    pub level: Level,
    pub copies: usize,
}

impl Ambient {
    pub fn line(level: Level) -> Self {
        Ambient { level, copies: 1 }
    }

    pub fn pair(level: Level) -> Self {
        Ambient { level, copies: 2 }
    }
}

#[derive(Clone)]
pub struct FqSubspace {
    tower: FieldTower,
    ambient: Ambient,
    base: Level,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl PartialEq for FqSubspace {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient
            && self.base == other.base
            && self.rows == other.rows
            && self.tower == other.tower
    }
}

impl Eq for FqSubspace {}

impl fmt::Debug for FqSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FqSubspace(dim {} over {} in {}^{}: {})",
            self.dim(),
            self.base,
            self.ambient.level,
            self.ambient.copies,
            self
        )
    }
}

/// Semicolon-separated basis rows, coordinates comma-separated.
impl fmt::Display for FqSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        f.write_str(&rows.join(";"))
    }
}

impl FqSubspace {
    fn from_rows(tower: &FieldTower, ambient: Ambient, base: Level, mut rows: Vec<Vec<u32>>) -> Self {
        let pivots = linalg::rref(tower.field(base), &mut rows);
        FqSubspace {
            tower: tower.clone(),
            ambient,
            base,
            rows,
            pivots,
        }
    }

    pub fn zero(tower: &FieldTower, ambient: Ambient, base: Level) -> Self {
        Self::from_rows(tower, ambient, base, Vec::new())
    }

    pub fn full(tower: &FieldTower, ambient: Ambient, base: Level) -> Self {
        let len = coord_len(tower, ambient, base);
        let rows = (0..len)
            .map(|i| {
                let mut r = vec![0; len];
                r[i] = 1;
                r
            })
            .collect();
        Self::from_rows(tower, ambient, base, rows)
    }

    /// Span of ambient vectors (each `copies` packed elements).
    pub fn span(
        tower: &FieldTower,
        ambient: Ambient,
        base: Level,
        vectors: &[Vec<u32>],
    ) -> Result<Self, SubspaceError> {
        if base > ambient.level {
            return Err(FieldError::BadParameter(format!(
                "base level {base} lies above ambient level {}",
                ambient.level
            ))
            .into());
        }
        let rows = vectors
            .iter()
            .map(|v| vector_coords(tower, ambient, base, v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_rows(tower, ambient, base, rows))
    }

    /// Span of single elements of a one-copy ambient.
    pub fn span_elements(
        tower: &FieldTower,
        level: Level,
        base: Level,
        elements: &[u32],
    ) -> Result<Self, SubspaceError> {
        let vs: Vec<Vec<u32>> = elements.iter().map(|&x| vec![x]).collect();
        Self::span(tower, Ambient::line(level), base, &vs)
    }

    /// Span of coordinate rows over the base level.
    pub fn from_coord_rows(
        tower: &FieldTower,
        ambient: Ambient,
        base: Level,
        rows: Vec<Vec<u32>>,
    ) -> Result<Self, SubspaceError> {
        let len = coord_len(tower, ambient, base);
        let bsize = tower.size(base);
        for r in &rows {
            if r.len() != len {
                return Err(SubspaceError::WrongLength {
                    expected: len,
                    found: r.len(),
                });
            }
            if r.iter().any(|&c| c >= bsize) {
                return Err(FieldError::Parse("coordinate outside the base field".into()).into());
            }
        }
        Ok(Self::from_rows(tower, ambient, base, rows))
    }

    pub fn parse(
        tower: &FieldTower,
        ambient: Ambient,
        base: Level,
        text: &str,
    ) -> Result<Self, SubspaceError> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Self::zero(tower, ambient, base));
        }
        let rows = text
            .split(';')
            .map(|r| {
                r.split(',')
                    .map(|c| {
                        c.trim()
                            .parse::<u32>()
                            .map_err(|_| FieldError::Parse(format!("bad coordinate {c:?}")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_coord_rows(tower, ambient, base, rows)
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn base(&self) -> Level {
        self.base
    }

    pub fn base_field(&self) -> &LevelField {
        self.tower.field(self.base)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Degree of the ambient level over the base.
    pub fn degree(&self) -> usize {
        self.tower.relative_degree(self.ambient.level, self.base) as usize
    }

    pub fn coord_rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn to_coords(&self, v: &[u32]) -> Result<Vec<u32>, SubspaceError> {
        vector_coords(&self.tower, self.ambient, self.base, v)
    }

    pub fn from_coords(&self, c: &[u32]) -> Vec<u32> {
        let m = self.degree();
        let bsize = self.tower.size(self.base);
        c.chunks(m).map(|chunk| pack(chunk, bsize)).collect()
    }

    /// Basis as ambient vectors.
    pub fn basis(&self) -> Vec<Vec<u32>> {
        self.rows.iter().map(|r| self.from_coords(r)).collect()
    }

    /// Basis of a one-copy subspace as packed elements.
    pub fn basis_elements(&self) -> Vec<u32> {
        debug_assert_eq!(self.ambient.copies, 1);
        self.basis().into_iter().map(|v| v[0]).collect()
    }

    pub fn member(&self, v: &[u32]) -> Result<bool, SubspaceError> {
        let mut c = self.to_coords(v)?;
        Ok(self.member_coords(&mut c))
    }

    pub(crate) fn member_coords(&self, c: &mut [u32]) -> bool {
        linalg::reduce(self.base_field(), &self.rows, &self.pivots, c);
        c.iter().all(|&x| x == 0)
    }

    fn check_same(&self, other: &FqSubspace) -> Result<(), SubspaceError> {
        if self.ambient != other.ambient || self.base != other.base || self.tower != other.tower {
            return Err(SubspaceError::AmbientMismatch);
        }
        Ok(())
    }

    pub fn sum(&self, other: &FqSubspace) -> Result<FqSubspace, SubspaceError> {
        self.check_same(other)?;
        let rows = self.rows.iter().chain(&other.rows).cloned().collect();
        Ok(Self::from_rows(&self.tower, self.ambient, self.base, rows))
    }

    /// Zassenhaus: reduce `[s | s]` and `[t | 0]`; rows with vanishing left
    /// half carry the intersection on the right.
    pub fn intersect(&self, other: &FqSubspace) -> Result<FqSubspace, SubspaceError> {
        self.check_same(other)?;
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Self::zero(&self.tower, self.ambient, self.base));
        }
        let len = self.rows[0].len();
        let mut m: Vec<Vec<u32>> = self
            .rows
            .iter()
            .map(|r| r.iter().chain(r).copied().collect())
            .chain(
                other
                    .rows
                    .iter()
                    .map(|r| r.iter().copied().chain(std::iter::repeat_n(0, len)).collect()),
            )
            .collect();
        linalg::rref(self.base_field(), &mut m);
        let rows = m
            .into_iter()
            .filter(|r| r[..len].iter().all(|&x| x == 0))
            .map(|r| r[len..].to_vec())
            .collect();
        Ok(Self::from_rows(&self.tower, self.ambient, self.base, rows))
    }

    pub fn contains(&self, other: &FqSubspace) -> Result<bool, SubspaceError> {
        self.check_same(other)?;
        Ok(other
            .rows
            .iter()
            .all(|r| self.member_coords(&mut r.clone())))
    }

    /// `a·S`, scaling every copy by `a`.
    pub fn scalar_coset(&self, a: u32) -> Result<FqSubspace, SubspaceError> {
        if a == 0 {
            return Err(SubspaceError::ZeroScalar);
        }
        let level = self.ambient.level;
        if a >= self.tower.size(level) {
            return Err(FieldError::WrongLevel {
                expected: level,
                found: Level::Top,
            }
            .into());
        }
        let f = self.tower.field(level);
        let vs: Vec<Vec<u32>> = self
            .basis()
            .into_iter()
            .map(|v| v.into_iter().map(|x| f.mul(a, x)).collect())
            .collect();
        Self::span(&self.tower, self.ambient, self.base, &vs)
    }

    /// All `|B|^dim` vectors of the subspace, as ambient vectors.
    pub fn vectors(&self, bound: u64) -> Result<impl Iterator<Item = Vec<u32>> + '_, SubspaceError> {
        let bsize = self.tower.size(self.base) as u64;
        let count = bsize
            .checked_pow(self.dim() as u32)
            .ok_or(FieldError::BoundExceeded {
                size: u64::MAX,
                bound,
            })?;
        check_bound(count, bound)?;
        let f = self.base_field();
        let len = coord_len(&self.tower, self.ambient, self.base);
        Ok((0..count).map(move |k| {
            let coeffs = digits(k as u32, bsize as u32, self.dim());
            let mut c = vec![0u32; len];
            for (row, &lambda) in self.rows.iter().zip(&coeffs) {
                if lambda == 0 {
                    continue;
                }
                for (x, &y) in c.iter_mut().zip(row) {
                    *x = f.add(*x, f.mul(lambda, y));
                }
            }
            self.from_coords(&c)
        }))
    }

    /// Every `i`-dimensional subspace, each exactly once, in canonical order.
    pub fn enumerate_subspaces(
        &self,
        i: usize,
        budget: u64,
    ) -> Result<impl Iterator<Item = FqSubspace> + '_, SubspaceError> {
        let patterns = self.subspace_bases(i, budget)?;
        Ok(patterns.map(move |coeffs| self.combine(&coeffs)))
    }

    /// Coefficient matrices (rows over the base, relative to this subspace's
    /// basis) of the `i`-dimensional subspaces.
    pub(crate) fn subspace_bases(&self, i: usize, budget: u64) -> Result<RrefPatterns, SubspaceError> {
        let r = self.dim();
        if i > r {
            return Err(SubspaceError::BadDimension {
                requested: i,
                max: r,
            });
        }
        let q = self.tower.size(self.base) as u64;
        let count = gaussian_binomial(r as u64, i as u64, q);
        check_bound(count.min(u64::MAX as u128) as u64, budget)?;
        Ok(RrefPatterns::new(r, i, q as u32))
    }

    /// Subspace spanned by the given combinations of this subspace's basis.
    pub(crate) fn combine(&self, coeffs: &[Vec<u32>]) -> FqSubspace {
        let f = self.base_field();
        let len = coord_len(&self.tower, self.ambient, self.base);
        let rows = coeffs
            .iter()
            .map(|lam| {
                let mut c = vec![0u32; len];
                for (row, &l) in self.rows.iter().zip(lam) {
                    if l == 0 {
                        continue;
                    }
                    for (x, &y) in c.iter_mut().zip(row) {
                        *x = f.add(*x, f.mul(l, y));
                    }
                }
                c
            })
            .collect();
        Self::from_rows(&self.tower, self.ambient, self.base, rows)
    }

    /// The same subspace viewed over a smaller base level.
    pub fn restrict_base(&self, base: Level) -> Result<FqSubspace, SubspaceError> {
        if base > self.base {
            return Err(FieldError::BadParameter("restriction must go down the tower".into()).into());
        }
        let big = self.tower.field(self.base);
        let basis_of_b: Vec<u32> = (0..self.tower.relative_degree(self.base, base))
            .map(|j| self.tower.size(base).pow(j))
            .collect();
        let ambient_field = self.tower.field(self.ambient.level);
        let _ = big;
        let mut vs = Vec::new();
        for v in self.basis() {
            for &b in &basis_of_b {
                vs.push(v.iter().map(|&x| ambient_field.mul(b, x)).collect());
            }
        }
        Self::span(&self.tower, self.ambient, base, &vs)
    }
}

pub(crate) fn coord_len(tower: &FieldTower, ambient: Ambient, base: Level) -> usize {
    ambient.copies * tower.relative_degree(ambient.level, base) as usize
}

pub(crate) fn vector_coords(
    tower: &FieldTower,
    ambient: Ambient,
    base: Level,
    v: &[u32],
) -> Result<Vec<u32>, SubspaceError> {
    if v.len() != ambient.copies {
        return Err(SubspaceError::WrongLength {
            expected: ambient.copies,
            found: v.len(),
        });
    }
    let size = tower.size(ambient.level);
    let m = tower.relative_degree(ambient.level, base) as usize;
    let bsize = tower.size(base);
    let mut out = Vec::with_capacity(ambient.copies * m);
    for &x in v {
        if x >= size {
            return Err(FieldError::WrongLevel {
                expected: ambient.level,
                found: Level::Top,
            }
            .into());
        }
        out.extend(digits(x, bsize, m));
    }
    Ok(out)
}

/// Number of `k`-dimensional subspaces of `F_q^n`.
pub fn gaussian_binomial(n: u64, k: u64, q: u64) -> u128 {
    if k > n {
        return 0;
    }
    let q = q as u128;
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= q.pow((n - i) as u32) - 1;
        den *= q.pow((i + 1) as u32) - 1;
    }
    num / den
}

/// Iterator over `k × n` RREF matrices of rank `k` over `F_q`, by pivot
/// column set (lexicographic) and then free entries.
pub(crate) struct RrefPatterns {
    n: usize,
    k: usize,
    q: u32,
    pivots: Option<Vec<usize>>,
    free: Vec<(usize, usize)>,
    counter: Vec<u32>,
    fresh: bool,
}

impl RrefPatterns {
    fn new(n: usize, k: usize, q: u32) -> Self {
        let pivots: Vec<usize> = (0..k).collect();
        let mut it = RrefPatterns {
            n,
            k,
            q,
            pivots: Some(pivots),
            free: Vec::new(),
            counter: Vec::new(),
            fresh: true,
        };
        it.reset_free();
        it
    }

    fn reset_free(&mut self) {
        let Some(pivots) = &self.pivots else { return };
        self.free.clear();
        for (row, &pc) in pivots.iter().enumerate() {
            for c in pc + 1..self.n {
                if !pivots.contains(&c) {
                    self.free.push((row, c));
                }
            }
        }
        self.counter = vec![0; self.free.len()];
        self.fresh = true;
    }

    fn advance_pivots(&mut self) {
        let Some(p) = self.pivots.as_mut() else { return };
        let (n, k) = (self.n, self.k);
        let mut i = k;
        while i > 0 {
            i -= 1;
            if p[i] < n - k + i {
                p[i] += 1;
                for j in i + 1..k {
                    p[j] = p[j - 1] + 1;
                }
                self.reset_free();
                return;
            }
        }
        self.pivots = None;
    }

    fn current(&self) -> Vec<Vec<u32>> {
        let pivots = self.pivots.as_ref().unwrap();
        let mut m = vec![vec![0u32; self.n]; self.k];
        for (row, &pc) in pivots.iter().enumerate() {
            m[row][pc] = 1;
        }
        for (&(row, c), &v) in self.free.iter().zip(&self.counter) {
            m[row][c] = v;
        }
        m
    }
}

impl Iterator for RrefPatterns {
    type Item = Vec<Vec<u32>>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.pivots.as_ref()?;
            if self.fresh {
                self.fresh = false;
                return Some(self.current());
            }
            // increment the free-entry counter
            let mut carried = true;
            for c in self.counter.iter_mut() {
                *c += 1;
                if *c < self.q {
                    carried = false;
                    break;
                }
                *c = 0;
            }
            if !carried {
                return Some(self.current());
            }
            self.advance_pivots();
        }
    }
}
