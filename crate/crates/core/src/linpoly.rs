//! Linearized polynomials `Σ a_i X^{Q^i}` over one tower level, where `Q` is
//! the size of a chosen sublevel. Coefficients are kept folded modulo the
//! extension degree `m` (using `X^{Q^m} = X`), so equality of polynomials is
//! equality of coefficient lists.

use std::fmt;

use thiserror::Error;

use crate::gf::{digits, FieldError, FieldTower, Level, LevelField};
use crate::linalg;
use crate::subspace::{Ambient, FqSubspace, SubspaceError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomials live over different levels or bases")]
    Mismatch,
    #[error("polynomial does not have the required shape: {0}")]
    Shape(String),
    #[error("{0}")]
    Field(#[from] FieldError),
    #[error("{0}")]
    Subspace(#[from] SubspaceError),
}

#[derive(Clone)]
pub struct LinPoly {
    tower: FieldTower,
    level: Level,
    base: Level,
    coeffs: Vec<u32>,
}

impl PartialEq for LinPoly {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level
            && self.base == other.base
            && self.coeffs == other.coeffs
            && self.tower == other.tower
    }
}

impl Eq for LinPoly {}

impl fmt::Debug for LinPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinPoly({} over {}: {})", self.level, self.base, self)
    }
}

impl fmt::Display for LinPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let c = self.tower.format_element(self.level, c);
            match i {
                0 => write!(f, "{c}*X")?,
                1 => write!(f, "{c}*X^q")?,
                _ => write!(f, "{c}*X^q{i}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl LinPoly {
    /// Build from coefficients of `X^{Q^i}`; any length is accepted and
    /// folded modulo the extension degree.
    pub fn new(tower: &FieldTower, level: Level, base: Level, coeffs: &[u32]) -> Result<Self, PolyError> {
        if base > level {
            return Err(FieldError::BadParameter(format!(
                "base {base} lies above level {level}"
            ))
            .into());
        }
        let m = tower.relative_degree(level, base) as usize;
        let f = tower.field(level);
        let mut folded = vec![0u32; m];
        for (i, &c) in coeffs.iter().enumerate() {
            if !f.contains(c) {
                return Err(FieldError::WrongLevel {
                    expected: level,
                    found: Level::Top,
                }
                .into());
            }
            folded[i % m] = f.add(folded[i % m], c);
        }
        Ok(LinPoly {
            tower: tower.clone(),
            level,
            base,
            coeffs: folded,
        })
    }

    pub fn zero(tower: &FieldTower, level: Level, base: Level) -> Result<Self, PolyError> {
        Self::new(tower, level, base, &[])
    }

    pub fn identity(tower: &FieldTower, level: Level, base: Level) -> Result<Self, PolyError> {
        Self::new(tower, level, base, &[1])
    }

    /// `c·X^{Q^k}`.
    pub fn monomial(tower: &FieldTower, level: Level, base: Level, k: usize, c: u32) -> Result<Self, PolyError> {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = c;
        Self::new(tower, level, base, &coeffs)
    }

    /// `Σ_{i<m} X^{Q^i}`, the trace onto the base.
    pub fn trace(tower: &FieldTower, level: Level, base: Level) -> Result<Self, PolyError> {
        let m = tower.relative_degree(level, base) as usize;
        Self::new(tower, level, base, &vec![1; m])
    }

    /// The unique polynomial taking `values[j]` on the `j`-th basis element
    /// `|B|^j` of the level over the base (Moore-matrix solve).
    pub fn from_values(tower: &FieldTower, level: Level, base: Level, values: &[u32]) -> Result<Self, PolyError> {
        let m = tower.relative_degree(level, base) as usize;
        if values.len() != m {
            return Err(PolyError::Shape(format!("need {m} values, got {}", values.len())));
        }
        let f = tower.field(level);
        let bsize = tower.size(base);
        let moore: Vec<Vec<u32>> = (0..m)
            .map(|j| {
                let e = bsize.pow(j as u32);
                (0..m).map(|i| f.frobenius(e, bsize, i as u32)).collect()
            })
            .collect();
        let coeffs = linalg::solve(f, &moore, values).expect("Moore matrix of a basis is invertible");
        Self::new(tower, level, base, &coeffs)
    }

    pub fn parse(tower: &FieldTower, level: Level, base: Level, text: &str) -> Result<Self, PolyError> {
        let text = text.trim();
        let m = tower.relative_degree(level, base) as usize;
        let mut coeffs = vec![0u32; m];
        if text == "0" {
            return Self::new(tower, level, base, &coeffs);
        }
        let f = tower.field(level);
        for term in text.split('+') {
            let term = term.trim();
            let (coef, mono) = match term.rsplit_once('*') {
                Some((c, x)) => (tower.parse_element(level, c)?, x.trim()),
                None => (1, term),
            };
            let k = match mono {
                "X" => 0,
                "X^q" => 1,
                _ => mono
                    .strip_prefix("X^q")
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| FieldError::Parse(format!("bad monomial {mono:?}")))?,
            };
            coeffs[k % m] = f.add(coeffs[k % m], coef);
        }
        Self::new(tower, level, base, &coeffs)
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn base(&self) -> Level {
        self.base
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Extension degree of the level over the base.
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    fn field(&self) -> &LevelField {
        self.tower.field(self.level)
    }

    fn base_size(&self) -> u32 {
        self.tower.size(self.base)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Evaluate on a packed element of the level.
    pub fn eval(&self, x: u32) -> u32 {
        if x == 0 {
            return 0;
        }
        let f = self.field();
        let bq = self.base_size();
        let mut acc = 0;
        let mut y = x;
        for &c in &self.coeffs {
            if c != 0 {
                acc = f.add(acc, f.mul(c, y));
            }
            y = f.pow(y, bq as u64);
        }
        acc
    }

    fn check_same(&self, other: &LinPoly) -> Result<(), PolyError> {
        if self.level != other.level || self.base != other.base || self.tower != other.tower {
            return Err(PolyError::Mismatch);
        }
        Ok(())
    }

    fn with_coeffs(&self, coeffs: Vec<u32>) -> LinPoly {
        LinPoly {
            tower: self.tower.clone(),
            level: self.level,
            base: self.base,
            coeffs,
        }
    }

    pub fn add(&self, other: &LinPoly) -> Result<LinPoly, PolyError> {
        self.check_same(other)?;
        let f = self.field();
        Ok(self.with_coeffs(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        ))
    }

    pub fn sub(&self, other: &LinPoly) -> Result<LinPoly, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LinPoly {
        let f = self.field();
        self.with_coeffs(self.coeffs.iter().map(|&a| f.neg(a)).collect())
    }

    /// `f ∘ g`: `Σ_{i,j} a_i b_j^{Q^i} X^{Q^{i+j}}`.
    pub fn compose(&self, g: &LinPoly) -> Result<LinPoly, PolyError> {
        self.check_same(g)?;
        let f = self.field();
        let m = self.degree();
        let bq = self.base_size();
        let mut out = vec![0u32; m];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in g.coeffs.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let term = f.mul(a, f.frobenius(b, bq, i as u32));
                out[(i + j) % m] = f.add(out[(i + j) % m], term);
            }
        }
        Ok(self.with_coeffs(out))
    }

    /// `f(cX)`.
    pub fn pre_scale(&self, c: u32) -> LinPoly {
        let f = self.field();
        let bq = self.base_size();
        self.with_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &a)| f.mul(a, f.frobenius(c, bq, i as u32)))
                .collect(),
        )
    }

    /// `c·f(X)`.
    pub fn post_scale(&self, c: u32) -> LinPoly {
        let f = self.field();
        self.with_coeffs(self.coeffs.iter().map(|&a| f.mul(c, a)).collect())
    }

    /// Matrix over the base with `M·coords(x) = coords(f(x))`; column `j` is
    /// `f` applied to the `j`-th basis element.
    pub fn as_matrix(&self) -> Vec<Vec<u32>> {
        let m = self.degree();
        let bq = self.base_size();
        let cols: Vec<Vec<u32>> = (0..m)
            .map(|j| digits(self.eval(bq.pow(j as u32)), bq, m))
            .collect();
        (0..m).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
    }

    pub fn image_dim(&self) -> usize {
        linalg::rank(self.tower.field(self.base), &self.as_matrix())
    }

    pub fn kernel_dim(&self) -> usize {
        self.degree() - self.image_dim()
    }

    pub fn is_invertible(&self) -> bool {
        self.kernel_dim() == 0
    }

    pub fn kernel_basis(&self) -> FqSubspace {
        let m = self.degree();
        let bf = self.tower.field(self.base);
        let rows = linalg::kernel(bf, &self.as_matrix(), m);
        FqSubspace::from_coord_rows(&self.tower, Ambient::line(self.level), self.base, rows)
            .expect("kernel rows have ambient length")
    }

    pub fn image(&self) -> FqSubspace {
        let bq = self.base_size();
        let vals: Vec<u32> = (0..self.degree())
            .map(|j| self.eval(bq.pow(j as u32)))
            .collect();
        FqSubspace::span_elements(&self.tower, self.level, self.base, &vals)
            .expect("values lie in the level")
    }

    /// Monic polynomial of `Q`-degree `dim W` vanishing exactly on `W`.
    pub fn subspace_polynomial(w: &FqSubspace) -> Result<LinPoly, PolyError> {
        Self::subspace_polynomial_with_step(w, 1)
    }

    /// As [`LinPoly::subspace_polynomial`] in the variable `σ = X^{Q^s}`:
    /// `P ← σ∘P − P(w)^{Q^s−1}·P` for each basis vector `w`. With
    /// `gcd(s, m) = 1` the result vanishes exactly on `W`.
    pub fn subspace_polynomial_with_step(w: &FqSubspace, s: usize) -> Result<LinPoly, PolyError> {
        if w.ambient().copies != 1 {
            return Err(PolyError::Shape("subspace must lie in a single field".into()));
        }
        let tower = w.tower();
        let (level, base) = (w.ambient().level, w.base());
        let f = tower.field(level);
        let bq = tower.size(base);
        let sigma = Self::monomial(tower, level, base, s, 1)?;
        let mut p = Self::identity(tower, level, base)?;
        for v in w.basis_elements() {
            let pv = p.eval(v);
            // pv^{Q^s − 1}
            let c = f.div(f.frobenius(pv, bq, s as u32), pv).expect("basis vector outside kernel");
            p = sigma.compose(&p)?.sub(&p.post_scale(c))?;
        }
        Ok(p)
    }

    /// For `f = a_0X + a_1X^{Q^s} + … + a_{k−1}X^{Q^{s(k−1)}} − X^{Q^{sk}}`
    /// with `k` less than the extension degree: is `N(a_0) = (−1)^{m(k+1)}`,
    /// the norm taken from the level to the base?
    pub fn normcond_check(&self, s: usize, k: usize) -> Result<bool, PolyError> {
        let m = self.degree();
        if k == 0 || k >= m {
            return Err(PolyError::Shape(format!("need 1 <= k < {m}, got {k}")));
        }
        if gcd(s, m) != 1 {
            return Err(PolyError::Shape(format!("gcd({s}, {m}) != 1")));
        }
        let f = self.field();
        let positions: Vec<usize> = (0..=k).map(|j| (s * j) % m).collect();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != 0 && !positions.contains(&i) {
                return Err(PolyError::Shape(format!("unexpected term X^q{i}")));
            }
        }
        if self.coeffs[positions[k]] != f.neg(1) {
            return Err(PolyError::Shape("leading coefficient must be -1".into()));
        }
        let norm = self.norm(self.coeffs[0]);
        let target = if (m * (k + 1)).is_multiple_of(2) { 1 } else { f.neg(1) };
        Ok(norm == target)
    }

    /// Norm from the level to the base.
    pub fn norm(&self, x: u32) -> u32 {
        let f = self.field();
        let bq = self.base_size();
        (0..self.degree() as u32).fold(1, |acc, i| f.mul(acc, f.frobenius(x, bq, i)))
    }
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
