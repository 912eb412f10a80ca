//! Named constructions on `PG(1, q^{2t})`: products `S_{f,ξ} × S_{g,ξ}` with
//! predicted weights, the product map `Ψ` and its iterates, the search for
//! a second factor avoiding extra heavy points, and the algebraic test for
//! "exactly two heavy points".

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gf::{FieldError, FieldTower, Level, Overrides};
use crate::linpoly::{gcd, LinPoly, PolyError};
use crate::linset::{self, LinSetError, LinearSet, ProjPoint, WeightEnumerator};
use crate::subspace::{Ambient, FqSubspace, SubspaceError};

pub use crate::linset::make_s_f;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),
    #[error("bad family description: {0}")]
    Parse(String),
    #[error("no element found: {0}")]
    SearchFailed(String),
    #[error("{0}")]
    LinSet(#[from] LinSetError),
    #[error("{0}")]
    Poly(#[from] PolyError),
    #[error("{0}")]
    Subspace(#[from] SubspaceError),
    #[error("{0}")]
    Field(#[from] FieldError),
}

impl FamilyError {
    /// True for failures caused by enumeration limits rather than input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            FamilyError::Field(FieldError::BoundExceeded { .. })
                | FamilyError::LinSet(LinSetError::Field(FieldError::BoundExceeded { .. }))
                | FamilyError::LinSet(LinSetError::Subspace(SubspaceError::Field(
                    FieldError::BoundExceeded { .. }
                )))
                | FamilyError::Subspace(SubspaceError::Field(FieldError::BoundExceeded { .. }))
        )
    }
}

/// Where `⟨(1, α)⟩` sits: the two axis points, `α ∈ F_q*`,
/// `α ∈ F_{q^t} ∖ F_q`, or `α ∉ F_{q^t}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Axes,
    BaseField,
    MidField,
    Outside,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Axes, Region::BaseField, Region::MidField, Region::Outside];

    pub fn of(tower: &FieldTower, p: ProjPoint) -> Region {
        match p {
            ProjPoint::Infinity | ProjPoint::Affine(0) => Region::Axes,
            ProjPoint::Affine(a) if a < tower.q() => Region::BaseField,
            ProjPoint::Affine(a) if a < tower.size(Level::Mid) => Region::MidField,
            ProjPoint::Affine(_) => Region::Outside,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::Axes => "axes",
            Region::BaseField => "alpha in F_q*",
            Region::MidField => "alpha in F_q^t \\ F_q",
            Region::Outside => "alpha outside F_q^t",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Exact(usize),
    AtMost(usize),
    /// Weight `w` for points of the set, `0` otherwise.
    ZeroOr(usize),
    /// Exactly `dim ker(f(α⁻¹X) − α⁻¹g(X))`.
    SubfieldKernel,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Exact(w) => write!(f, "= {w}"),
            Rule::AtMost(w) => write!(f, "<= {w}"),
            Rule::ZeroOr(w) => write!(f, "in {{0,{w}}}"),
            Rule::SubfieldKernel => f.write_str("= dim ker(f(X/a) - g(X)/a)"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WeightPrediction {
    pub rules: BTreeMap<Region, Vec<Rule>>,
    /// Hypotheses that failed, with the weaker rules used instead.
    pub notes: Vec<String>,
}

impl WeightPrediction {
    fn push(&mut self, region: Region, rule: Rule) {
        self.rules.entry(region).or_default().push(rule);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphKind {
    TraceTrace,
    FTrace,
    Monomial { s: usize },
    LpBinomial { s: usize, delta: u32 },
    FF,
}

/// `L_{S_{f,ξ} × S_{g,ξ}}` for one of the named choices of `(f, g)`.
#[derive(Debug, Clone)]
pub struct GraphFamily {
    pub kind: GraphKind,
    pub f: LinPoly,
    pub g: LinPoly,
    pub xi: u32,
    pub label: String,
}

fn mid_poly(tower: &FieldTower, coeffs: &[u32]) -> Result<LinPoly, FamilyError> {
    Ok(LinPoly::new(tower, Level::Mid, Level::Base, coeffs)?)
}

/// `(A, B)` of `ξ² = Aξ + B`.
fn quad(tower: &FieldTower, xi: u32) -> (u32, u32) {
    tower.quadratic_of(xi)
}

/// Is `Tr(A) ≠ −2` with `q` odd?
pub fn trace_hypothesis(tower: &FieldTower, xi: u32) -> bool {
    let mid = tower.field(Level::Mid);
    let (a, _) = quad(tower, xi);
    tower.p() != 2 && tower.trace_mid(a) != mid.neg(mid.add(1, 1))
}

/// Is `N(B) ≠ (−1)^t`?
pub fn norm_hypothesis(tower: &FieldTower, xi: u32) -> bool {
    let mid = tower.field(Level::Mid);
    let (_, b) = quad(tower, xi);
    let target = if tower.t().is_multiple_of(2) { 1 } else { mid.neg(1) };
    tower.norm_mid(b) != target
}

/// First `ξ ∉ F_{q^t}` (from the tower's own generator on) meeting `ok`.
pub fn scan_xi(tower: &FieldTower, ok: impl Fn(u32) -> bool) -> Option<u32> {
    (tower.size(Level::Mid)..tower.size(Level::Top)).find(|&x| ok(x))
}

impl GraphFamily {
    pub fn tower(&self) -> &FieldTower {
        self.f.tower()
    }

    pub fn trace_trace(tower: &FieldTower, xi: Option<u32>) -> Result<Self, FamilyError> {
        let xi = pick_xi(tower, xi, |x| trace_hypothesis(tower, x))?;
        let tr = LinPoly::trace(tower, Level::Mid, Level::Base)?;
        Ok(GraphFamily {
            kind: GraphKind::TraceTrace,
            f: tr.clone(),
            g: tr,
            xi,
            label: "trace-trace".into(),
        })
    }

    pub fn f_trace(f: &LinPoly, xi: Option<u32>) -> Result<Self, FamilyError> {
        let tower = f.tower();
        let xi = pick_xi(tower, xi, |_| true)?;
        Ok(GraphFamily {
            kind: GraphKind::FTrace,
            f: f.clone(),
            g: LinPoly::trace(tower, Level::Mid, Level::Base)?,
            xi,
            label: "f-trace".into(),
        })
    }

    pub fn monomial(tower: &FieldTower, s: usize, xi: Option<u32>) -> Result<Self, FamilyError> {
        let t = tower.t() as usize;
        if gcd(s, t) != 1 {
            return Err(FamilyError::Hypothesis(format!("gcd(s, t) = gcd({s}, {t}) != 1")));
        }
        let xi = pick_xi(tower, xi, |x| norm_hypothesis(tower, x))?;
        let f = LinPoly::monomial(tower, Level::Mid, Level::Base, s, 1)?;
        Ok(GraphFamily {
            kind: GraphKind::Monomial { s },
            f: f.clone(),
            g: f,
            xi,
            label: format!("monomial:s={s}"),
        })
    }

    /// `f = X^{q^s} + δX^{q^{s(t−1)}}`. `delta = None` takes the first
    /// nonzero `δ` with `N(δ)² ≠ 1`, or `0` when none exists.
    pub fn lp_binomial(tower: &FieldTower, s: usize, delta: Option<u32>, xi: Option<u32>) -> Result<Self, FamilyError> {
        let t = tower.t() as usize;
        if t < 5 {
            return Err(FamilyError::Hypothesis(format!("the binomial family needs t >= 5, got {t}")));
        }
        if gcd(s, t) != 1 {
            return Err(FamilyError::Hypothesis(format!("gcd(s, t) = gcd({s}, {t}) != 1")));
        }
        let mid = tower.field(Level::Mid);
        let good = |d: u32| {
            let n = tower.norm_mid(d);
            mid.mul(n, n) != 1
        };
        let delta = match delta {
            Some(d) => {
                if !mid.contains(d) || !good(d) {
                    return Err(FamilyError::Hypothesis(format!("N(delta)^2 = 1 for delta = {d}")));
                }
                d
            }
            None => (1..mid.size()).find(|&d| good(d)).unwrap_or(0),
        };
        let xi = pick_xi(tower, xi, |_| true)?;
        let mut coeffs = vec![0u32; t];
        coeffs[s % t] = 1;
        let k = (s * (t - 1)) % t;
        coeffs[k] = mid.add(coeffs[k], delta);
        let f = mid_poly(tower, &coeffs)?;
        Ok(GraphFamily {
            kind: GraphKind::LpBinomial { s, delta },
            f: f.clone(),
            g: f,
            xi,
            label: format!("lp:s={s},delta={delta}"),
        })
    }

    pub fn f_f(f: &LinPoly, xi: Option<u32>) -> Result<Self, FamilyError> {
        let xi = pick_xi(f.tower(), xi, |_| true)?;
        Ok(GraphFamily {
            kind: GraphKind::FF,
            f: f.clone(),
            g: f.clone(),
            xi,
            label: "f-f".into(),
        })
    }

    pub fn build(&self) -> Result<LinearSet, FamilyError> {
        let s = make_s_f(&self.f, self.xi)?;
        let t = make_s_f(&self.g, self.xi)?;
        Ok(LinearSet::product(&s, &t)?)
    }

    pub fn predict(&self) -> WeightPrediction {
        let tower = self.tower();
        let t = tower.t() as usize;
        let mut p = WeightPrediction::default();
        p.push(Region::Axes, Rule::Exact(t));
        let f_trace_rules = |p: &mut WeightPrediction, f: &LinPoly| {
            p.push(Region::Outside, Rule::AtMost(f.image_dim() + 1));
            p.push(Region::BaseField, Rule::SubfieldKernel);
            p.push(Region::MidField, Rule::SubfieldKernel);
        };
        match &self.kind {
            GraphKind::TraceTrace => {
                if trace_hypothesis(tower, self.xi) {
                    p.push(Region::Outside, Rule::ZeroOr(1));
                    p.push(Region::MidField, Rule::Exact(t.saturating_sub(2)));
                    p.push(Region::BaseField, Rule::Exact(t));
                } else {
                    p.notes.push("q even or Tr(A) = -2: only the f-trace rules are asserted".into());
                    f_trace_rules(&mut p, &self.f);
                }
            }
            GraphKind::FTrace => {
                f_trace_rules(&mut p, &self.f);
                let frob = LinPoly::monomial(tower, Level::Mid, Level::Base, 1, 1).unwrap();
                if self.f == frob {
                    p.push(Region::BaseField, Rule::AtMost(1));
                    p.push(Region::MidField, Rule::AtMost(1));
                    p.push(Region::Outside, Rule::AtMost(2));
                }
            }
            GraphKind::Monomial { .. } => {
                p.push(Region::MidField, Rule::Exact(0));
                p.push(Region::BaseField, Rule::Exact(t));
                if norm_hypothesis(tower, self.xi) {
                    p.push(Region::Outside, Rule::ZeroOr(1));
                } else {
                    p.notes.push("N(B) = (-1)^t: only the bound 2 is asserted outside F_q^t".into());
                    p.push(Region::Outside, Rule::AtMost(2));
                }
            }
            GraphKind::LpBinomial { .. } => {
                p.push(Region::Outside, Rule::AtMost(3));
                p.push(Region::MidField, Rule::AtMost(2));
                p.push(Region::BaseField, Rule::Exact(t));
            }
            GraphKind::FF => {
                p.push(Region::Outside, Rule::AtMost(3 * self.f.image_dim()));
                p.push(Region::MidField, Rule::SubfieldKernel);
                p.push(Region::BaseField, Rule::Exact(t));
            }
        }
        p
    }

    /// `dim ker(f(α⁻¹X) − α⁻¹g(X))` for `α ∈ F_{q^t}*`.
    pub fn subfield_kernel(&self, alpha: u32) -> usize {
        let mid = self.tower().field(Level::Mid);
        let inv = mid.inv(alpha).expect("nonzero");
        self.f
            .pre_scale(inv)
            .sub(&self.g.post_scale(inv))
            .expect("same level")
            .kernel_dim()
    }

    pub fn verify(&self, bound: u64) -> Result<FamilyReport, FamilyError> {
        let ls = self.build()?;
        let pred = self.predict();
        let tower = self.tower().clone();
        let all = ProjPoint::all(tower.size(Level::Top));
        crate::gf::check_bound(tower.size(Level::Top) as u64 + 1, bound)?;
        let pts: Vec<ProjPoint> = all.collect();
        let weights: Vec<(ProjPoint, usize)> = pts.into_par_iter().map(|p| (p, ls.weight_oracle(p))).collect();
        let mut regions: BTreeMap<Region, RegionReport> = BTreeMap::new();
        for (p, w) in &weights {
            let region = Region::of(&tower, *p);
            let rules = pred.rules.get(&region).map(Vec::as_slice).unwrap_or(&[]);
            let entry = regions.entry(region).or_insert_with(|| RegionReport {
                region,
                rules: rules.iter().map(|r| r.to_string()).collect(),
                realized: BTreeMap::new(),
                violations: 0,
                first_violation: None,
            });
            *entry.realized.entry(*w).or_default() += 1;
            for rule in rules {
                let ok = match *rule {
                    Rule::Exact(x) => *w == x,
                    Rule::AtMost(x) => *w <= x,
                    Rule::ZeroOr(x) => *w == 0 || *w == x,
                    Rule::SubfieldKernel => match p {
                        ProjPoint::Affine(a) if *a != 0 => *w == self.subfield_kernel(*a),
                        _ => true,
                    },
                };
                if !ok {
                    entry.violations += 1;
                    if entry.first_violation.is_none() {
                        entry.first_violation =
                            Some(format!("{} has weight {w}, rule {rule}", p.format(&tower, Level::Top)));
                    }
                }
            }
        }
        let enumerator: WeightEnumerator = weights.iter().map(|&(_, w)| (w, 1)).collect();
        let identity = enumerator.satisfies_identity(ls.base_size(), ls.rank());
        let regions: Vec<RegionReport> = regions.into_values().collect();
        let pass = identity && regions.iter().all(|r| r.violations == 0);
        Ok(FamilyReport {
            family: self.label.clone(),
            tower: tower.to_text(),
            q: tower.q(),
            t: tower.t(),
            xi: tower.format_element(Level::Top, self.xi),
            rank: ls.rank(),
            size: enumerator.size(),
            enumerator,
            identity,
            regions,
            notes: pred.notes,
            pass,
        })
    }
}

fn pick_xi(tower: &FieldTower, xi: Option<u32>, ok: impl Fn(u32) -> bool) -> Result<u32, FamilyError> {
    match xi {
        Some(x) => {
            if x < tower.size(Level::Mid) || x >= tower.size(Level::Top) {
                return Err(LinSetError::GeneratorInSubfield.into());
            }
            Ok(x)
        }
        None => Ok(scan_xi(tower, &ok).unwrap_or(tower.xi())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionReport {
    pub region: Region,
    pub rules: Vec<String>,
    /// Weight (including 0 for points outside the set) to point count.
    pub realized: BTreeMap<usize, u64>,
    pub violations: u64,
    pub first_violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyReport {
    pub family: String,
    pub tower: String,
    pub q: u32,
    pub t: u32,
    pub xi: String,
    pub rank: usize,
    pub size: u64,
    pub enumerator: WeightEnumerator,
    pub identity: bool,
    pub regions: Vec<RegionReport>,
    pub notes: Vec<String>,
    pub pass: bool,
}

/// First nonzero `ξ` in element order with `S ∩ ξS = {0}`.
pub fn find_disjoint_scalar(s: &FqSubspace) -> Result<u32, FamilyError> {
    if 2 * s.dim() > s.degree() {
        return Err(FamilyError::Hypothesis(format!(
            "2 dim S = {} exceeds n = {}",
            2 * s.dim(),
            s.degree()
        )));
    }
    let size = s.tower().size(s.ambient().level);
    for x in 1..size {
        if s.intersect(&s.scalar_coset(x)?)?.dim() == 0 {
            return Ok(x);
        }
    }
    Err(FamilyError::SearchFailed("no scalar with S and xi*S disjoint".into()))
}

/// `T = ⟨1, ξ, a₃, …, a_r⟩` with `S ∩ ξS = 0`; the extra vectors are the
/// first elements in order that keep the span growing.
pub fn build_avoiding_t(s: &FqSubspace, r: usize) -> Result<FqSubspace, FamilyError> {
    if r < 2 {
        return Err(FamilyError::Hypothesis(format!("r = {r} < 2")));
    }
    if r > s.dim() {
        return Err(FamilyError::Hypothesis(format!("r = {r} exceeds dim S = {}", s.dim())));
    }
    if s.dim() + r > s.degree() {
        return Err(FamilyError::Hypothesis("rank exceeds n".into()));
    }
    let xi = find_disjoint_scalar(s)?;
    let (tower, level, base) = (s.tower(), s.ambient().level, s.base());
    let mut t = FqSubspace::span_elements(tower, level, base, &[1, xi])?;
    let mut x = 1;
    while t.dim() < r {
        x += 1;
        if !t.member(&[x])? {
            let mut b = t.basis_elements();
            b.push(x);
            t = FqSubspace::span_elements(tower, level, base, &b)?;
        }
    }
    Ok(t)
}

/// Algebraic test for exactly two heavy points: with `ξ² = aξ + b` and
/// `η = Aξ + B`, is the kernel of
/// `f(α₀v + (α₁Ab + α₀B)g(v)) − α₁v − (α₀A + α₁Aa + α₁B)g(v)`
/// at most one-dimensional for every `(α₀, α₁) ≠ (0, 0)`?
/// Pairs are taken up to `F_q*` scaling.
pub fn check_relation_fg(f: &LinPoly, g: &LinPoly, xi: u32, eta: u32, bound: u64) -> Result<bool, FamilyError> {
    let tower = f.tower();
    let mid_size = tower.size(Level::Mid);
    if xi < mid_size || eta < mid_size {
        return Err(LinSetError::GeneratorInSubfield.into());
    }
    crate::gf::check_bound(mid_size as u64 * mid_size as u64, bound)?;
    let mid = tower.field(Level::Mid);
    let (a, b) = quad(tower, xi);
    let (cb, ca) = tower.split_over(eta, xi);
    let id = LinPoly::identity(tower, Level::Mid, f.base())?;
    let q = tower.q();
    // representative pairs: the lowest nonzero F_q-digit of the first
    // nonzero entry equals 1
    let leading_one = |x: u32| {
        let mut x = x;
        while x.is_multiple_of(q) {
            x /= q;
        }
        x % q == 1
    };
    let pairs: Vec<(u32, u32)> = (0..mid_size)
        .flat_map(|a0| (0..mid_size).map(move |a1| (a0, a1)))
        .filter(|&(a0, a1)| if a0 != 0 { leading_one(a0) } else { a1 != 0 && leading_one(a1) })
        .collect();
    let bad = pairs.into_par_iter().any(|(a0, a1)| {
        let inner_c = mid.add(mid.mul(a1, mid.mul(ca, b)), mid.mul(a0, cb));
        let outer_c = mid.add(
            mid.add(mid.mul(a0, ca), mid.mul(a1, mid.mul(ca, a))),
            mid.mul(a1, cb),
        );
        let inner = id.post_scale(a0).add(&g.post_scale(inner_c)).unwrap();
        let e = f
            .compose(&inner)
            .unwrap()
            .sub(&id.post_scale(a1))
            .unwrap()
            .sub(&g.post_scale(outer_c))
            .unwrap();
        e.kernel_dim() > 1
    });
    Ok(!bad)
}

/// Write a `t`-dimensional subspace of the top level as `S_{f,ξ}`, scanning
/// for the first `ξ ∉ F_{q^t}` (from the tower's generator on) for which
/// the projection onto `F_{q^t}` along `ξF_{q^t}` is bijective.
pub fn recast_graph_type(s: &FqSubspace) -> Result<(LinPoly, u32), FamilyError> {
    let tower = s.tower();
    let t = tower.t() as usize;
    if s.ambient() != Ambient::line(Level::Top) || s.dim() != t {
        return Err(FamilyError::Hypothesis("need a t-dimensional subspace of F_q^2t".into()));
    }
    let basis = s.basis_elements();
    for xi in tower.size(Level::Mid)..tower.size(Level::Top) {
        let parts: Vec<(u32, u32)> = basis.iter().map(|&v| tower.split_over(v, xi)).collect();
        let us: Vec<u32> = parts.iter().map(|p| p.0).collect();
        if FqSubspace::span_elements(tower, Level::Mid, s.base(), &us)?.dim() != t {
            continue;
        }
        // graph of f as a subspace of F_{q^t}², reduced to [I | f] form
        let vs: Vec<Vec<u32>> = parts.iter().map(|&(u, w)| vec![u, w]).collect();
        let graph = FqSubspace::span(tower, Ambient::pair(Level::Mid), s.base(), &vs)?;
        let values: Vec<u32> = graph.basis().iter().map(|v| v[1]).collect();
        let f = LinPoly::from_values(tower, Level::Mid, s.base(), &values)?;
        return Ok((f, xi));
    }
    Err(FamilyError::SearchFailed("subspace is not of graph type for any xi".into()))
}

/// `Ψ(L_U) = L_{F_{q^t} × S_U}` with `S_U = {u₀ + ξu₁ : (u₀, u₁) ∈ U}`, for
/// any subspace `U` of `F_{q^t}²`.
pub fn psi_subspace(u: &FqSubspace, xi: u32) -> Result<LinearSet, FamilyError> {
    let tower = u.tower();
    if u.ambient() != Ambient::pair(Level::Mid) {
        return Err(SubspaceError::AmbientMismatch.into());
    }
    if xi < tower.size(Level::Mid) || xi >= tower.size(Level::Top) {
        return Err(LinSetError::GeneratorInSubfield.into());
    }
    let top = tower.field(Level::Top);
    let spliced: Vec<u32> = u
        .basis()
        .iter()
        .map(|v| top.add(v[0], top.mul(xi, v[1])))
        .collect();
    let s = FqSubspace::span_elements(tower, Level::Top, u.base(), &spliced)?;
    let bq = tower.size(u.base());
    let m = tower.relative_degree(Level::Mid, u.base());
    let sub: Vec<u32> = (0..m).map(|j| bq.pow(j)).collect();
    let first = FqSubspace::span_elements(tower, Level::Top, u.base(), &sub)?;
    Ok(LinearSet::product(&first, &s)?)
}

/// `Ψ(L_f)`; requires `f` injective, i.e. `⟨(1,0)⟩ ∉ L_f`.
pub fn psi_product(f: &LinPoly, xi: u32) -> Result<LinearSet, FamilyError> {
    if f.level() != Level::Mid {
        return Err(FamilyError::Hypothesis("f must act on F_q^t".into()));
    }
    if !f.is_invertible() {
        return Err(FamilyError::Hypothesis("f has a nontrivial kernel, so (1,0) lies in L_f".into()));
    }
    let graph = LinearSet::graph(f)?;
    psi_subspace(graph.subspace(), xi)
}

/// `X^t + X^{dim U} + (q^t − 1)·W_U`; for `dim U = t` this is
/// `2X^t + (q^t − 1)·W_U`.
pub fn psi_predicted(base: &WeightEnumerator, t: usize, dim_u: usize, q: u64) -> WeightEnumerator {
    let mut axes = WeightEnumerator::default();
    axes.add(t, 1);
    axes.add(dim_u, 1);
    axes.combine(1, base, q.pow(t as u32) - 1)
}

/// The iterated enumerator in closed form:
/// `Σ_{k=1}^{m−1} 2Π_{i=k+1}^{m−1}(q^{2^i}−1)X^{2^k} + Π_{i=1}^{m−1}(q^{2^i}−1)·W₂`.
pub fn psi_closed_form(q: u64, m: u32, w2: &WeightEnumerator) -> WeightEnumerator {
    let prod = |from: u32| -> u64 { (from..m).map(|i| q.pow(1 << i) - 1).product() };
    let mut out = WeightEnumerator::default();
    for k in 1..m {
        out.add(1 << k, 2 * prod(k + 1));
    }
    out.combine(1, w2, prod(1))
}

/// `|L_f|·Π_{i=1}^{m−1}(q^{2^i}−1) + 2Σ_{k=1}^{m−1}Π_{i=k+1}^{m−1}(q^{2^i}−1)`.
pub fn psi_closed_size(q: u64, m: u32, base_size: u64) -> u64 {
    let prod = |from: u32| -> u64 { (from..m).map(|i| q.pow(1 << i) - 1).product() };
    base_size * prod(1) + 2 * (1..m).map(|k| prod(k + 1)).sum::<u64>()
}

/// The tower `(p, e, 2t)` whose `F_{q^{2t}}` level is the previous top,
/// with the isomorphism carrying the old top onto the new middle level.
pub fn next_tower(old: &FieldTower) -> Result<(FieldTower, impl Fn(u32) -> u32 + Send + Sync), FamilyError> {
    let old_top = old.field(Level::Top).clone();
    let gamma = old_top.exp(1);
    let ov = Overrides {
        mid: Some(old.min_poly_over_base(gamma)),
        ..Overrides::default()
    };
    let new = FieldTower::with_overrides(old.p(), old.e(), 2 * old.t(), &ov)?;
    let new_mid = new.field(Level::Mid).clone();
    let beta_log = new_mid.log(new.q()).expect("root is nonzero") as u64;
    let phi = move |x: u32| match old_top.log(x) {
        None => 0,
        Some(k) => new_mid.exp(k as u64 * beta_log),
    };
    Ok((new, phi))
}

#[derive(Debug, Clone)]
pub struct PsiIterate {
    pub m: u32,
    pub set: LinearSet,
    /// The starting subline, in `PG(1, q²)`.
    pub base: LinearSet,
    pub base_enumerator: WeightEnumerator,
    /// Enumerator predicted step by step from the one-step formula.
    pub predicted: WeightEnumerator,
    /// The same prediction from the closed form.
    pub closed_form: WeightEnumerator,
    pub closed_size: u64,
}

/// `Ψ^{m−1}(L_f)` in `PG(1, q^{2^m})` for the subline `f = X^q` of
/// `PG(1, q²)`.
pub fn psi_iterate(p: u32, e: u32, m: u32, bound: u64) -> Result<PsiIterate, FamilyError> {
    if m == 0 {
        return Err(FamilyError::Hypothesis("m must be at least 1".into()));
    }
    let q = (p as u64).pow(e);
    let (base, mut set, mut predicted) = if m == 1 {
        let tower = FieldTower::new(p, e, 1)?;
        let f = LinPoly::monomial(&tower, Level::Top, Level::Base, 1, 1)?;
        let ls = LinearSet::graph(&f)?;
        let w = ls.weight_enumerator(bound)?;
        (ls.clone(), ls, w)
    } else {
        let tower = FieldTower::new(p, e, 2)?;
        let f = LinPoly::monomial(&tower, Level::Mid, Level::Base, 1, 1)?;
        let base = LinearSet::graph(&f)?;
        let w = base.weight_enumerator(bound)?;
        let set = psi_product(&f, tower.xi())?;
        let pred = psi_predicted(&w, 2, 2, q);
        (base, set, pred)
    };
    let base_enumerator = base.weight_enumerator(bound)?;
    for _ in 2..m {
        let old = set.tower().clone();
        let (new, phi) = next_tower(&old)?;
        let moved: Vec<Vec<u32>> = set
            .subspace()
            .basis()
            .iter()
            .map(|v| vec![phi(v[0]), phi(v[1])])
            .collect();
        let u = FqSubspace::span(&new, Ambient::pair(Level::Mid), Level::Base, &moved)?;
        let t = new.t() as usize;
        predicted = psi_predicted(&predicted, t, u.dim(), q);
        set = psi_subspace(&u, new.xi())?;
    }
    Ok(PsiIterate {
        m,
        set,
        closed_form: psi_closed_form(q, m, &base_enumerator),
        closed_size: psi_closed_size(q, m, base_enumerator.size()),
        base,
        base_enumerator,
        predicted,
    })
}

/// A parsed family description.
#[derive(Debug, Clone)]
pub enum FamilySpec {
    Graph(GraphFamily),
    Psi { m: u32 },
}

/// Named maps on `F_{q^t}`: `trace`, `frob` (`X^q`), `frobK` (`X^{q^K}`),
/// `id`, `zero`, or `c:v0/v1/…` with packed coefficient values.
pub fn named_poly(tower: &FieldTower, name: &str) -> Result<LinPoly, FamilyError> {
    let bad = || FamilyError::Parse(format!("unknown polynomial {name:?}"));
    Ok(match name {
        "trace" => LinPoly::trace(tower, Level::Mid, Level::Base)?,
        "id" => LinPoly::identity(tower, Level::Mid, Level::Base)?,
        "zero" => LinPoly::zero(tower, Level::Mid, Level::Base)?,
        "frob" => LinPoly::monomial(tower, Level::Mid, Level::Base, 1, 1)?,
        _ => {
            if let Some(k) = name.strip_prefix("frob") {
                let k: usize = k.parse().map_err(|_| bad())?;
                LinPoly::monomial(tower, Level::Mid, Level::Base, k, 1)?
            } else if let Some(cs) = name.strip_prefix("c:") {
                let coeffs = cs
                    .split('/')
                    .map(|c| c.trim().parse::<u32>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()?;
                mid_poly(tower, &coeffs)?
            } else {
                return Err(bad());
            }
        }
    })
}

fn parse_params(text: &str) -> Result<BTreeMap<String, String>, FamilyError> {
    let mut out = BTreeMap::new();
    for kv in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| FamilyError::Parse(format!("expected key=value, got {kv:?}")))?;
        if out.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(FamilyError::Parse(format!("duplicate key {k:?}")));
        }
    }
    Ok(out)
}

/// Parse `trace-trace`, `f-trace:f=frob`, `monomial:s=2`,
/// `lp:s=1,delta=auto`, `f-f:f=trace`, `psi:m=3,base=subline`; graph
/// families also take `xi=auto` or a packed top-level value.
pub fn parse_family(tower: &FieldTower, text: &str) -> Result<FamilySpec, FamilyError> {
    let (kind, rest) = text.trim().split_once(':').unwrap_or((text.trim(), ""));
    let mut params = parse_params(rest)?;
    let mut take = |k: &str| params.remove(k);
    let parse_num = |k: &str, v: Option<String>| -> Result<Option<u32>, FamilyError> {
        match v.as_deref() {
            None | Some("auto") => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| FamilyError::Parse(format!("bad value for {k}: {s:?}"))),
        }
    };
    let xi = parse_num("xi", take("xi"))?;
    let parsed = match kind {
        "trace-trace" => FamilySpec::Graph(GraphFamily::trace_trace(tower, xi)?),
        "f-trace" | "f-f" => {
            let name = take("f").ok_or_else(|| FamilyError::Parse(format!("{kind} needs f=NAME")))?;
            let f = named_poly(tower, &name)?;
            let mut fam = if kind == "f-trace" {
                GraphFamily::f_trace(&f, xi)?
            } else {
                GraphFamily::f_f(&f, xi)?
            };
            fam.label = format!("{kind}:f={name}");
            FamilySpec::Graph(fam)
        }
        "monomial" => {
            let s = parse_num("s", take("s"))?.unwrap_or(1) as usize;
            FamilySpec::Graph(GraphFamily::monomial(tower, s, xi)?)
        }
        "lp" => {
            let s = parse_num("s", take("s"))?.unwrap_or(1) as usize;
            let delta = parse_num("delta", take("delta"))?;
            FamilySpec::Graph(GraphFamily::lp_binomial(tower, s, delta, xi)?)
        }
        "psi" => {
            let m = parse_num("m", take("m"))?
                .ok_or_else(|| FamilyError::Parse("psi needs m=".into()))?;
            match take("base").as_deref() {
                None | Some("subline") => {}
                Some(other) => return Err(FamilyError::Parse(format!("unknown base {other:?}"))),
            }
            if xi.is_some() {
                return Err(FamilyError::Parse("psi takes no xi".into()));
            }
            FamilySpec::Psi { m }
        }
        other => return Err(FamilyError::Parse(format!("unknown family {other:?}"))),
    };
    if let Some(k) = params.keys().next() {
        return Err(FamilyError::Parse(format!("unused parameter {k:?}")));
    }
    Ok(parsed)
}

/// Points of weight at least two, for the heavy-point comparisons.
pub fn heavy_points(ls: &LinearSet, bound: u64) -> Result<usize, FamilyError> {
    Ok(ls.point_weights(bound)?.iter().filter(|(_, w)| *w > 1).count())
}

/// Exactly two points of weight above one, both of weight at least two.
pub fn has_two_heavy_points(ls: &LinearSet, bound: u64) -> Result<bool, FamilyError> {
    Ok(heavy_points(ls, bound)? == 2)
}

pub use linset::{points_weight_at_least, two_heavy_points_check};
