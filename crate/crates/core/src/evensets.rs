//! Sets of even type in `PG(2, q)`, `q` even, built from an `F_2`-linear
//! graph `g` on `F_q`: the affine points `(1, x, g(x))` together with the
//! points of `X = 0` that are not directions of `{(x, g(x))}`.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::families::{psi_closed_size, psi_iterate, psi_product, FamilyError};
use crate::gf::{check_bound, FieldError, FieldTower, Level, LevelField};
use crate::linpoly::{LinPoly, PolyError};
use crate::linset::{LinSetError, LinearSet, ProjPoint, WeightEnumerator};
use crate::subspace::{Ambient, FqSubspace, SubspaceError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvenSetError {
    #[error("plane order {0} is odd; sets of even type need even order")]
    OddOrder(u32),
    #[error("map is not F_2-linear on the plane field")]
    NotBinary,
    #[error("m = {0} is out of range")]
    BadM(u32),
    #[error("{0}")]
    Family(#[from] FamilyError),
    #[error("{0}")]
    LinSet(#[from] LinSetError),
    #[error("{0}")]
    Poly(#[from] PolyError),
    #[error("{0}")]
    Subspace(#[from] SubspaceError),
    #[error("{0}")]
    Field(#[from] FieldError),
}

impl EvenSetError {
    pub fn is_resource(&self) -> bool {
        match self {
            EvenSetError::Field(FieldError::BoundExceeded { .. }) => true,
            EvenSetError::Family(e) => e.is_resource(),
            EvenSetError::LinSet(LinSetError::Field(FieldError::BoundExceeded { .. })) => true,
            _ => false,
        }
    }
}

/// A point (or, dually, a line) of `PG(2, q)`, first nonzero entry 1.
pub type PlanePoint = [u32; 3];

/// `PG(2, q)` over one level of a tower of characteristic 2.
#[derive(Debug, Clone)]
pub struct Plane {
    tower: FieldTower,
    level: Level,
}

impl Plane {
    pub fn new(tower: &FieldTower, level: Level) -> Result<Self, EvenSetError> {
        if tower.p() != 2 {
            return Err(EvenSetError::OddOrder(tower.size(level)));
        }
        Ok(Plane { tower: tower.clone(), level })
    }

    /// `q = 2^s`: the top of `(2, 1, s/2)` for even `s`, else the middle of
    /// `(2, 1, s)`. This matches the towers reached by iterating `Ψ`.
    pub fn of_order(q: u32) -> Result<Self, EvenSetError> {
        if q < 2 || !q.is_power_of_two() {
            return Err(EvenSetError::OddOrder(q));
        }
        let s = q.trailing_zeros();
        if s.is_multiple_of(2) {
            Plane::new(&FieldTower::new(2, 1, s / 2)?, Level::Top)
        } else {
            Plane::new(&FieldTower::new(2, 1, s)?, Level::Mid)
        }
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn order(&self) -> u32 {
        self.tower.size(self.level)
    }

    fn field(&self) -> &LevelField {
        self.tower.field(self.level)
    }

    pub fn normalize(&self, v: [u32; 3]) -> Option<PlanePoint> {
        let f = self.field();
        let lead = *v.iter().find(|&&x| x != 0)?;
        let inv = f.inv(lead).unwrap();
        Some(v.map(|x| f.mul(x, inv)))
    }

    /// All `q² + q + 1` normalized triples.
    pub fn points(&self) -> impl Iterator<Item = PlanePoint> {
        let q = self.order();
        let affine = (0..q).flat_map(move |x| (0..q).map(move |y| [1, x, y]));
        let infinite = (0..q).map(|y| [0, 1, y]);
        affine.chain(infinite).chain(std::iter::once([0, 0, 1]))
    }

    /// Lines as dual triples; same normal form as points.
    pub fn lines(&self) -> impl Iterator<Item = PlanePoint> {
        self.points()
    }

    pub fn incident(&self, point: &PlanePoint, line: &PlanePoint) -> bool {
        let f = self.field();
        point
            .iter()
            .zip(line)
            .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            == 0
    }

    pub fn format_point(&self, p: &PlanePoint) -> String {
        let parts: Vec<String> = p.iter().map(|&x| self.tower.format_element(self.level, x)).collect();
        format!("({})", parts.join(","))
    }

    /// `|ℓ ∩ set| ↦ number of lines`, over all lines.
    pub fn spectrum(&self, set: &BTreeSet<PlanePoint>, bound: u64) -> Result<BTreeMap<usize, u64>, EvenSetError> {
        let q = self.order() as u64;
        check_bound((q * q + q + 1) * set.len().max(1) as u64, bound.saturating_mul(64))?;
        let pts: Vec<&PlanePoint> = set.iter().collect();
        let lines: Vec<PlanePoint> = self.lines().collect();
        let sizes: Vec<usize> = lines
            .par_iter()
            .map(|l| pts.iter().filter(|p| self.incident(p, l)).count())
            .collect();
        let mut out = BTreeMap::new();
        for s in sizes {
            *out.entry(s).or_default() += 1;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvenSetReport {
    pub q: u32,
    pub points: Vec<PlanePoint>,
    pub size: usize,
    /// Line-intersection size to number of lines.
    pub spectrum: BTreeMap<usize, u64>,
    pub even: bool,
    /// The `F_2`-linear set `{⟨(x, g(x))⟩}`.
    pub lg_enumerator: WeightEnumerator,
    pub expected_size: u64,
    /// Lines through a direction of weight `w` meet the affine part in 0 or
    /// `2^w` points; the line `X = 0` meets the set in `q + 1 − |L_g|`.
    pub directions_ok: bool,
    pub notes: Vec<String>,
    pub pass: bool,
}

fn is_binary(tower: &FieldTower, level: Level, base: Level) -> bool {
    tower.p() == 2 && tower.size(base) == 2 && level != base
}

/// The translation set of even type of an `F_2`-linear `g` on the plane field.
pub fn translation_even_set(plane: &Plane, g: &LinPoly, bound: u64) -> Result<EvenSetReport, EvenSetError> {
    if g.level() != plane.level() || g.tower().to_text() != plane.tower().to_text() {
        return Err(EvenSetError::NotBinary);
    }
    if !is_binary(plane.tower(), plane.level(), g.base()) {
        return Err(EvenSetError::NotBinary);
    }
    let q = plane.order();
    let f = plane.field();
    let mut set = BTreeSet::new();
    for x in 0..q {
        set.insert([1, x, g.eval(x)]);
    }
    // directions m = g(x)/x of the graph, each with its weight
    let lg = LinearSet::graph(g)?;
    let weights: BTreeMap<u32, usize> = lg
        .point_weights(bound)?
        .into_iter()
        .map(|(p, w)| match p {
            ProjPoint::Affine(m) => (m, w),
            ProjPoint::Infinity => unreachable!("a graph has no point (0,1)"),
        })
        .collect();
    for y in 0..q {
        if !weights.contains_key(&y) {
            set.insert([0, 1, y]);
        }
    }
    set.insert([0, 0, 1]);
    let spectrum = plane.spectrum(&set, bound)?;
    let even = spectrum.keys().all(|s| s % 2 == 0);
    let lg_enumerator: WeightEnumerator = weights.values().map(|&w| (w, 1)).collect();
    let expected_size = 2 * q as u64 + 1 - lg_enumerator.size();
    let mut notes = Vec::new();
    if set.len() as u64 != expected_size {
        notes.push(format!("size {} differs from 2q+1-|L_g| = {expected_size}", set.len()));
    }
    // direction check: the affine line through (1,x0,y0) with slope m is
    // met by the affine part exactly where g(x) − mx is constant
    let mut directions_ok = true;
    let infinity_line = [1, 0, 0];
    let on_infinity = set.iter().filter(|p| plane.incident(p, &infinity_line)).count();
    if on_infinity as u64 != q as u64 + 1 - lg_enumerator.size() {
        directions_ok = false;
    }
    for (&m, &w) in &weights {
        let mut fibres: BTreeMap<u32, usize> = BTreeMap::new();
        for x in 0..q {
            *fibres.entry(f.sub(g.eval(x), f.mul(m, x))).or_default() += 1;
        }
        // lines of slope m: one per intercept, each meets the affine part in
        // its fibre size (0 if the intercept is missed)
        let ok = fibres.values().all(|&c| c == 1 << w) && (fibres.len() == q as usize >> w);
        directions_ok &= ok;
    }
    let pass = even && notes.is_empty() && directions_ok;
    Ok(EvenSetReport {
        q,
        size: set.len(),
        points: set.into_iter().collect(),
        spectrum,
        even,
        lg_enumerator,
        expected_size,
        directions_ok,
        notes,
        pass,
    })
}

/// Rewrite an `F_2`-linear set `L_U` of `PG(1, q)` as a graph through the
/// projectivity `(x, y) ↦ (y − cx, x)`, with `⟨(1, c)⟩` the first point
/// missed by `L_U`. Weights are unchanged.
pub fn as_graph(ls: &LinearSet, bound: u64) -> Result<LinPoly, EvenSetError> {
    let tower = ls.tower();
    let level = ls.level();
    let f = tower.field(level);
    let hit: BTreeSet<ProjPoint> = ls.point_weights(bound)?.into_iter().map(|(p, _)| p).collect();
    let c = (0..tower.size(level))
        .find(|&c| !hit.contains(&ProjPoint::Affine(c)))
        .ok_or_else(|| FamilyError::SearchFailed("linear set covers every affine point".into()))?;
    let moved: Vec<Vec<u32>> = ls
        .subspace()
        .basis()
        .iter()
        .map(|v| vec![f.sub(v[1], f.mul(c, v[0])), v[0]])
        .collect();
    let graph = FqSubspace::span(tower, Ambient::pair(level), ls.base(), &moved)?;
    let values: Vec<u32> = graph.basis().iter().map(|v| v[1]).collect();
    Ok(LinPoly::from_values(tower, level, ls.base(), &values)?)
}

/// The even set from `Ψ^{m−1}` of the subline, in `PG(2, 2^{2^m})`.
#[derive(Debug, Clone, Serialize)]
pub struct IteratedEvenSetCheck {
    pub m: u32,
    pub report: EvenSetReport,
    /// `2q + 1 − |Ψ^{m−1}(L_f)|` from the closed form.
    pub formula_size: u64,
    /// `{0} ∪ {2^{2^k} : 0 ≤ k < m} ∪ {q + 1 − |L_g|}`.
    pub allowed_spectrum: Vec<usize>,
    /// For `m = 2`: does the one-step build from a scattered map on
    /// `F_{√q}` give the same size and spectrum?
    pub square_root_build_agrees: Option<bool>,
    pub pass: bool,
}

pub fn verify_iterated_even_set(m: u32, bound: u64) -> Result<IteratedEvenSetCheck, EvenSetError> {
    if m == 0 || m > 3 {
        return Err(EvenSetError::BadM(m));
    }
    let iter = psi_iterate(2, 1, m, bound)?;
    let plane = Plane::new(iter.set.tower(), iter.set.level())?;
    let q = plane.order() as u64;
    check_bound(q * q + q + 1, bound)?;
    let g = as_graph(&iter.set, bound)?;
    let report = translation_even_set(&plane, &g, bound)?;
    let formula_size = 2 * q + 1 - psi_closed_size(2, m, iter.base_enumerator.size());
    let mut allowed: BTreeSet<usize> = (0..m).map(|k| 1usize << (1 << k)).collect();
    allowed.insert(0);
    allowed.insert((q + 1 - report.lg_enumerator.size()) as usize);
    let spectrum_ok = report.spectrum.keys().all(|s| allowed.contains(s));
    let square_root_build_agrees = if m == 2 {
        let other = square_root_build(&plane, bound)?;
        Some(other.size == report.size && other.spectrum == report.spectrum)
    } else {
        None
    };
    let pass = report.pass
        && report.size as u64 == formula_size
        && spectrum_ok
        && square_root_build_agrees != Some(false);
    Ok(IteratedEvenSetCheck {
        m,
        report,
        formula_size,
        allowed_spectrum: allowed.into_iter().collect(),
        square_root_build_agrees,
        pass,
    })
}

/// `L_{F_{√q} × S_{f,ξ}}` with `f = X²` scattered on `F_{√q}`, in one step.
pub fn square_root_build(plane: &Plane, bound: u64) -> Result<EvenSetReport, EvenSetError> {
    if plane.level() != Level::Top {
        return Err(EvenSetError::BadM(0));
    }
    let tower = plane.tower();
    let f = LinPoly::monomial(tower, Level::Mid, Level::Base, 1, 1)?;
    let xi = (tower.size(Level::Mid)..tower.size(Level::Top)).next_back().unwrap();
    let ls = psi_product(&f, xi)?;
    let g = as_graph(&ls, bound)?;
    translation_even_set(plane, &g, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::DEFAULT_ENUMERATION_BOUND as BOUND;

    #[test]
    fn small_planes() {
        for (q, npts) in [(2u32, 7usize), (4, 21), (8, 73)] {
            let plane = Plane::of_order(q).unwrap();
            assert_eq!(plane.order(), q);
            let pts: Vec<_> = plane.points().collect();
            assert_eq!(pts.len(), npts);
            let flags: usize = plane
                .lines()
                .map(|l| {
                    let on = pts.iter().filter(|p| plane.incident(p, &l)).count();
                    assert_eq!(on, q as usize + 1);
                    on
                })
                .sum();
            assert_eq!(flags, npts * (q as usize + 1));
        }
        assert!(matches!(Plane::of_order(3), Err(EvenSetError::OddOrder(3))));
        let odd = FieldTower::new(3, 1, 1).unwrap();
        assert!(Plane::new(&odd, Level::Top).is_err());
    }

    #[test]
    fn zero_map_is_even() {
        let plane = Plane::of_order(4).unwrap();
        let g = LinPoly::zero(plane.tower(), plane.level(), Level::Prime).unwrap();
        let rep = translation_even_set(&plane, &g, BOUND).unwrap();
        assert!(rep.even && rep.pass);
        assert_eq!(rep.size, 8);
    }

    #[test]
    fn every_binary_map_on_f8() {
        let plane = Plane::of_order(8).unwrap();
        let (tw, lv) = (plane.tower().clone(), plane.level());
        // all 8^3 F_2-linear maps via their values on the basis 1, 2, 4
        for code in 0..512u32 {
            let values = [code & 7, (code >> 3) & 7, code >> 6];
            let g = LinPoly::from_values(&tw, lv, Level::Prime, &values).unwrap();
            let rep = translation_even_set(&plane, &g, BOUND).unwrap();
            assert!(rep.pass, "{values:?} {rep:?}");
        }
    }

    #[test]
    fn graph_rewrite_keeps_weights() {
        let tw = FieldTower::new(2, 1, 2).unwrap();
        let f = LinPoly::monomial(&tw, Level::Mid, Level::Base, 1, 1).unwrap();
        let ls = psi_product(&f, tw.xi()).unwrap();
        let g = as_graph(&ls, BOUND).unwrap();
        let lg = LinearSet::graph(&g).unwrap();
        assert_eq!(lg.weight_enumerator(BOUND).unwrap(), ls.weight_enumerator(BOUND).unwrap());
    }

    #[test]
    fn order_sixteen() {
        let c = verify_iterated_even_set(2, BOUND).unwrap();
        assert!(c.pass, "{c:?}");
        assert_eq!(c.report.size, 22);
        assert_eq!(c.report.spectrum.values().sum::<u64>(), 273);
        assert_eq!(c.square_root_build_agrees, Some(true));
        let c1 = verify_iterated_even_set(1, BOUND).unwrap();
        assert!(c1.pass);
        assert_eq!(c1.report.size, 6);
    }
}
