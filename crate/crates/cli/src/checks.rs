//! The `verify` batch: each check rebuilds its objects, compares them with
//! a scan of the whole line or plane and returns one line per parameter set.

use std::collections::BTreeSet;

use serde::Serialize;

use linsets::evensets::verify_iterated_even_set;
use linsets::families::{
    build_avoiding_t, check_relation_fg, has_two_heavy_points, make_s_f, named_poly, psi_iterate,
    psi_predicted, psi_product, GraphFamily,
};
use linsets::gf::{FieldTower, Level};
use linsets::linpoly::LinPoly;
use linsets::linset::{
    points_weight_at_least, two_heavy_points_check, weight_via_alpha, weight_via_kernel, LinearSet, ProjPoint,
};
use linsets::subspace::{Ambient, FqSubspace};

use crate::config::CliError;

pub const NAMES: [&str; 15] = [
    "kernel-criterion",
    "weight-layers",
    "trace-trace",
    "monomial",
    "lp-binomial",
    "f-trace-bound",
    "xq-trace-bound",
    "f-f-bound",
    "two-heavy-points",
    "psi-product",
    "psi-iterate",
    "even-set",
    "norm-condition",
    "avoiding-t",
    "rank-weights",
];

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub check: String,
    pub params: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy)]
pub struct Params {
    pub field: Option<(u32, u32)>,
    pub t: Option<u32>,
    pub m: Option<u32>,
    pub bound: u64,
}

type Out = Result<Vec<CheckLine>, CliError>;

fn line(check: &str, params: String, pass: bool, detail: String) -> CheckLine {
    CheckLine { check: check.into(), params, pass, detail }
}

fn towers(p: &Params, defaults: &[(u32, u32, u32)]) -> Result<Vec<FieldTower>, CliError> {
    let list: Vec<(u32, u32, u32)> = match (p.field, p.t) {
        (Some((pp, e)), Some(t)) => vec![(pp, e, t)],
        (Some((pp, e)), None) => defaults.iter().filter(|d| d.0 == pp && d.1 == e).copied().collect(),
        (None, Some(t)) => defaults.iter().filter(|d| d.2 == t).copied().collect(),
        (None, None) => defaults.to_vec(),
    };
    if list.is_empty() {
        return Err(CliError::Usage("no default parameters match the given field".into()));
    }
    list.into_iter().map(|(pp, e, t)| Ok(FieldTower::new(pp, e, t)?)).collect()
}

fn tag(tw: &FieldTower) -> String {
    format!("q={} t={}", tw.q(), tw.t())
}

pub fn run(name: &str, p: &Params) -> Out {
    match name {
        "kernel-criterion" => kernel_criterion(p),
        "weight-layers" => weight_layers(p),
        "trace-trace" => family_check(name, p, &[(3, 1, 3), (3, 1, 4)], |tw| GraphFamily::trace_trace(tw, None)),
        "monomial" => family_check(name, p, &[(3, 1, 3)], |tw| GraphFamily::monomial(tw, 1, None)),
        "lp-binomial" => family_check(name, p, &[(2, 1, 5)], |tw| GraphFamily::lp_binomial(tw, 1, None, None)),
        "f-trace-bound" | "xq-trace-bound" | "f-f-bound" => bound_suite(name, p),
        "two-heavy-points" => two_heavy(p),
        "psi-product" => psi_product_check(p),
        "psi-iterate" => psi_iterate_check(p),
        "even-set" => even_set(p),
        "norm-condition" => norm_condition(p),
        "avoiding-t" => avoiding(p),
        "rank-weights" => rank_weights(p),
        other => Err(CliError::Usage(format!(
            "unknown check {other:?}; known: {}",
            NAMES.join(", ")
        ))),
    }
}

fn kernel_criterion(p: &Params) -> Out {
    let mut out = Vec::new();
    for tw in towers(p, &[(2, 1, 2), (2, 1, 3), (3, 1, 2)])? {
        let names = ["frob", "trace", "id", "zero"];
        let xis = [tw.xi(), tw.size(Level::Top) - 1];
        let mut instances = 0;
        let mut mismatch = None;
        for f in names {
            for g in names {
                for (&xi, &eta) in xis.iter().zip(xis.iter().rev()) {
                    let (fp, gp) = (named_poly(&tw, f)?, named_poly(&tw, g)?);
                    let (s, t) = (make_s_f(&fp, xi)?, make_s_f(&gp, eta)?);
                    let ls = LinearSet::product(&s, &t)?;
                    instances += 1;
                    for alpha in 1..tw.size(Level::Top) {
                        let oracle = ls.weight_oracle(ProjPoint::Affine(alpha));
                        let k = weight_via_kernel(&fp, xi, &gp, eta, alpha)?;
                        let a = weight_via_alpha(&s, &t, alpha)?;
                        if k != oracle || a != oracle {
                            mismatch.get_or_insert(format!("{f},{g} at alpha={alpha}: {oracle} {k} {a}"));
                        }
                    }
                }
            }
        }
        let pass = mismatch.is_none();
        out.push(line(
            "kernel-criterion",
            tag(&tw),
            pass,
            mismatch.unwrap_or(format!("{instances} instances agree at every point")),
        ));
    }
    Ok(out)
}

fn weight_layers(p: &Params) -> Out {
    let mut out = Vec::new();
    for tw in towers(p, &[(2, 1, 2), (3, 1, 2), (2, 1, 3)])? {
        let top = tw.size(Level::Top);
        let mut bad = None;
        let mut count = 0;
        // deterministic spans: strides through the top level
        for (ds, dt, step) in [(2, 2, 3u32), (3, 2, 5), (2, 3, 7), (3, 3, 11)] {
            if ds + dt > 2 * tw.t() as usize {
                continue;
            }
            let pick = |d: usize, off: u32| -> Vec<u32> { (0..d as u32).map(|i| 1 + (off + i * step) % (top - 1)).collect() };
            let s = FqSubspace::span_elements(&tw, Level::Top, Level::Base, &pick(ds, 0))?;
            let t = FqSubspace::span_elements(&tw, Level::Top, Level::Base, &pick(dt, step / 2))?;
            let ls = LinearSet::product(&s, &t)?;
            let weights = ls.point_weights(p.bound)?;
            let big = if s.dim() >= t.dim() { ProjPoint::Affine(0) } else { ProjPoint::Infinity };
            for i in 1..=s.dim().min(t.dim()) {
                count += 1;
                let mut got = points_weight_at_least(&s, &t, i, p.bound)?;
                got.insert(big);
                let want: BTreeSet<ProjPoint> = weights.iter().filter(|(_, w)| *w >= i).map(|(q, _)| *q).collect();
                if got != want {
                    bad.get_or_insert(format!("dims {ds},{dt} layer {i}"));
                }
            }
        }
        out.push(line(
            "weight-layers",
            tag(&tw),
            bad.is_none(),
            bad.unwrap_or(format!("{count} layers match the scan")),
        ));
    }
    Ok(out)
}

fn family_check(
    name: &str,
    p: &Params,
    defaults: &[(u32, u32, u32)],
    build: impl Fn(&FieldTower) -> Result<GraphFamily, linsets::families::FamilyError>,
) -> Out {
    let mut out = Vec::new();
    for tw in towers(p, defaults)? {
        let fam = build(&tw)?;
        let rep = fam.verify(p.bound)?;
        let mut detail = format!("{} (size {})", rep.enumerator, rep.size);
        for r in rep.regions.iter().filter(|r| r.violations > 0) {
            detail.push_str(&format!("; {}", r.first_violation.clone().unwrap_or_default()));
        }
        for n in &rep.notes {
            detail.push_str(&format!("; {n}"));
        }
        out.push(line(name, format!("{} {}", tag(&tw), rep.family), rep.pass, detail));
    }
    Ok(out)
}

fn bound_suite(name: &str, p: &Params) -> Out {
    let mut out = Vec::new();
    for tw in towers(p, &[(2, 1, 3), (3, 1, 2)])? {
        let polys: Vec<&str> = if name == "xq-trace-bound" {
            vec!["frob"]
        } else {
            vec!["trace", "frob", "id", "zero", "frob2", "c:1/1", "c:2/0/1"]
        };
        let mut fails = Vec::new();
        for f in &polys {
            let fp = named_poly(&tw, f)?;
            let fam = if name == "f-f-bound" {
                GraphFamily::f_f(&fp, None)?
            } else {
                GraphFamily::f_trace(&fp, None)?
            };
            if !fam.verify(p.bound)?.pass {
                fails.push(f.to_string());
            }
        }
        let detail = if fails.is_empty() {
            format!("{} maps within bounds", polys.len())
        } else {
            format!("violations for {}", fails.join(","))
        };
        out.push(line(name, tag(&tw), fails.is_empty(), detail));
    }
    Ok(out)
}

fn two_heavy(p: &Params) -> Out {
    let mut out = Vec::new();
    for tw in towers(p, &[(2, 1, 3), (3, 1, 2), (2, 1, 4)])? {
        let names = ["frob", "trace", "id", "frob2"];
        let top = tw.size(Level::Top);
        let mut n = 0;
        let mut bad = None;
        for f in names {
            for g in names {
                for (xi, eta) in [(tw.xi(), tw.xi()), (tw.xi(), top - 1)] {
                    let (fp, gp) = (named_poly(&tw, f)?, named_poly(&tw, g)?);
                    let (s_g, s_f) = (make_s_f(&gp, eta)?, make_s_f(&fp, xi)?);
                    let ls = LinearSet::product(&s_g, &s_f)?;
                    let by_relation = check_relation_fg(&fp, &gp, xi, eta, p.bound)?;
                    let by_scan = has_two_heavy_points(&ls, p.bound)?;
                    let by_cosets = two_heavy_points_check(&s_g, &s_f, p.bound)?;
                    n += 1;
                    if by_relation != by_scan || by_cosets != by_scan {
                        bad.get_or_insert(format!("f={f} g={g} xi={xi} eta={eta}"));
                    }
                }
            }
        }
        out.push(line(
            "two-heavy-points",
            tag(&tw),
            bad.is_none(),
            bad.unwrap_or(format!("{n} instances, three criteria agree")),
        ));
    }
    Ok(out)
}

fn psi_product_check(p: &Params) -> Out {
    let mut out = Vec::new();
    for tw in towers(p, &[(2, 1, 2), (3, 1, 2), (2, 1, 3)])? {
        let f = LinPoly::monomial(&tw, Level::Mid, Level::Base, 1, 1)?;
        let base = LinearSet::graph(&f)?.weight_enumerator(p.bound)?;
        let ls = psi_product(&f, tw.xi())?;
        let got = ls.weight_enumerator(p.bound)?;
        let t = tw.t() as usize;
        let want = psi_predicted(&base, t, t, tw.q() as u64);
        let pass = got == want && got.satisfies_identity(ls.base_size(), ls.rank());
        out.push(line(
            "psi-product",
            tag(&tw),
            pass,
            format!("{got} (size {}), predicted {want}", got.size()),
        ));
    }
    Ok(out)
}

fn psi_iterate_check(p: &Params) -> Out {
    let (pp, e) = p.field.unwrap_or((2, 1));
    let ms: Vec<u32> = p.m.map(|m| vec![m]).unwrap_or(vec![2, 3]);
    let mut out = Vec::new();
    for m in ms {
        let it = psi_iterate(pp, e, m, p.bound)?;
        let got = it.set.weight_enumerator(p.bound)?;
        let pass = got == it.predicted
            && got == it.closed_form
            && got.size() == it.closed_size
            && got.satisfies_identity(it.set.base_size(), it.set.rank());
        out.push(line(
            "psi-iterate",
            format!("q={} m={m}", (pp as u64).pow(e)),
            pass,
            format!("{got} (size {}), closed form {} (size {})", got.size(), it.closed_form, it.closed_size),
        ));
    }
    Ok(out)
}

fn even_set(p: &Params) -> Out {
    let m = p.m.unwrap_or(2);
    let c = verify_iterated_even_set(m, p.bound)?;
    let spectrum: Vec<String> = c.report.spectrum.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    Ok(vec![line(
        "even-set",
        format!("q={} m={m}", c.report.q),
        c.pass,
        format!(
            "size {} (formula {}), spectrum {}, even {}",
            c.report.size,
            c.formula_size,
            spectrum.join(" "),
            c.report.even
        ),
    )])
}

fn norm_condition(p: &Params) -> Out {
    let mut out = Vec::new();
    for tw in towers(p, &[(2, 1, 2), (2, 1, 3), (3, 1, 2), (3, 1, 3)])? {
        let t = tw.t() as usize;
        let mut n = 0;
        let mut bad = None;
        for k in 1..t {
            for s in (1..t).filter(|s| linsets::linpoly::gcd(*s, t) == 1) {
                for w in FqSubspace::full(&tw, Ambient::line(Level::Mid), Level::Base).enumerate_subspaces(k, p.bound)? {
                    let f = LinPoly::subspace_polynomial_with_step(&w, s)?.neg();
                    n += 1;
                    if !f.normcond_check(s, k)? {
                        bad.get_or_insert(format!("k={k} s={s} W={w}"));
                    }
                }
            }
        }
        out.push(line(
            "norm-condition",
            tag(&tw),
            bad.is_none(),
            bad.unwrap_or(format!("{n} splitting polynomials")),
        ));
    }
    Ok(out)
}

fn avoiding(p: &Params) -> Out {
    let mut out = Vec::new();
    for tw in towers(p, &[(2, 1, 3), (3, 1, 2), (2, 1, 4)])? {
        let n = 2 * tw.t() as usize;
        let top = tw.size(Level::Top);
        let mut bad = None;
        let mut cases = 0;
        for d in 2..=n / 2 {
            let gens: Vec<u32> = (0..d as u32).map(|i| 1 + (3 + 7 * i * i) % (top - 1)).collect();
            let s = FqSubspace::span_elements(&tw, Level::Top, Level::Base, &gens)?;
            if 2 * s.dim() > n {
                continue;
            }
            for r in 2..=s.dim() {
                cases += 1;
                let t = build_avoiding_t(&s, r)?;
                let pts = points_weight_at_least(&s, &t, r, p.bound)?;
                if pts.into_iter().collect::<Vec<_>>() != vec![ProjPoint::Infinity] {
                    bad.get_or_insert(format!("dim S={} r={r}", s.dim()));
                }
            }
        }
        out.push(line(
            "avoiding-t",
            tag(&tw),
            bad.is_none(),
            bad.unwrap_or(format!("{cases} cases with only the axes heavy")),
        ));
    }
    Ok(out)
}

fn rank_weights(p: &Params) -> Out {
    let mut out = Vec::new();
    for tw in towers(p, &[(2, 1, 2), (3, 1, 2)])? {
        let fam = GraphFamily::trace_trace(&tw, None)?;
        let ls = fam.build()?;
        let top = tw.size(Level::Top);
        let mut bad = None;
        for x0 in 0..top.min(32) {
            for x1 in 0..top.min(32) {
                if (x0, x1) == (0, 0) {
                    continue;
                }
                if ls.rank_weight(x0, x1)? != ls.rank_weight_direct(x0, x1)? {
                    bad.get_or_insert(format!("({x0},{x1})"));
                }
            }
        }
        out.push(line(
            "rank-weights",
            tag(&tw),
            bad.is_none(),
            bad.unwrap_or("weights match the direct rank".into()),
        ));
    }
    Ok(out)
}
