mod checks;
mod config;
mod output;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use linsets::evensets::{translation_even_set, verify_iterated_even_set, Plane};
use linsets::families::{parse_family, psi_iterate, FamilySpec, GraphFamily};
use linsets::gf::{check_bound, FieldTower, Level};
use linsets::linpoly::LinPoly;
use linsets::linset::{points_weight_at_least, LinearSet, ProjPoint, WeightEnumerator};
use linsets::subspace::FqSubspace;

use config::{CliError, Command, RunConfig, SetArgs};
use output::Output;

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    if let Some(j) = cfg.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cfg).and_then(|out| out.emit(&cfg).map(|_| out.pass)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cfg: &RunConfig) -> Result<Output, CliError> {
    match &cfg.command {
        Command::FieldInfo => field_info(cfg),
        Command::Weights(set) => weights(cfg, set),
        Command::Points { set, at_least, exactly } => points(cfg, set, *at_least, *exactly),
        Command::RankWeights(set) => rank_weights(cfg, set),
        Command::Evenset { m, g, list } => evenset(cfg, *m, g.as_deref(), *list),
        Command::Verify { all, only, m } => verify(cfg, *all, only, *m),
    }
}

fn dry_run(cfg: &RunConfig, what: &str, cost: u64) -> Result<Option<Output>, CliError> {
    if cfg.dry_run {
        let mut out = Output::new("dry-run");
        let config = cfg.canonical();
        out.table = format!("{config}\n{what}: about {cost} weight evaluations (bound {})\n", cfg.max_field);
        out.record(&DryRun { config, cost, bound: cfg.max_field });
        return Ok(Some(out));
    }
    Ok(None)
}

#[derive(Serialize)]
struct DryRun {
    config: String,
    cost: u64,
    bound: u64,
}

#[derive(Serialize)]
struct FieldInfo {
    tower: String,
    p: u32,
    e: u32,
    q: u32,
    t: u32,
    sizes: BTreeMap<String, u32>,
    xi: String,
    xi_square: [String; 2],
}

fn field_info(cfg: &RunConfig) -> Result<Output, CliError> {
    let tw = cfg.field.tower()?;
    let (a, b) = tw.quadratic_of(tw.xi());
    let info = FieldInfo {
        tower: tw.to_text(),
        p: tw.p(),
        e: tw.e(),
        q: tw.q(),
        t: tw.t(),
        sizes: Level::ALL.iter().map(|l| (l.to_string(), tw.size(*l))).collect(),
        xi: tw.format_element(Level::Top, tw.xi()),
        xi_square: [tw.format_element(Level::Mid, a), tw.format_element(Level::Mid, b)],
    };
    let mut out = Output::new("field-info");
    out.table = format!(
        "tower   {}\nlevels  {}\nxi      {} with xi^2 = {}*xi + {}\n",
        info.tower,
        Level::ALL.iter().map(|l| format!("F_{l}: {}", tw.size(*l))).collect::<Vec<_>>().join(", "),
        info.xi,
        info.xi_square[0],
        info.xi_square[1]
    );
    out.record(&info);
    Ok(out)
}

enum Source {
    Graph(GraphFamily),
    Psi(u32),
    Custom(FqSubspace, FqSubspace),
}

fn source(cfg: &RunConfig, set: &SetArgs) -> Result<Source, CliError> {
    match (&set.family, set.s_basis.is_empty(), set.t_basis.is_empty()) {
        (Some(fam), true, true) => {
            // psi carries its own tower, so --t is optional there
            if fam.trim_start().starts_with("psi") {
                let (p, e) = cfg.field.require_prime_power()?;
                let probe = FieldTower::new(p, e, 1)?;
                let FamilySpec::Psi { m } = parse_family(&probe, fam)? else {
                    unreachable!()
                };
                if m == 0 {
                    return Err(CliError::Usage("m must be at least 1".into()));
                }
                if let Some(t) = cfg.field.t {
                    if t != 1 << (m - 1) {
                        return Err(CliError::Usage(format!("psi with m={m} lives in t={}, got --t {t}", 1 << (m - 1))));
                    }
                }
                return Ok(Source::Psi(m));
            }
            match parse_family(&cfg.field.tower()?, fam)? {
                FamilySpec::Graph(g) => Ok(Source::Graph(g)),
                FamilySpec::Psi { m } => Ok(Source::Psi(m)),
            }
        }
        (None, false, false) => {
            let tw = cfg.field.tower()?;
            let s = FqSubspace::span_elements(&tw, Level::Top, Level::Base, &set.s_basis)?;
            let t = FqSubspace::span_elements(&tw, Level::Top, Level::Base, &set.t_basis)?;
            Ok(Source::Custom(s, t))
        }
        _ => Err(CliError::Usage("give either --family or both --s-basis and --t-basis".into())),
    }
}

fn build_set(cfg: &RunConfig, src: &Source) -> Result<LinearSet, CliError> {
    Ok(match src {
        Source::Graph(g) => g.build()?,
        Source::Psi(m) => {
            let (p, e) = cfg.field.require_prime_power()?;
            psi_iterate(p, e, *m, cfg.max_field)?.set
        }
        Source::Custom(s, t) => LinearSet::product(s, t)?,
    })
}

fn scan_cost(cfg: &RunConfig, src: &Source) -> Result<u64, CliError> {
    Ok(match src {
        Source::Psi(m) => {
            let (p, e) = cfg.field.require_prime_power()?;
            (p as u64).saturating_pow(e << *m) + 1
        }
        Source::Graph(g) => g.tower().size(Level::Top) as u64 + 1,
        Source::Custom(s, _) => s.tower().size(Level::Top) as u64 + 1,
    })
}

#[derive(Serialize)]
struct PsiRecord {
    m: u32,
    q: u64,
    enumerator: WeightEnumerator,
    size: u64,
    predicted: WeightEnumerator,
    closed_form: WeightEnumerator,
    closed_size: u64,
    identity: bool,
    pass: bool,
}

#[derive(Serialize)]
struct SetRecord {
    tower: String,
    rank: usize,
    enumerator: WeightEnumerator,
    size: u64,
    identity: bool,
    pass: bool,
}

fn weights(cfg: &RunConfig, set: &SetArgs) -> Result<Output, CliError> {
    let src = source(cfg, set)?;
    if let Some(out) = dry_run(cfg, "weights", scan_cost(cfg, &src)?)? {
        return Ok(out);
    }
    let mut out = Output::new("weights");
    match &src {
        Source::Graph(g) => {
            let rep = g.verify(cfg.max_field)?;
            out.table = output::family_table(&rep);
            out.pass = rep.pass;
            out.record(&rep);
        }
        Source::Psi(m) => {
            let (p, e) = cfg.field.require_prime_power()?;
            let it = psi_iterate(p, e, *m, cfg.max_field)?;
            let got = it.set.weight_enumerator(cfg.max_field)?;
            let identity = got.satisfies_identity(it.set.base_size(), it.set.rank());
            let pass = identity && got == it.predicted && got == it.closed_form && got.size() == it.closed_size;
            let rec = PsiRecord {
                m: *m,
                q: (p as u64).pow(e),
                size: got.size(),
                enumerator: got,
                predicted: it.predicted,
                closed_form: it.closed_form,
                closed_size: it.closed_size,
                identity,
                pass,
            };
            out.table = format!(
                "iterated product, m={} q={} in {}\nenumerator   {} (size {})\npredicted    {}\nclosed form  {} (size {})\nidentity     {}\n{}\n",
                rec.m,
                rec.q,
                it.set.tower().to_text(),
                rec.enumerator,
                rec.size,
                rec.predicted,
                rec.closed_form,
                rec.closed_size,
                rec.identity,
                output::verdict(pass)
            );
            out.pass = pass;
            out.record(&rec);
        }
        Source::Custom(..) => {
            let ls = build_set(cfg, &src)?;
            let e = ls.weight_enumerator(cfg.max_field)?;
            let identity = e.satisfies_identity(ls.base_size(), ls.rank());
            let rec = SetRecord {
                tower: ls.tower().to_text(),
                rank: ls.rank(),
                size: e.size(),
                enumerator: e,
                identity,
                pass: identity,
            };
            out.table = format!(
                "S x T of rank {} in {}\nenumerator  {} (size {})\nidentity    {}\n{}\n",
                rec.rank,
                rec.tower,
                rec.enumerator,
                rec.size,
                rec.identity,
                output::verdict(identity)
            );
            out.pass = identity;
            out.record(&rec);
        }
    }
    Ok(out)
}

/// Points of weight at least `i` from the intersection criterion; the
/// axis point of the larger factor is added back.
fn layer(s: &FqSubspace, t: &FqSubspace, i: usize, bound: u64) -> Result<BTreeSet<ProjPoint>, CliError> {
    let big = if s.dim() >= t.dim() { ProjPoint::Affine(0) } else { ProjPoint::Infinity };
    let (r, top) = (s.dim().min(t.dim()), s.dim().max(t.dim()));
    let mut out = BTreeSet::new();
    if i <= r {
        out = points_weight_at_least(s, t, i, bound)?;
    }
    if i <= top {
        out.insert(big);
    }
    Ok(out)
}

#[derive(Serialize)]
struct PointsRecord {
    rule: String,
    points: Vec<String>,
    count: usize,
    matches_scan: bool,
}

fn points(cfg: &RunConfig, set: &SetArgs, at_least: Option<usize>, exactly: Option<usize>) -> Result<Output, CliError> {
    let (i, exact) = match (at_least, exactly) {
        (Some(i), None) => (i, false),
        (None, Some(i)) => (i, true),
        _ => return Err(CliError::Usage("give --at-least or --exactly".into())),
    };
    if i == 0 {
        return Err(CliError::Usage("weights start at 1".into()));
    }
    let src = source(cfg, set)?;
    if let Some(out) = dry_run(cfg, "points", scan_cost(cfg, &src)?)? {
        return Ok(out);
    }
    let ls = build_set(cfg, &src)?;
    let (s, t) = ls.split().cloned().expect("products keep their factors");
    let bound = cfg.max_field;
    let mut pts = layer(&s, &t, i, bound)?;
    if exact {
        let next = layer(&s, &t, i + 1, bound)?;
        pts = pts.difference(&next).copied().collect();
    }
    let scan: BTreeSet<ProjPoint> = ls
        .point_weights(bound)?
        .into_iter()
        .filter(|(_, w)| if exact { *w == i } else { *w >= i })
        .map(|(p, _)| p)
        .collect();
    let (tw, lv) = (ls.tower().clone(), ls.level());
    let rec = PointsRecord {
        rule: format!("{} {i}", if exact { "weight =" } else { "weight >=" }),
        points: pts.iter().map(|p| p.format(&tw, lv)).collect(),
        count: pts.len(),
        matches_scan: pts == scan,
    };
    let mut out = Output::new("points");
    out.table = format!(
        "{} points with {}\n{}\nagrees with full scan: {}\n",
        rec.count,
        rec.rule,
        rec.points.join("\n"),
        rec.matches_scan
    );
    out.pass = rec.matches_scan;
    out.record(&rec);
    Ok(out)
}

#[derive(Serialize)]
struct RankRecord {
    dimension: usize,
    length: usize,
    /// Rank weight to number of codewords.
    distribution: BTreeMap<usize, u128>,
    checked_directly: usize,
    pass: bool,
}

fn rank_weights(cfg: &RunConfig, set: &SetArgs) -> Result<Output, CliError> {
    let src = source(cfg, set)?;
    if let Some(out) = dry_run(cfg, "rank-weights", scan_cost(cfg, &src)?)? {
        return Ok(out);
    }
    let ls = build_set(cfg, &src)?;
    let weights: BTreeMap<ProjPoint, usize> = ls.point_weights(cfg.max_field)?.into_iter().collect();
    let size = ls.tower().size(ls.level());
    let k = ls.rank();
    let per_point = size as u128 - 1;
    let mut distribution: BTreeMap<usize, u128> = BTreeMap::new();
    // the codeword of (x0, x1) has rank k − w(⟨(x1, −x0)⟩)
    for p in ProjPoint::all(size) {
        let w = weights.get(&p).copied().unwrap_or(0);
        *distribution.entry(k - w).or_default() += per_point;
    }
    let f = ls.tower().field(ls.level());
    let mut checked = 0;
    let mut pass = true;
    for p in ProjPoint::all(size).take(512) {
        let [y0, y1] = p.vector();
        let (x0, x1) = (f.neg(y1), y0);
        pass &= ls.rank_weight_direct(x0, x1)? == k - weights.get(&p).copied().unwrap_or(0);
        checked += 1;
    }
    let rec = RankRecord { dimension: 2, length: k, distribution, checked_directly: checked, pass };
    let mut out = Output::new("rank-weights");
    let rows: Vec<String> = rec.distribution.iter().map(|(r, c)| format!("  rank {r}: {c}")).collect();
    out.table = format!(
        "code of length {k} and dimension 2\n{}\n{} codewords checked against the direct rank\n{}\n",
        rows.join("\n"),
        checked,
        output::verdict(pass)
    );
    out.pass = pass;
    out.record(&rec);
    Ok(out)
}

fn parse_g(plane: &Plane, text: &str) -> Result<LinPoly, CliError> {
    let (tw, lv) = (plane.tower(), plane.level());
    let bad = || CliError::Usage(format!("unknown map {text:?}"));
    Ok(match text {
        "0" | "zero" => LinPoly::zero(tw, lv, Level::Prime)?,
        "id" => LinPoly::identity(tw, lv, Level::Prime)?,
        _ => {
            if let Some(k) = text.strip_prefix("frob") {
                LinPoly::monomial(tw, lv, Level::Prime, k.parse().map_err(|_| bad())?, 1)?
            } else if let Some(cs) = text.strip_prefix("c:") {
                let coeffs = cs
                    .split('/')
                    .map(|c| c.parse::<u32>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()?;
                LinPoly::new(tw, lv, Level::Prime, &coeffs)?
            } else {
                return Err(bad());
            }
        }
    })
}

fn evenset(cfg: &RunConfig, m: Option<u32>, g: Option<&str>, list: bool) -> Result<Output, CliError> {
    let mut out = Output::new("evenset");
    let (report, extra) = match (m, g) {
        (Some(m), None) => {
            if m == 0 || m > 3 {
                return Err(CliError::Usage(format!("m = {m} is out of range (1..=3)")));
            }
            let q = 1u64 << (1u32 << m);
            if let Some(o) = dry_run(cfg, "evenset", (q * q + q + 1) * q)? {
                return Ok(o);
            }
            check_bound(q * q + q + 1, cfg.max_field)?;
            let c = verify_iterated_even_set(m, cfg.max_field)?;
            let extra = format!(
                "formula size {}, allowed intersections {:?}, square-root build agrees: {}\n",
                c.formula_size,
                c.allowed_spectrum,
                c.square_root_build_agrees.map_or("n/a".to_string(), |b| b.to_string())
            );
            out.pass = c.pass;
            (c.report, extra)
        }
        (None, Some(g)) => {
            let (p, e) = cfg.field.require_prime_power()?;
            if p != 2 {
                return Err(CliError::Usage(format!("plane order {p}^{e} is odd")));
            }
            let q = 1u64 << e;
            if let Some(o) = dry_run(cfg, "evenset", (q * q + q + 1) * q)? {
                return Ok(o);
            }
            check_bound(q * q + q + 1, cfg.max_field)?;
            let plane = Plane::of_order(q as u32)?;
            let rep = translation_even_set(&plane, &parse_g(&plane, g)?, cfg.max_field)?;
            out.pass = rep.pass;
            (rep, String::new())
        }
        _ => return Err(CliError::Usage("give --m, or --q with --g".into())),
    };
    let plane = Plane::of_order(report.q)?;
    let spectrum: Vec<String> = report.spectrum.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    out.table = format!(
        "q {}\nsize {} (expected {})\nL_g {}\nspectrum {}\neven {}\n{extra}",
        report.q,
        report.size,
        report.expected_size,
        report.lg_enumerator,
        spectrum.join(" "),
        report.even
    );
    if list {
        for p in &report.points {
            out.table.push_str(&plane.format_point(p));
            out.table.push('\n');
        }
    }
    out.table.push_str(output::verdict(out.pass));
    out.table.push('\n');
    #[derive(Serialize)]
    struct Rec<'a> {
        q: u32,
        size: usize,
        expected_size: u64,
        spectrum: &'a BTreeMap<usize, u64>,
        even: bool,
        lg_enumerator: &'a WeightEnumerator,
        points: Option<Vec<String>>,
        pass: bool,
    }
    out.record(&Rec {
        q: report.q,
        size: report.size,
        expected_size: report.expected_size,
        spectrum: &report.spectrum,
        even: report.even,
        lg_enumerator: &report.lg_enumerator,
        points: list.then(|| report.points.iter().map(|p| plane.format_point(p)).collect()),
        pass: out.pass,
    });
    Ok(out)
}

fn verify(cfg: &RunConfig, all: bool, only: &[String], m: Option<u32>) -> Result<Output, CliError> {
    let names: Vec<String> = if all || only.is_empty() {
        checks::NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        only.to_vec()
    };
    let params = checks::Params {
        field: cfg.field.prime_power()?,
        t: cfg.field.t,
        m,
        bound: cfg.max_field,
    };
    if let Some(o) = dry_run(cfg, "verify", names.len() as u64 * cfg.max_field.min(1 << 16))? {
        return Ok(o);
    }
    let mut out = Output::new("verify");
    out.pass = true;
    for name in &names {
        for l in checks::run(name, &params)? {
            out.table.push_str(&format!("{} {:<18} {:<28} {}\n", output::verdict(l.pass), l.check, l.params, l.detail));
            out.pass &= l.pass;
            out.record(&l);
        }
    }
    Ok(out)
}

impl Output {
    fn emit(&self, cfg: &RunConfig) -> Result<(), CliError> {
        let text = match cfg.format {
            config::Format::Table => self.table.clone(),
            config::Format::Json => self.json_lines(),
        };
        match &cfg.output {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}
