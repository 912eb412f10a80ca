use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use linsets::evensets::EvenSetError;
use linsets::families::FamilyError;
use linsets::gf::{FieldError, FieldTower, DEFAULT_ENUMERATION_BOUND};
use linsets::linpoly::PolyError;
use linsets::linset::LinSetError;
use linsets::subspace::SubspaceError;

#[derive(Debug, Clone, Parser, PartialEq, Eq)]
#[command(name = "linsets", version, about = "Weights of linear sets on PG(1, q^n) and sets of even type in PG(2, q)")]
pub struct RunConfig {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Largest enumeration allowed, in field elements or points.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUMERATION_BOUND)]
    pub max_field: u64,
    /// Worker threads for point scans (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Print the cost estimate and stop.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, PartialEq, Eq, Default)]
pub struct FieldArgs {
    #[arg(long, global = true)]
    pub p: Option<u32>,
    #[arg(long, global = true)]
    pub e: Option<u32>,
    #[arg(long, global = true)]
    pub t: Option<u32>,
    /// Base field order as `p^e` or a plain prime power.
    #[arg(long, global = true)]
    pub q: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Args, PartialEq, Eq, Default)]
pub struct SetArgs {
    /// Named family, e.g. `trace-trace`, `monomial:s=2`, `psi:m=3,base=subline`.
    #[arg(long)]
    pub family: Option<String>,
    /// First factor as packed top-level values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub s_basis: Vec<u32>,
    /// Second factor as packed top-level values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub t_basis: Vec<u32>,
}

#[derive(Debug, Clone, Subcommand, PartialEq, Eq)]
pub enum Command {
    /// Describe the field tower.
    FieldInfo,
    /// Weight enumerator, with predictions checked when the family has them.
    Weights(SetArgs),
    /// Points of weight at least (or exactly) i.
    Points {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, conflicts_with = "exactly")]
        at_least: Option<usize>,
        #[arg(long)]
        exactly: Option<usize>,
    },
    /// Rank-weight distribution of the associated code.
    RankWeights(SetArgs),
    /// Set of even type in PG(2, q).
    Evenset {
        /// Use the iterated product of the subline in PG(2, 2^(2^m)).
        #[arg(long, conflicts_with_all = ["g", "q"])]
        m: Option<u32>,
        /// F_2-linear map: `zero`, `id`, `frobK` or `c:v0/v1/...`.
        #[arg(long)]
        g: Option<String>,
        /// Include the full point list.
        #[arg(long)]
        list: bool,
    },
    /// Run the built-in checks.
    Verify {
        #[arg(long, conflicts_with = "only")]
        all: bool,
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        #[arg(long)]
        m: Option<u32>,
    },
}

/// Failures mapped onto exit codes: 1 check failed, 2 usage, 3 resource.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    /// Bound overruns are resource errors, anything else is bad input.
    pub fn from_lib(e: impl std::fmt::Display, resource: bool) -> Self {
        if resource {
            CliError::Resource(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        let resource = matches!(e, FieldError::BoundExceeded { .. } | FieldError::TooLarge(_));
        CliError::from_lib(e, resource)
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        let resource = e.is_resource();
        CliError::from_lib(e, resource)
    }
}

impl From<EvenSetError> for CliError {
    fn from(e: EvenSetError) -> Self {
        let resource = e.is_resource();
        CliError::from_lib(e, resource)
    }
}

impl From<LinSetError> for CliError {
    fn from(e: LinSetError) -> Self {
        FamilyError::from(e).into()
    }
}

impl From<SubspaceError> for CliError {
    fn from(e: SubspaceError) -> Self {
        FamilyError::from(e).into()
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        FamilyError::from(e).into()
    }
}

/// `"3^2"` or `"9"` to `(3, 2)`.
pub fn parse_q(text: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Usage(format!("bad field order {text:?}"));
    if let Some((p, e)) = text.split_once('^') {
        let p = p.trim().parse().map_err(|_| bad())?;
        let e = e.trim().parse().map_err(|_| bad())?;
        return Ok((p, e));
    }
    let q: u32 = text.trim().parse().map_err(|_| bad())?;
    if q < 2 {
        return Err(bad());
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d)).unwrap();
    let mut e = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        e += 1;
    }
    if r != 1 {
        return Err(bad());
    }
    Ok((p, e))
}

impl FieldArgs {
    /// `(p, e)` from `--q` or `--p/--e`; `e` defaults to 1.
    pub fn prime_power(&self) -> Result<Option<(u32, u32)>, CliError> {
        if let Some(q) = &self.q {
            if self.p.is_some() || self.e.is_some() {
                return Err(CliError::Usage("give either --q or --p/--e".into()));
            }
            return parse_q(q).map(Some);
        }
        match (self.p, self.e) {
            (Some(p), e) => Ok(Some((p, e.unwrap_or(1)))),
            (None, Some(_)) => Err(CliError::Usage("--e needs --p".into())),
            (None, None) => Ok(None),
        }
    }

    pub fn require_prime_power(&self) -> Result<(u32, u32), CliError> {
        self.prime_power()?
            .ok_or_else(|| CliError::Usage("field not given: use --q or --p".into()))
    }

    pub fn tower(&self) -> Result<FieldTower, CliError> {
        let (p, e) = self.require_prime_power()?;
        let t = self.t.ok_or_else(|| CliError::Usage("--t is required".into()))?;
        Ok(FieldTower::new(p, e, t)?)
    }
}

impl RunConfig {
    /// Argument string that parses back to this configuration.
    pub fn canonical(&self) -> String {
        let mut out: Vec<String> = Vec::new();
        match &self.command {
            Command::FieldInfo => out.push("field-info".into()),
            Command::Weights(s) => {
                out.push("weights".into());
                set_args(&mut out, s);
            }
            Command::Points { set, at_least, exactly } => {
                out.push("points".into());
                set_args(&mut out, set);
                if let Some(i) = at_least {
                    out.extend(["--at-least".into(), i.to_string()]);
                }
                if let Some(i) = exactly {
                    out.extend(["--exactly".into(), i.to_string()]);
                }
            }
            Command::RankWeights(s) => {
                out.push("rank-weights".into());
                set_args(&mut out, s);
            }
            Command::Evenset { m, g, list } => {
                out.push("evenset".into());
                if let Some(m) = m {
                    out.extend(["--m".into(), m.to_string()]);
                }
                if let Some(g) = g {
                    out.extend(["--g".into(), g.clone()]);
                }
                if *list {
                    out.push("--list".into());
                }
            }
            Command::Verify { all, only, m } => {
                out.push("verify".into());
                if *all {
                    out.push("--all".into());
                }
                if !only.is_empty() {
                    out.extend(["--only".into(), only.join(",")]);
                }
                if let Some(m) = m {
                    out.extend(["--m".into(), m.to_string()]);
                }
            }
        }
        let mut push = |k: &str, v: String| {
            out.push(format!("--{k}"));
            out.push(v);
        };
        if let Some(q) = &self.field.q {
            push("q", q.clone());
        }
        if let Some(p) = self.field.p {
            push("p", p.to_string());
        }
        if let Some(e) = self.field.e {
            push("e", e.to_string());
        }
        if let Some(t) = self.field.t {
            push("t", t.to_string());
        }
        push("max-field", self.max_field.to_string());
        if let Some(j) = self.jobs {
            push("jobs", j.to_string());
        }
        push(
            "format",
            match self.format {
                Format::Table => "table".into(),
                Format::Json => "json".into(),
            },
        );
        if let Some(o) = &self.output {
            push("output", o.display().to_string());
        }
        if self.dry_run {
            out.push("--dry-run".into());
        }
        out.join(" ")
    }
}

fn set_args(out: &mut Vec<String>, s: &SetArgs) {
    let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    if let Some(f) = &s.family {
        out.extend(["--family".into(), f.clone()]);
    }
    if !s.s_basis.is_empty() {
        out.extend(["--s-basis".into(), join(&s.s_basis)]);
    }
    if !s.t_basis.is_empty() {
        out.extend(["--t-basis".into(), join(&s.t_basis)]);
    }
}
