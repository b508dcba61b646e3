//! Command-line parsing into a validated [`RunConfig`].

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use bieberbach_core::chart::ChartMap;
use bieberbach_core::{registry, SurfacePatch};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

/// A configuration problem; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "bieberbach-lab", version, about = "Numerical checks of a Bieberbach-type estimate on conformal discs")]
pub struct Cli {
    /// Report file; standard output when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Tolerance override `name=value`; also accepted as `--tol.name=value`.
    #[arg(long = "tol", value_name = "NAME=VALUE", global = true)]
    pub tol: Vec<String>,
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Evaluate the estimate on one surface or on a seeded battery.
    VerifyTheorem(TheoremArgs),
    /// Check one of the supporting lemmas.
    VerifyLemma(LemmaArgs),
    /// Helicoid rescaling table.
    HelicoidScan(ScanArgs),
}

#[derive(Args, Debug)]
pub struct SurfaceArgs {
    /// Registry key: plane, koebe_plane, helicoid, graph, catenoid_patch.
    #[arg(long)]
    pub surface: Option<String>,
    /// Surface parameter `name=value`, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Möbius recentring `a=re` or `a=re,im`, repeatable; the first acts last.
    #[arg(long = "mobius", value_name = "a=RE[,IM]")]
    pub mobius: Vec<String>,
}

#[derive(Args, Debug)]
pub struct TheoremArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Battery size when no surface is given.
    #[arg(long, default_value_t = 120)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct LemmaArgs {
    /// 2.1, 2.2, 2.3 or 2.4.
    #[arg(long)]
    pub which: String,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Field for 2.1.
    #[arg(long, value_enum, default_value_t = FieldChoice::Helicoid)]
    pub field: FieldChoice,
    /// Composition map for 2.2.
    #[arg(long, value_enum, default_value_t = PhiChoice::Half)]
    pub phi: PhiChoice,
    #[arg(long, value_enum, default_value_t = AttractorChoice::Auto)]
    pub attractor: AttractorChoice,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random `(v, w)` pairs for 2.4.
    #[arg(long, default_value_t = 10)]
    pub pairs: usize,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    /// Comma-separated scale factors.
    #[arg(long = "R", value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
    /// Chart basepoint `x` or `x,y` of the unscaled helicoid.
    #[arg(long, default_value = "0")]
    pub basepoint: String,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldChoice {
    Linear,
    Bernoulli,
    Helicoid,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiChoice {
    Identity,
    Half,
    Mobius,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttractorChoice {
    Auto,
    Pushforward,
    Tangential,
}

/// Named tolerances, each overridable on the command line.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Smallest admissible slack is `−slack`.
    pub slack: f64,
    /// `sup_t ‖(dη_t)ₚ − e^{−t} I‖`.
    pub lemma21: f64,
    /// Relative residual of `e^t V(t) = W (1 − e^{−t})`.
    pub din8: f64,
    /// Relative ambient/intrinsic Hessian residual.
    pub lemma24: f64,
    /// Smallest admissible composition margin is `−lemma22`.
    pub lemma22: f64,
    /// Distance between the analytic and searched `ζ`.
    pub zeta: f64,
    /// Integrator relative tolerance.
    pub integrator: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            slack: 1e-9,
            lemma21: 1e-6,
            din8: 1e-7,
            lemma24: 1e-5,
            lemma22: 1e-12,
            zeta: 1e-6,
            integrator: 1e-10,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 7] =
        ["slack", "lemma21", "din8", "lemma24", "lemma22", "zeta", "integrator"];

    fn set(&mut self, name: &str, value: f64) -> Result<(), ConfigError> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(bad(format!("tolerance {name} must be a finite non-negative number")));
        }
        let slot = match name {
            "slack" => &mut self.slack,
            "lemma21" => &mut self.lemma21,
            "din8" => &mut self.din8,
            "lemma24" => &mut self.lemma24,
            "lemma22" => &mut self.lemma22,
            "zeta" => &mut self.zeta,
            "integrator" => &mut self.integrator,
            _ => {
                return Err(bad(format!(
                    "unknown tolerance {name}; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }
}

/// A registry surface with its textual description.
#[derive(Clone, Debug)]
pub struct SurfaceSpec {
    pub key: String,
    pub params: Vec<(String, f64)>,
    pub mobius: Vec<Complex64>,
}

impl SurfaceSpec {
    pub fn new(key: &str) -> Self {
        SurfaceSpec { key: key.into(), params: Vec::new(), mobius: Vec::new() }
    }

    pub fn build(&self) -> Result<SurfacePatch, ConfigError> {
        let params: Vec<(&str, f64)> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let mut s = registry(&self.key, &params).map_err(|e| bad(format!("surface {}: {e}", self.key)))?;
        for a in &self.mobius {
            s = s.precompose(ChartMap::Mobius(*a));
        }
        Ok(s)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().rev().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// `key(p=v,…)+mobius(re,im)…` with shortest round-trip floats.
    pub fn label(&self) -> String {
        let mut out = self.key.clone();
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.push_str(&format!("({})", ps.join(",")));
        }
        for a in &self.mobius {
            out.push_str(&format!("+mobius({},{})", a.re, a.im));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub enum Command {
    /// A single surface, or a seeded battery of `cases` surfaces.
    Theorem { surface: Option<SurfaceSpec>, cases: usize, seed: u64 },
    Lemma21 { field: FieldChoice, surface: SurfaceSpec },
    Lemma22 { surface: SurfaceSpec, phi: PhiChoice },
    Lemma23 { surface: SurfaceSpec, attractor: AttractorChoice },
    Lemma24 { surface: SurfaceSpec, attractor: AttractorChoice, seed: u64, pairs: usize },
    HelicoidScan { r_values: Vec<f64>, basepoint: Complex64 },
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Worker threads for batteries; `None` lets the pool decide.
    pub threads: Option<usize>,
}

/// Rewrites `--tol.name=value` into `--tol name=value`.
pub fn normalize_args<I, T>(args: I) -> Vec<OsString>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut out = Vec::new();
    for a in args {
        let a: OsString = a.into();
        match a.to_str().and_then(|s| s.strip_prefix("--tol.")) {
            Some(rest) => {
                out.push("--tol".into());
                out.push(rest.into());
            }
            None => out.push(a),
        }
    }
    out
}

fn parse_assignment(s: &str) -> Result<(String, &str), ConfigError> {
    let (k, v) = s.split_once('=').ok_or_else(|| bad(format!("expected NAME=VALUE, got {s:?}")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(bad(format!("empty name in {s:?}")));
    }
    Ok((k.to_string(), v.trim()))
}

fn parse_real(s: &str, what: &str) -> Result<f64, ConfigError> {
    let v: f64 = s.parse().map_err(|_| bad(format!("{what}: {s:?} is not a number")))?;
    if !v.is_finite() {
        return Err(bad(format!("{what}: {s:?} is not finite")));
    }
    Ok(v)
}

fn parse_complex(s: &str, what: &str) -> Result<Complex64, ConfigError> {
    let mut parts = s.split(',');
    let re = parse_real(parts.next().unwrap_or(""), what)?;
    let im = match parts.next() {
        Some(p) => parse_real(p, what)?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad(format!("{what}: expected RE or RE,IM, got {s:?}")));
    }
    Ok(Complex64::new(re, im))
}

fn parse_spec(args: &SurfaceArgs, key: &str) -> Result<SurfaceSpec, ConfigError> {
    let mut spec = SurfaceSpec::new(key);
    for p in &args.params {
        let (k, v) = parse_assignment(p)?;
        let v = parse_real(v, &format!("--param {k}"))?;
        spec.params.push((k, v));
    }
    for m in &args.mobius {
        let (k, v) = parse_assignment(m)?;
        if k != "a" {
            return Err(bad(format!("--mobius expects a=RE[,IM], got {m:?}")));
        }
        let a = parse_complex(v, "--mobius")?;
        if a.norm() >= 1.0 {
            return Err(bad("--mobius needs |a| < 1"));
        }
        spec.mobius.push(a);
    }
    Ok(spec)
}

fn surface_spec(args: &SurfaceArgs, default_key: Option<&str>) -> Result<Option<SurfaceSpec>, ConfigError> {
    let key = match (&args.surface, default_key) {
        (Some(k), _) => k.as_str(),
        (None, Some(k)) => k,
        (None, None) => {
            if !args.params.is_empty() || !args.mobius.is_empty() {
                return Err(bad("--param and --mobius need --surface"));
            }
            return Ok(None);
        }
    };
    let spec = parse_spec(args, key)?;
    // Reject unknown keys and malformed parameters before any computation.
    spec.build()?;
    Ok(Some(spec))
}

/// Parameters of the closed-form flow fields: `a` for the Bernoulli field,
/// `n` for the linear one.
fn field_spec(field: FieldChoice, args: &SurfaceArgs) -> Result<SurfaceSpec, ConfigError> {
    let (key, allowed) = match field {
        FieldChoice::Helicoid => return Ok(surface_spec(args, Some("helicoid"))?.expect("default key")),
        FieldChoice::Bernoulli => ("bernoulli", "a"),
        FieldChoice::Linear => ("linear", "n"),
    };
    if args.surface.is_some() || !args.mobius.is_empty() {
        return Err(bad("--surface and --mobius apply only to the helicoid field"));
    }
    let spec = parse_spec(args, key)?;
    for (k, _) in &spec.params {
        if k != allowed {
            return Err(bad(format!("unknown parameter {k} for the {key} field")));
        }
    }
    if let Some(n) = spec.param("n") {
        if n.trunc() != n || !(1.0..=8.0).contains(&n) {
            return Err(bad("linear field dimension n must be an integer in 1..=8"));
        }
    }
    Ok(spec)
}

fn threads_from_env(value: Option<String>) -> Result<Option<usize>, ConfigError> {
    match value {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(bad(format!("BIEBERBACH_LAB_THREADS must be a positive integer, got {v:?}"))),
        },
    }
}

impl RunConfig {
    /// Validates parsed arguments; `threads_env` is the raw value of
    /// `BIEBERBACH_LAB_THREADS`.
    pub fn from_cli(cli: Cli, threads_env: Option<String>) -> Result<Self, ConfigError> {
        let mut tolerances = Tolerances::default();
        for t in &cli.tol {
            let (k, v) = parse_assignment(t)?;
            tolerances.set(&k, parse_real(v, &format!("--tol {k}"))?)?;
        }
        let command = match cli.command {
            CliCommand::VerifyTheorem(a) => {
                if a.cases == 0 {
                    return Err(bad("--cases must be positive"));
                }
                Command::Theorem { surface: surface_spec(&a.surface, None)?, cases: a.cases, seed: a.seed }
            }
            CliCommand::VerifyLemma(a) => match a.which.as_str() {
                "2.1" => Command::Lemma21 { field: a.field, surface: field_spec(a.field, &a.surface)? },
                "2.2" => Command::Lemma22 {
                    surface: surface_spec(&a.surface, Some("plane"))?.expect("default key"),
                    phi: a.phi,
                },
                "2.3" => Command::Lemma23 {
                    surface: surface_spec(&a.surface, Some("helicoid"))?.expect("default key"),
                    attractor: a.attractor,
                },
                "2.4" => {
                    if a.pairs == 0 {
                        return Err(bad("--pairs must be positive"));
                    }
                    Command::Lemma24 {
                        surface: surface_spec(&a.surface, Some("helicoid"))?.expect("default key"),
                        attractor: a.attractor,
                        seed: a.seed,
                        pairs: a.pairs,
                    }
                }
                other => return Err(bad(format!("--which must be 2.1, 2.2, 2.3 or 2.4, got {other:?}"))),
            },
            CliCommand::HelicoidScan(a) => {
                if a.r.is_empty() || a.r.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
                    return Err(bad("--R needs a non-empty list of positive finite numbers"));
                }
                Command::HelicoidScan { r_values: a.r, basepoint: parse_complex(&a.basepoint, "--basepoint")? }
            }
        };
        Ok(RunConfig {
            command,
            tolerances,
            output: cli.output,
            format: cli.format,
            threads: threads_from_env(threads_env)?,
        })
    }
}
