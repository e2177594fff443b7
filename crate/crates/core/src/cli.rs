//! The `umbilic` command line.
//!
//! Exit codes: 0 success, 2 input error, 3 domain error, 4 numerical breach, 5 check
//! failure. Every command writes its artifacts under `--out` (default `out`) and
//! prints a short summary on stdout. Numbers in artifacts carry 12 significant digits.
//!
//! A job can also be given as JSON (`umbilic run --config job.json`), with keys
//! spelled like the flags:
//!
//! ```json
//! {"command": "check", "check": "killing", "chart": "wobble", "field": "dy"}
//! ```

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::chart::{ChartKind, ChristoffelMethod, Fiber, MetricChart};
use crate::constructor::{build_level_surface, build_umbilical_immersion, conformal_to_product, integrate_profile};
use crate::curvature::{scalar_curvature_at, scalar_curvature_report, sectional_curvature_at, theta3_sectional_oracle};
use crate::error::Error;
use crate::field::{killing_defect, VectorFieldSpec};
use crate::format::{num, round_json};
use crate::function::FunctionSpec1D;
use crate::geodesic::geodesic_integrate;
use crate::hypersurface::{lemma1_residual, mesh_ascii, report_csv, umbilicity_report, Expectation, ImmersionSpec};
use crate::presets;
use crate::structure::{
    base_gauss_curvature_pair, closure_smoothness_check, r3_admissibility, submersion_differential, submersion_isometry_defect,
    ClosureTarget, SmoothnessReport, BASE_CURVATURE_AGREEMENT,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_CHECK: i32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::OutOfDomain { .. } | Error::NonPositiveWarping(_) => EXIT_DOMAIN,
        Error::ConservationBreach { .. } | Error::NoConvergence(_) | Error::CrossCheck { .. } | Error::DegenerateFrame => EXIT_NUMERICAL,
        Error::NotUnitKilling { .. } | Error::NotTotallyGeodesic(_) | Error::TangentToXi(_) | Error::TauNonzeroOnGeodesic { .. } => EXIT_CHECK,
        _ => EXIT_INPUT,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Numbers accept `pi` forms such as `pi/6`, `-pi/4` or `2*pi/3`.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, t),
    };
    let (num_part, den) = match rest.split_once('/') {
        Some((a, b)) => (a, b.trim().parse::<f64>().map_err(|_| format!("cannot read `{s}` as a number"))?),
        None => (rest, 1.0),
    };
    let coef = match num_part.trim().strip_suffix("pi") {
        Some("") => 1.0,
        Some(c) => c
            .trim()
            .trim_end_matches('*')
            .parse::<f64>()
            .map_err(|_| format!("cannot read `{s}` as a number"))?,
        None => return Err(format!("cannot read `{s}` as a number")),
    };
    Ok(sign * coef * std::f64::consts::PI / den)
}

#[derive(Debug, Parser)]
#[command(name = "umbilic", version, about = "Umbilical hypersurfaces, unit Killing fields and their normal-form metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// A parsed job. Serializes with the same keys the JSON job format accepts.
#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Metric, Christoffel and curvature samples of a chart.
    Inspect(InspectArgs),
    /// Integrate a profile curve and check the swept hypersurface for umbilicity.
    BuildUmbilical(BuildArgs),
    /// Reparametrize a warping function as a conformal factor.
    Conformal(ConformalArgs),
    /// Structural checks.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Integrate a geodesic.
    Geodesic(GeodesicArgs),
    /// Run a job described in a JSON file.
    #[serde(skip)]
    Run(RunArgs),
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum CheckCommand {
    /// Endpoint conditions for smooth closure on S^3 or S^2 x R.
    Smoothness(SmoothnessArgs),
    /// Admissibility of theta for a metric on R^3.
    R3(R3Args),
    /// The Riemannian submersion onto the base surface.
    Submersion(SubmersionArgs),
    /// Level surfaces {x = x0}: totally geodesic iff theta'(x0) = 0.
    TgSurfaces(TgArgs),
    /// Killing defect of a vector field.
    Killing(KillingArgs),
    /// Tangential and normal residuals of the xi-decomposition identities.
    Lemma1(Lemma1Args),
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct InspectArgs {
    /// Chart JSON file, inline JSON, or preset (hopf, const, wobble, bump).
    #[arg(long)]
    pub chart: String,
    /// Samples per coordinate axis.
    #[arg(long, default_value_t = 5)]
    pub grid: usize,
    /// Tolerance for flagging the unit-coefficient scalar formula.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Seed of the random plane sampled at each point.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiberArg {
    Flat,
    Round,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct BuildArgs {
    /// Warping function: JSON file, inline JSON, or preset (one, cos, exp).
    #[arg(long, default_value = "cos")]
    pub f: String,
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    pub theta0: f64,
    #[arg(long, default_value = "0", value_parser = parse_number, allow_hyphen_values = true)]
    pub x10: f64,
    #[arg(long, default_value = "0", value_parser = parse_number, allow_hyphen_values = true)]
    pub x00: f64,
    #[arg(long, default_value = "2", value_parser = parse_number)]
    pub arclen: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = 1)]
    pub fiber_dim: usize,
    #[arg(long, value_enum, default_value_t = FiberArg::Flat)]
    pub fiber: FiberArg,
    /// Samples per parameter axis for the umbilicity report and the mesh.
    #[arg(long, default_value_t = 6)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Profile CSV (default `<out>/profile.csv`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_out: Option<PathBuf>,
    /// Surface mesh (default `<out>/surface.mesh`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh_out: Option<PathBuf>,
    /// Umbilicity report (default `<out>/umbilicity.json`).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ConformalArgs {
    #[arg(long, default_value = "exp")]
    pub f: String,
    #[arg(long, value_delimiter = ',', value_parser = parse_number, allow_hyphen_values = true, default_value = "-1,1")]
    pub interval: Vec<f64>,
    #[arg(long, default_value = "0", value_parser = parse_number, allow_hyphen_values = true)]
    pub t0: f64,
    /// Rows of the output table.
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    /// Required consistency `|h(s(t)) - f(t)|`.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetArg {
    S3,
    S2xr,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SmoothnessArgs {
    /// Profile: JSON file, inline JSON, or preset (hopf, const, wobble, bump).
    #[arg(long)]
    pub theta: String,
    #[arg(long, value_parser = parse_number)]
    pub b: f64,
    #[arg(long, value_enum)]
    pub target: TargetArg,
    #[arg(long, default_value_t = 2)]
    pub kmax: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct R3Args {
    #[arg(long)]
    pub theta: String,
    /// Number of samples on `[-span, span]`.
    #[arg(long, default_value_t = 2001)]
    pub grid: usize,
    #[arg(long, default_value_t = 50.0)]
    pub span: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SubmersionArgs {
    #[arg(long)]
    pub theta: String,
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    /// Allowed isometry defect on horizontal vectors.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TgArgs {
    #[arg(long)]
    pub chart: String,
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 5)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct KillingArgs {
    #[arg(long)]
    pub chart: String,
    /// `xi`, `d<coordinate>` (for example `dy`), or a coordinate index.
    #[arg(long)]
    pub field: String,
    #[arg(long, default_value_t = 5)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Lemma1Args {
    #[arg(long, default_value = "cos")]
    pub f: String,
    #[arg(long, default_value = "0.5", value_parser = parse_number, allow_hyphen_values = true)]
    pub theta0: f64,
    #[arg(long, default_value = "0.2", value_parser = parse_number, allow_hyphen_values = true)]
    pub x10: f64,
    #[arg(long, default_value = "1", value_parser = parse_number)]
    pub arclen: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value_t = 4)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    /// Seed of the random graph surface.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GeodesicArgs {
    #[arg(long)]
    pub chart: String,
    #[arg(long, value_delimiter = ',', value_parser = parse_number, allow_hyphen_values = true)]
    pub point: Vec<f64>,
    /// Initial direction; normalized to unit length.
    #[arg(long, value_delimiter = ',', value_parser = parse_number, allow_hyphen_values = true)]
    pub dir: Vec<f64>,
    #[arg(long, default_value = "1", value_parser = parse_number)]
    pub length: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl Command {
    /// Parses a JSON job into the same structure the flags produce. Unknown keys are
    /// rejected.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| CliError::input(format!("job config: {e}")))?;
        let obj = v.as_object().ok_or_else(|| CliError::input("job config must be a JSON object"))?;
        let mut argv = vec!["umbilic".to_string()];
        let command = obj
            .get("command")
            .and_then(Value::as_str)
            .ok_or_else(|| CliError::input("job config: missing string field `command`"))?;
        if command == "run" {
            return Err(CliError::input("job config: `run` cannot be nested"));
        }
        argv.push(command.to_string());
        if let Some(check) = obj.get("check") {
            argv.push(check.as_str().ok_or_else(|| CliError::input("job config: `check` must be a string"))?.to_string());
        }
        for (key, value) in obj {
            if key == "command" || key == "check" {
                continue;
            }
            let text = match value {
                Value::Null => continue,
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                Value::Bool(_) => return Err(CliError::input(format!("job config: field `{key}` cannot be a boolean"))),
                Value::Array(a) => a
                    .iter()
                    .map(|x| match x {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
                Value::Object(_) => value.to_string(),
            };
            argv.push(format!("--{key}={text}"));
        }
        let cli = Cli::try_parse_from(argv).map_err(|e| CliError::input(format!("job config: {}", e.to_string().trim())))?;
        Ok(cli.command)
    }

    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        match self {
            Command::Inspect(a) => vec![("tol", a.tol)],
            Command::BuildUmbilical(a) => vec![("tol", a.tol), ("step", a.step)],
            Command::Conformal(a) => vec![("tol", a.tol)],
            Command::Check(c) => match c {
                CheckCommand::Smoothness(a) => vec![("tol", a.tol)],
                CheckCommand::R3(a) => vec![("tol", a.tol)],
                CheckCommand::Submersion(a) => vec![("tol", a.tol)],
                CheckCommand::TgSurfaces(a) => vec![("tol", a.tol)],
                CheckCommand::Killing(a) => vec![("tol", a.tol)],
                CheckCommand::Lemma1(a) => vec![("tol", a.tol), ("step", a.step)],
            },
            Command::Geodesic(a) => vec![("step", a.step)],
            Command::Run(_) => Vec::new(),
        }
    }

    /// Artifact paths the job writes.
    pub fn outputs(&self) -> Vec<PathBuf> {
        let o = |dir: &Path, name: &str| dir.join(name);
        match self {
            Command::Inspect(a) => vec![o(&a.out, "inspect.csv"), o(&a.out, "inspect.json")],
            Command::BuildUmbilical(a) => {
                let mut v = vec![
                    a.profile_out.clone().unwrap_or_else(|| o(&a.out, "profile.csv")),
                    a.report_out.clone().unwrap_or_else(|| o(&a.out, "umbilicity.json")),
                    o(&a.out, "umbilicity.csv"),
                ];
                if a.fiber_dim == 1 {
                    v.push(a.mesh_out.clone().unwrap_or_else(|| o(&a.out, "surface.mesh")));
                }
                v
            }
            Command::Conformal(a) => vec![o(&a.out, "conformal.csv"), o(&a.out, "conformal.json")],
            Command::Check(c) => {
                let (dir, name) = match c {
                    CheckCommand::Smoothness(a) => (&a.out, "smoothness"),
                    CheckCommand::R3(a) => (&a.out, "r3"),
                    CheckCommand::Submersion(a) => (&a.out, "submersion"),
                    CheckCommand::TgSurfaces(a) => (&a.out, "tg-surfaces"),
                    CheckCommand::Killing(a) => (&a.out, "killing"),
                    CheckCommand::Lemma1(a) => (&a.out, "lemma1"),
                };
                vec![o(dir, &format!("check-{name}.json"))]
            }
            Command::Geodesic(a) => vec![o(&a.out, "geodesic.csv"), o(&a.out, "geodesic.json")],
            Command::Run(_) => Vec::new(),
        }
    }

    /// Tolerances and steps must be positive; output paths must be distinct.
    pub fn validate(&self) -> CliResult<()> {
        for (name, v) in self.tolerances() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::input(format!("--{name} must be a positive number, got {v}")));
            }
        }
        let outs = self.outputs();
        let distinct: BTreeSet<&PathBuf> = outs.iter().collect();
        if distinct.len() != outs.len() {
            return Err(CliError::input("output paths must be distinct"));
        }
        Ok(())
    }
}

/// What a command reports back.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub summary: Vec<String>,
}

impl Outcome {
    fn verdict(passed: bool, summary: Vec<String>) -> Self {
        Self {
            code: if passed { EXIT_OK } else { EXIT_CHECK },
            summary,
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    if let Err(e) = init_logging() {
        eprintln!("error: {}", e.message);
        return e.code;
    }
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn init_logging() -> CliResult<()> {
    let level = match std::env::var("UMBILIC_LOG").as_deref() {
        Err(_) | Ok("info") => log::LevelFilter::Info,
        Ok("quiet") => log::LevelFilter::Off,
        Ok("debug") => log::LevelFilter::Debug,
        Ok(other) => return Err(CliError::input(format!("UMBILIC_LOG must be quiet, info or debug, got `{other}`"))),
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
    Ok(())
}

/// Validates and runs one job.
pub fn execute(command: &Command) -> CliResult<Outcome> {
    if let Command::Run(a) = command {
        let text = fs::read_to_string(&a.config).map_err(|e| CliError::input(format!("--config {}: {e}", a.config.display())))?;
        let job = Command::from_json(&text)?;
        return execute(&job);
    }
    command.validate()?;
    log::debug!("job: {}", serde_json::to_string(command).unwrap_or_default());
    match command {
        Command::Inspect(a) => cmd_inspect(a),
        Command::BuildUmbilical(a) => cmd_build_umbilical(a),
        Command::Conformal(a) => cmd_conformal(a),
        Command::Check(c) => match c {
            CheckCommand::Smoothness(a) => check_smoothness(a),
            CheckCommand::R3(a) => check_r3(a),
            CheckCommand::Submersion(a) => check_submersion(a),
            CheckCommand::TgSurfaces(a) => check_tg(a),
            CheckCommand::Killing(a) => check_killing(a),
            CheckCommand::Lemma1(a) => check_lemma1(a),
        },
        Command::Geodesic(a) => cmd_geodesic(a),
        Command::Run(_) => unreachable!("handled above"),
    }
}

// ---- inputs ------------------------------------------------------------------

fn read_source(src: &str, flag: &str) -> CliResult<Option<String>> {
    let t = src.trim();
    if t.starts_with('{') {
        return Ok(Some(t.to_string()));
    }
    let path = Path::new(t);
    if path.is_file() {
        return fs::read_to_string(path)
            .map(Some)
            .map_err(|e| CliError::input(format!("{flag} {t}: {e}")));
    }
    Ok(None)
}

fn with_flag(flag: &str, e: Error) -> CliError {
    let mut c = CliError::from(e);
    c.message = format!("{flag}: {}", c.message);
    c
}

/// Chart from a JSON file, inline JSON, preset name, or the file name of a bundled
/// preset (`theta3_hopf.json`).
pub fn load_chart(src: &str) -> CliResult<MetricChart> {
    if let Some(text) = read_source(src, "--chart")? {
        return MetricChart::from_json(&text).map_err(|e| with_flag("--chart", e));
    }
    let name = src.trim();
    let preset = presets::THETA_PRESETS
        .iter()
        .find(|p| *p == &name || presets::chart_file(p) == Some(name))
        .copied()
        .unwrap_or(name);
    presets::chart(preset).ok_or_else(|| {
        CliError::input(format!(
            "--chart: `{src}` is neither a JSON file nor a preset ({})",
            presets::THETA_PRESETS.join(", ")
        ))
    })
}

fn load_function(src: &str, flag: &str, preset: fn(&str) -> Option<FunctionSpec1D>, names: &[&str]) -> CliResult<FunctionSpec1D> {
    if let Some(text) = read_source(src, flag)? {
        return FunctionSpec1D::from_json(&text).map_err(|e| with_flag(flag, e));
    }
    preset(src.trim())
        .ok_or_else(|| CliError::input(format!("{flag}: `{src}` is neither a JSON file nor a preset ({})", names.join(", "))))
}

fn load_theta(src: &str) -> CliResult<FunctionSpec1D> {
    load_function(src, "--theta", presets::theta, &presets::THETA_PRESETS)
}

fn load_warp(src: &str) -> CliResult<FunctionSpec1D> {
    load_function(src, "--f", presets::warp, &presets::WARP_PRESETS)
}

// ---- outputs -----------------------------------------------------------------

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn json_text<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("reports serialize");
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_text(path, &json_text(value))
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn kind_name(kind: &ChartKind) -> &'static str {
    match kind {
        ChartKind::WarpedProduct { .. } => "warped-product",
        ChartKind::Theta3 { .. } => "theta3",
        ChartKind::Base2 { .. } => "base2",
        ChartKind::DiagonalAxis { .. } => "diagonal-axis",
        ChartKind::ConformalProduct { .. } => "conformal-product",
        ChartKind::WarpedOverWarped { .. } => "warped-over-warped",
    }
}

fn theta_of(chart: &MetricChart) -> Option<&FunctionSpec1D> {
    match chart.kind() {
        ChartKind::Theta3 { theta } => Some(theta),
        _ => None,
    }
}

/// Cell midpoints, `n` per axis.
fn midpoint_grid(bounds: &[[f64; 2]], n: usize) -> Vec<Vec<f64>> {
    let n = n.max(1);
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .map(|b| (0..n).map(|i| b[0] + (b[1] - b[0]) * (i as f64 + 0.5) / n as f64).collect())
        .collect();
    crate::chart::cartesian(&axes)
}

fn pass_fail(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

// ---- commands ----------------------------------------------------------------

fn cmd_inspect(a: &InspectArgs) -> CliResult<Outcome> {
    let chart = load_chart(&a.chart)?;
    let names = chart.coordinate_names();
    let d = chart.dim();
    let theta = theta_of(&chart).cloned();
    let mut header: Vec<String> = names.clone();
    for i in 0..d {
        for j in i..d {
            header.push(format!("g_{}_{}", names[i], names[j]));
        }
    }
    for k in 0..d {
        for i in 0..d {
            for j in i..d {
                header.push(format!("Gamma^{}_{}_{}", names[k], names[i], names[j]));
            }
        }
    }
    let mut planes = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            planes.push((i, j));
            header.push(format!("K_{}_{}", names[i], names[j]));
        }
    }
    header.push("K_random".into());
    if theta.is_some() {
        header.push("K_random_oracle".into());
    }
    header.push("scalar".into());
    if theta.is_some() {
        for h in ["scalar_oracle", "scalar_unit_coefficient", "discrepancy_oracle", "discrepancy_unit_coefficient"] {
            header.push(h.into());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut rows = Vec::new();
    let mut worst_oracle: f64 = 0.0;
    let mut flagged = 0usize;
    let mut k_range = (f64::INFINITY, f64::NEG_INFINITY);
    let grid = chart.sample_grid(a.grid.max(1));
    for p in &grid {
        let mut row: Vec<String> = p.iter().map(|x| num(*x)).collect();
        let g = chart.metric_at(p)?;
        for i in 0..d {
            for j in i..d {
                row.push(num(g[(i, j)]));
            }
        }
        let gamma = chart.christoffel_at(p, ChristoffelMethod::ClosedForm)?;
        for k in 0..d {
            for i in 0..d {
                for j in i..d {
                    row.push(num(gamma.get(k, i, j)));
                }
            }
        }
        let unit = |i: usize| -> Vec<f64> {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        };
        for &(i, j) in &planes {
            let k = sectional_curvature_at(&chart, p, &unit(i), &unit(j))?;
            k_range = (k_range.0.min(k), k_range.1.max(k));
            row.push(num(k));
        }
        let (v1, v2, k) = loop {
            let v1: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v2: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            match sectional_curvature_at(&chart, p, &v1, &v2) {
                Ok(k) => break (v1, v2, k),
                Err(Error::DegeneratePlane(_)) => continue,
                Err(e) => return Err(e.into()),
            }
        };
        row.push(num(k));
        if let Some(t) = &theta {
            row.push(num(theta3_sectional_oracle(t, p, &v1, &v2)?));
            let r = scalar_curvature_report(&chart, p, a.tol)?;
            worst_oracle = worst_oracle.max(r.oracle_discrepancy);
            flagged += r.unit_coefficient_flagged as usize;
            for v in [
                r.finite_difference,
                r.frame_oracle,
                r.unit_coefficient_formula,
                r.oracle_discrepancy,
                r.unit_coefficient_discrepancy,
            ] {
                row.push(num(v));
            }
        } else {
            row.push(num(scalar_curvature_at(&chart, p)?));
        }
        rows.push(row);
    }
    let outs = Command::Inspect(a.clone()).outputs();
    write_text(&outs[0], &csv_text(&header, &rows))?;
    let mut summary = json!({
        "chart": kind_name(chart.kind()),
        "coordinates": names,
        "points": grid.len(),
        "seed": a.seed,
        "coordinate_plane_curvature_min": k_range.0,
        "coordinate_plane_curvature_max": k_range.1,
    });
    let mut lines = vec![format!(
        "inspect: {} chart, {} points, coordinate-plane curvature in [{}, {}]",
        kind_name(chart.kind()),
        grid.len(),
        num(k_range.0),
        num(k_range.1)
    )];
    if theta.is_some() {
        summary["scalar_oracle_max_discrepancy"] = json!(worst_oracle);
        summary["scalar_tolerance"] = json!(a.tol);
        summary["unit_coefficient_flagged_points"] = json!(flagged);
        summary["scalar_note"] = json!(
            "scalar curvature is compared with 6 theta'^2 - 4 cot(2 theta) theta'' (frame oracle) and with theta'^2 - 4 cot(2 theta) theta'' (unit-coefficient formula)"
        );
        lines.push(format!(
            "scalar curvature: max |numeric - frame oracle| = {}; unit-coefficient formula flagged at {flagged} of {} points",
            num(worst_oracle),
            grid.len()
        ));
    }
    write_json(&outs[1], &summary)?;
    lines.push(format!("wrote {}", outs[0].display()));
    Ok(Outcome {
        code: EXIT_OK,
        summary: lines,
    })
}

fn fiber_of(f: FiberArg) -> Fiber {
    match f {
        FiberArg::Flat => Fiber::Flat,
        FiberArg::Round => Fiber::RoundUnitSphere,
    }
}

fn cmd_build_umbilical(a: &BuildArgs) -> CliResult<Outcome> {
    let f = load_warp(&a.f)?;
    let chart = MetricChart::warped_product(f.clone(), a.fiber_dim, fiber_of(a.fiber))?;
    let profile = integrate_profile(&f, a.x10, a.x00, a.theta0, a.arclen, a.step)?;
    let outs = Command::BuildUmbilical(a.clone()).outputs();
    write_text(&outs[0], &profile.to_csv())?;
    if !(profile.arclen() > 0.0) {
        return Err(CliError {
            code: EXIT_DOMAIN,
            message: "profile leaves the domain of f immediately".into(),
        });
    }
    let imm = build_umbilical_immersion(&chart, &profile)?;
    let grid = midpoint_grid(imm.param_box(), a.grid);
    let report = umbilicity_report(&chart, &imm, &grid, a.tol)?;
    let mut lambda_error: f64 = 0.0;
    if let Expectation::Umbilical(lambda) = imm.expectation() {
        for (q, m) in grid.iter().zip(&report.mean_eigenvalue) {
            lambda_error = lambda_error.max((m - lambda(q)).abs());
        }
    }
    let class = if profile.c == 0.0 {
        "slice-equivalent (c = 0)"
    } else if profile.samples.iter().all(|s| s.theta == profile.samples[0].theta) {
        "constant angle"
    } else {
        "general"
    };
    write_text(&outs[2], &report_csv(&chart, &imm, &report)?)?;
    if a.fiber_dim == 1 {
        write_text(&outs[3], &mesh_ascii(&imm, a.grid.max(2))?)?;
    }
    let doc = json!({
        "profile": {
            "c": profile.c,
            "step": profile.step,
            "arclen": profile.arclen(),
            "samples": profile.samples.len(),
            "max_drift": profile.max_drift,
            "domain_exit": profile.domain_exit,
            "class": class,
        },
        "umbilicity": report,
        "lambda_max_error": lambda_error,
        "verdict": if report.totally_umbilical { "totally umbilical" } else { "not totally umbilical" },
    });
    write_json(&outs[1], &doc)?;
    let mut lines = vec![
        format!(
            "profile: c = {}, arclen {}, max drift {}{}",
            num(profile.c),
            num(profile.arclen()),
            num(profile.max_drift),
            profile.domain_exit.map_or(String::new(), |s| format!(", leaves the domain of f at s = {}", num(s)))
        ),
        format!("profile class: {class}"),
        format!(
            "{} umbilicity deviation {} (tol {}), max |lambda - theta'| {}, totally geodesic: {}",
            pass_fail(report.totally_umbilical),
            num(report.deviation),
            num(a.tol),
            num(lambda_error),
            report.totally_geodesic
        ),
    ];
    lines.push(format!("wrote {}", outs[1].display()));
    Ok(Outcome::verdict(report.totally_umbilical, lines))
}

fn cmd_conformal(a: &ConformalArgs) -> CliResult<Outcome> {
    let f = load_warp(&a.f)?;
    if a.interval.len() != 2 {
        return Err(CliError::input("--interval takes two numbers a,b"));
    }
    let map = conformal_to_product(&f, [a.interval[0], a.interval[1]], a.t0)?;
    let defect = map.consistency_defect(&f)?;
    let n = a.grid.max(2);
    let header: Vec<String> = ["t", "s", "h", "f"].iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for i in 0..n {
        let t = a.interval[0] + (a.interval[1] - a.interval[0]) * i as f64 / (n - 1) as f64;
        let s = map.s_of_t.value(t)?;
        rows.push(vec![num(t), num(s), num(map.h.value(s)?), num(f.value(t)?)]);
    }
    let outs = Command::Conformal(a.clone()).outputs();
    write_text(&outs[0], &csv_text(&header, &rows))?;
    let ok = defect < a.tol;
    write_json(
        &outs[1],
        &json!({
            "t0": a.t0,
            "interval": a.interval,
            "s_range": [map.s_knots[0], map.s_knots[map.s_knots.len() - 1]],
            "panels": map.t_knots.len() - 1,
            "consistency_defect": defect,
            "tolerance": a.tol,
        }),
    )?;
    let lines = vec![
        format!(
            "s ranges over [{}, {}] with {} Simpson panels",
            num(map.s_knots[0]),
            num(map.s_knots[map.s_knots.len() - 1]),
            map.t_knots.len() - 1
        ),
        format!("{} max |h(s(t)) - f(t)| = {} (tol {})", pass_fail(ok), num(defect), num(a.tol)),
    ];
    Ok(Outcome {
        code: if ok { EXIT_OK } else { EXIT_NUMERICAL },
        summary: lines,
    })
}

fn smoothness_lines(r: &SmoothnessReport) -> Vec<String> {
    let mut lines: Vec<String> = r
        .entries
        .iter()
        .map(|e| {
            format!(
                "{}  {:<28} measured {:<20} threshold {}",
                pass_fail(e.passed),
                e.condition,
                num(e.measured),
                num(e.threshold)
            )
        })
        .collect();
    lines.push(format!("overall: {}", pass_fail(r.passed)));
    lines
}

fn check_smoothness(a: &SmoothnessArgs) -> CliResult<Outcome> {
    let theta = load_theta(&a.theta)?;
    let target = match a.target {
        TargetArg::S3 => ClosureTarget::S3,
        TargetArg::S2xr => ClosureTarget::S2xR,
    };
    let r = closure_smoothness_check(&theta, a.b, target, a.kmax, a.tol)?;
    write_json(&Command::Check(CheckCommand::Smoothness(a.clone())).outputs()[0], &r)?;
    let mut lines = smoothness_lines(&r);
    lines.push(r.note.clone());
    Ok(Outcome::verdict(r.passed, lines))
}

fn check_r3(a: &R3Args) -> CliResult<Outcome> {
    let theta = load_theta(&a.theta)?;
    if a.grid < 2 || !(a.span > 0.0) {
        return Err(CliError::input("--grid must be at least 2 and --span positive"));
    }
    let grid: Vec<f64> = (0..a.grid)
        .map(|i| -a.span + 2.0 * a.span * i as f64 / (a.grid - 1) as f64)
        .collect();
    let r = r3_admissibility(&theta, &grid, a.tol);
    write_json(&Command::Check(CheckCommand::R3(a.clone())).outputs()[0], &r)?;
    let mut lines = smoothness_lines(&r.report);
    lines.push(format!(
        "min margin {} at x = {}; length heuristic (c = {}): {}",
        num(r.min_margin),
        num(r.argmin),
        num(r.lower_bound_constant),
        if r.heuristic_passed { "lengths grow at least linearly" } else { "length bound violated on samples" }
    ));
    Ok(Outcome::verdict(r.report.passed, lines))
}

fn check_submersion(a: &SubmersionArgs) -> CliResult<Outcome> {
    let theta = load_theta(&a.theta)?;
    let (lo, hi) = theta.domain();
    let (lo, hi) = (lo.max(-10.0), hi.min(10.0));
    let inset = 0.025 * (hi - lo);
    let n = a.grid.max(2);
    let mut samples = Vec::new();
    let mut worst_k: f64 = 0.0;
    let mut worst_iso: f64 = 0.0;
    let mut worst_fiber: f64 = 0.0;
    for i in 0..n {
        let u = lo + inset + (hi - lo - 2.0 * inset) * i as f64 / (n - 1) as f64;
        let t = theta.value(u)?;
        if !(t > 1e-3 && t < std::f64::consts::FRAC_PI_2 - 1e-3) {
            continue;
        }
        let k = base_gauss_curvature_pair(&theta, u)?;
        let p = [u, 0.3, -0.2];
        let horizontal = [vec![1.0, 0.0, 0.0], vec![0.0, 1.0 / t.tan(), -t.tan()]];
        let mut iso: f64 = 0.0;
        for v in &horizontal {
            iso = iso.max(submersion_isometry_defect(&theta, &p, v)?);
        }
        let w = submersion_differential(&[0.0, 1.0, 1.0]);
        let fiber = w[0].hypot(w[1]);
        worst_k = worst_k.max((k.closed_form - k.finite_difference).abs());
        worst_iso = worst_iso.max(iso);
        worst_fiber = worst_fiber.max(fiber);
        samples.push(json!({
            "u": u,
            "gauss_closed_form": k.closed_form,
            "gauss_finite_difference": k.finite_difference,
            "isometry_defect": iso,
        }));
    }
    if samples.is_empty() {
        return Err(CliError::input("--theta: no sample keeps theta inside (0, pi/2)"));
    }
    let passed = worst_k < BASE_CURVATURE_AGREEMENT && worst_iso < a.tol && worst_fiber < 1e-12;
    write_json(
        &Command::Check(CheckCommand::Submersion(a.clone())).outputs()[0],
        &json!({
            "samples": samples,
            "max_gauss_discrepancy": worst_k,
            "gauss_agreement": BASE_CURVATURE_AGREEMENT,
            "max_isometry_defect": worst_iso,
            "isometry_tolerance": a.tol,
            "max_fiber_image": worst_fiber,
            "passed": passed,
        }),
    )?;
    let lines = vec![
        format!(
            "{} base curvature closed form vs -phi''/phi: max discrepancy {}",
            pass_fail(worst_k < BASE_CURVATURE_AGREEMENT),
            num(worst_k)
        ),
        format!("{} horizontal isometry defect {}", pass_fail(worst_iso < a.tol), num(worst_iso)),
        format!("{} |d pi(xi)| = {}", pass_fail(worst_fiber < 1e-12), num(worst_fiber)),
    ];
    Ok(Outcome::verdict(passed, lines))
}

fn check_tg(a: &TgArgs) -> CliResult<Outcome> {
    let chart = load_chart(&a.chart)?;
    let theta = theta_of(&chart)
        .ok_or_else(|| CliError::input("--chart: tg-surfaces needs a theta3 chart"))?
        .clone();
    let surface = build_level_surface(&chart, a.x0)?;
    let report = umbilicity_report(&chart, &surface, &surface.param_grid(a.grid.max(2)), a.tol)?;
    let (expected_geodesic, closed) = match surface.expectation() {
        Expectation::Level {
            totally_geodesic,
            extrinsic_curvature,
        } => (*totally_geodesic, *extrinsic_curvature),
        _ => unreachable!("level surfaces carry a level expectation"),
    };
    let numeric = crate::hypersurface::fundamental_forms_at(&chart, &surface, &[0.0, 0.0])?.gauss_kronecker();
    let consistent = expected_geodesic == report.totally_geodesic && (closed - numeric).abs() < 1e-8;
    write_json(
        &Command::Check(CheckCommand::TgSurfaces(a.clone())).outputs()[0],
        &json!({
            "x0": a.x0,
            "theta_prime": theta.value(a.x0).and_then(|_| theta.eval(a.x0, 1))?,
            "expected_totally_geodesic": expected_geodesic,
            "umbilicity": report,
            "extrinsic_curvature_closed_form": closed,
            "extrinsic_curvature_numeric": numeric,
            "consistent": consistent,
        }),
    )?;
    let lines = vec![
        format!(
            "{} level surface x = {}: max |principal curvature| {} (tol {})",
            pass_fail(report.totally_geodesic),
            num(a.x0),
            num(report.max_abs_eigenvalue),
            num(a.tol)
        ),
        format!("det S: closed form {}, numeric {}", num(closed), num(numeric)),
    ];
    if !consistent {
        return Ok(Outcome {
            code: EXIT_NUMERICAL,
            summary: lines,
        });
    }
    Ok(Outcome::verdict(report.totally_geodesic, lines))
}

fn parse_field(chart: &MetricChart, name: &str) -> CliResult<VectorFieldSpec> {
    let n = name.trim();
    if n == "xi" {
        return Ok(VectorFieldSpec::Xi);
    }
    let names = chart.coordinate_names();
    if let Ok(i) = n.parse::<usize>() {
        if i < names.len() {
            return Ok(VectorFieldSpec::Coordinate(i));
        }
    }
    if let Some(c) = n.strip_prefix('d') {
        if let Some(i) = names.iter().position(|x| x == c) {
            return Ok(VectorFieldSpec::Coordinate(i));
        }
    }
    Err(CliError::input(format!(
        "--field: `{name}` is not xi, a coordinate index, or one of {}",
        names.iter().map(|x| format!("d{x}")).collect::<Vec<_>>().join(", ")
    )))
}

fn check_killing(a: &KillingArgs) -> CliResult<Outcome> {
    let chart = load_chart(&a.chart)?;
    let field = parse_field(&chart, &a.field)?;
    let r = killing_defect(&chart, &field, &chart.sample_grid(a.grid.max(1)), a.tol)?;
    write_json(&Command::Check(CheckCommand::Killing(a.clone())).outputs()[0], &r)?;
    Ok(Outcome::verdict(
        r.is_killing,
        vec![format!(
            "{} field {}: max Killing defect {} over {} points (tol {})",
            pass_fail(r.is_killing),
            a.field,
            num(r.max_defect),
            r.points.len(),
            num(a.tol)
        )],
    ))
}

fn check_lemma1(a: &Lemma1Args) -> CliResult<Outcome> {
    let f = load_warp(&a.f)?;
    let chart = MetricChart::warped_product(f.clone(), 1, Fiber::Flat)?;
    let b = chart.bounds().to_vec();
    let mut cases: Vec<(String, ImmersionSpec, Vec<Vec<f64>>)> = Vec::new();

    let slice = ImmersionSpec::slice(&chart, 0, 0.0)?;
    let sgrid = midpoint_grid(&[shrink(b[1]), [-1.0, 1.0]], a.grid);
    cases.push(("slice x0 = 0".into(), slice, sgrid));

    let profile = integrate_profile(&f, a.x10, 0.0, a.theta0, a.arclen, a.step)?;
    if !(profile.arclen() > 0.0) {
        return Err(CliError {
            code: EXIT_DOMAIN,
            message: "profile leaves the domain of f immediately".into(),
        });
    }
    let imm = build_umbilical_immersion(&chart, &profile)?;
    let pgrid = midpoint_grid(&[[0.0, profile.arclen()], [-1.0, 1.0]], a.grid);
    cases.push(("profile-built".into(), imm, pgrid));

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.2..0.2)).collect();
    let x1box = shrink([b[1][0].max(-1.0), b[1][1].min(1.0)]);
    let graph = ImmersionSpec::graph(&chart, 0, vec![x1box, [-1.0, 1.0]], move |q| {
        let (x, u) = (q[0], q[1]);
        (
            c[0] * x * x + c[1] * x * u + c[2] * u * u + c[3] * x,
            vec![2.0 * c[0] * x + c[1] * u + c[3], c[1] * x + 2.0 * c[2] * u],
        )
    })?;
    let ggrid = midpoint_grid(&[x1box, [-1.0, 1.0]], a.grid);
    cases.push((format!("random graph (seed {})", a.seed), graph, ggrid));

    let mut entries = Vec::new();
    let mut lines = Vec::new();
    let mut passed = true;
    for (name, imm, grid) in &cases {
        let (mut r1, mut r2) = (0.0f64, 0.0f64);
        for q in grid {
            let r = lemma1_residual(&chart, imm, q)?;
            r1 = r1.max(r.tangential);
            r2 = r2.max(r.normal);
        }
        let ok = r1 < a.tol && r2 < a.tol;
        passed &= ok;
        lines.push(format!("{} {name}: r1 = {}, r2 = {}", pass_fail(ok), num(r1), num(r2)));
        entries.push(json!({"surface": name, "points": grid.len(), "r1": r1, "r2": r2, "passed": ok}));
    }
    write_json(
        &Command::Check(CheckCommand::Lemma1(a.clone())).outputs()[0],
        &json!({"surfaces": entries, "tolerance": a.tol, "passed": passed}),
    )?;
    Ok(Outcome::verdict(passed, lines))
}

fn shrink(b: [f64; 2]) -> [f64; 2] {
    let w = 0.05 * (b[1] - b[0]);
    [b[0] + w, b[1] - w]
}

fn cmd_geodesic(a: &GeodesicArgs) -> CliResult<Outcome> {
    let chart = load_chart(&a.chart)?;
    let d = chart.dim();
    if a.point.len() != d || a.dir.len() != d {
        return Err(CliError::input(format!("--point and --dir need {d} components")));
    }
    chart.check_point(&a.point)?;
    let len = chart.norm(&a.point, &a.dir);
    if !(len > 0.0) {
        return Err(CliError::input("--dir must be nonzero"));
    }
    let v: Vec<f64> = a.dir.iter().map(|x| x / len).collect();
    let path = geodesic_integrate(&chart, &a.point, &v, a.length, a.step)?;
    let names = chart.coordinate_names();
    let mut header = vec!["s".to_string()];
    header.extend(names.iter().cloned());
    header.extend(names.iter().map(|n| format!("v_{n}")));
    header.push("speed_drift".into());
    let rows: Vec<Vec<String>> = path
        .samples
        .iter()
        .map(|s| {
            let mut r = vec![num(s.s)];
            r.extend(s.point.iter().map(|x| num(*x)));
            r.extend(s.velocity.iter().map(|x| num(*x)));
            r.push(num(chart.norm(&s.point, &s.velocity) - 1.0));
            r
        })
        .collect();
    let outs = Command::Geodesic(a.clone()).outputs();
    write_text(&outs[0], &csv_text(&header, &rows))?;
    let drift = path.max_speed_drift(&chart);
    write_json(
        &outs[1],
        &json!({
            "left_domain": path.left_domain,
            "length": path.end().s,
            "end": path.end().point,
            "max_speed_drift": drift,
        }),
    )?;
    let mut lines = vec![format!(
        "geodesic of length {} ending at ({}), max speed drift {}",
        num(path.end().s),
        path.end().point.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", "),
        num(drift)
    )];
    if path.left_domain {
        lines.push("the path left the coordinate box; the output is partial".into());
    }
    Ok(Outcome {
        code: EXIT_OK,
        summary: lines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_with_pi() {
        assert_eq!(parse_number("0.25").unwrap(), 0.25);
        assert_eq!(parse_number("pi").unwrap(), std::f64::consts::PI);
        assert!((parse_number("pi/6").unwrap() - std::f64::consts::FRAC_PI_6).abs() < 1e-15);
        assert_eq!(parse_number("-pi/4").unwrap(), -std::f64::consts::FRAC_PI_4);
        assert!((parse_number("2*pi/3").unwrap() - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
        assert!(parse_number("tau").is_err());
    }

    #[test]
    fn job_config_round_trip() {
        let job = Command::from_json(r#"{"command":"check","check":"killing","chart":"wobble","field":"dy","grid":3}"#).unwrap();
        match &job {
            Command::Check(CheckCommand::Killing(k)) => {
                assert_eq!(k.field, "dy");
                assert_eq!(k.grid, 3);
                assert_eq!(k.tol, 1e-10);
            }
            other => panic!("{other:?}"),
        }
        let v = serde_json::to_value(&job).unwrap();
        assert_eq!(v["command"], "check");
        assert_eq!(v["check"], "killing");
        let again = Command::from_json(&v.to_string()).unwrap();
        assert_eq!(serde_json::to_value(&again).unwrap(), v);
    }

    #[test]
    fn job_config_rejects_unknown_fields() {
        let e = Command::from_json(r#"{"command":"inspect","chart":"hopf","colour":"red"}"#).unwrap_err();
        assert_eq!(e.code, EXIT_INPUT);
        assert!(e.message.contains("colour"), "{}", e.message);
    }

    #[test]
    fn validation() {
        let job = Command::from_json(r#"{"command":"check","check":"killing","chart":"hopf","field":"dy","tol":-1}"#).unwrap();
        assert_eq!(job.validate().unwrap_err().code, EXIT_INPUT);
        let job = Command::from_json(r#"{"command":"build-umbilical","theta0":0.5,"profile-out":"a.csv","report-out":"a.csv"}"#).unwrap();
        assert!(job.validate().unwrap_err().message.contains("distinct"));
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::out_of_domain("x", 2.0, 0.0, 1.0)), EXIT_DOMAIN);
        assert_eq!(
            exit_code(&Error::ConservationBreach {
                drift: 1.0,
                s: 0.0,
                step: 0.5
            }),
            EXIT_NUMERICAL
        );
        assert_eq!(exit_code(&Error::Schema(2)), EXIT_INPUT);
        assert_eq!(exit_code(&Error::NotTotallyGeodesic(1.0)), EXIT_CHECK);
    }

    #[test]
    fn chart_sources() {
        assert!(load_chart("hopf").is_ok());
        assert_eq!(load_chart("nope").unwrap_err().code, EXIT_INPUT);
        let inline = presets::chart("bump").unwrap().to_json_pretty();
        assert_eq!(load_chart(&inline).unwrap(), presets::chart("bump").unwrap());
        let bad = r#"{"schema":2,"metric":{"kind":"theta3","theta":{"form":{"kind":"constant","value":0.5}}}}"#;
        let e = load_chart(bad).unwrap_err();
        assert_eq!(e.code, EXIT_INPUT);
        assert!(e.message.starts_with("--chart"));
    }
}
