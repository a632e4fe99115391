//! Command-line front end: turns a [`RunSpec`] (flags, optionally layered
//! over a JSON config file) into CSV or JSON tables.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 invalid input,
//! 3 horizon cap reached.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::analytic::{self, AnalyticError, QuantileQuery};
use crate::model::{pmf_mean, validate_path, ModelError, PathConfig};
use crate::simulator::{self, SimConfig, SimError};
use crate::stats::{self, StatsError};

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
pub const DEFAULT_PERIODS: u64 = 100_000;
pub const DEFAULT_REPS: u32 = 100;

/// Loss probabilities of the two 3-hop scenarios with equal mean age 31/3.
pub const SCENARIO_S1: [f64; 3] = [0.9, 0.4, 0.4];
pub const SCENARIO_S2: [f64; 3] = [0.8, 0.7, 0.8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Receiver age PMF
    Pmf,
    /// Ages exceeded with at most the given tail probabilities
    Icdf,
    /// Mean receiver age
    Expected,
    /// Monte Carlo simulation of the line network
    Simulate,
    /// Simulation versus analytic distribution
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// (0.9, 0.4, 0.4): one very lossy link, two good ones
    S1,
    /// (0.8, 0.7, 0.8): three moderately lossy links
    S2,
}

impl Preset {
    pub fn loss_probs(self) -> &'static [f64] {
        match self {
            Preset::S1 => &SCENARIO_S1,
            Preset::S2 => &SCENARIO_S2,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Sim(#[from] SimError),
    #[error("{0}")]
    Analytic(AnalyticError),
    #[error("cannot read config {path}: {source}")]
    ConfigRead { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config {path}: {source}")]
    ConfigParse { path: PathBuf, source: serde_json::Error },
    #[error("cannot write output: {0}")]
    Output(std::io::Error),
    #[error("cannot start worker pool: {0}")]
    Threads(String),
}

impl From<AnalyticError> for CliError {
    fn from(err: AnalyticError) -> Self {
        match err {
            AnalyticError::Model(m) => CliError::Model(m),
            other => CliError::Analytic(other),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(err: StatsError) -> Self {
        match err {
            StatsError::Analytic(a) => a.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Analytic(AnalyticError::HorizonOverflow { .. }) => 3,
            CliError::Output(_) | CliError::Threads(_) => 1,
            _ => 2,
        }
    }
}

/// Command-line flags. Every field is optional so that a `--config` file can
/// supply it; flags given on the command line win over the file.
#[derive(Debug, Parser)]
#[command(name = "aoi", version, about = "Age-of-information distribution of a lossy multi-hop line network")]
pub struct Args {
    /// Operation to run (may instead come from --config)
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Comma-separated per-link loss probabilities in path order
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub probs: Option<Vec<f64>>,
    /// Built-in 3-hop scenario instead of --probs
    #[arg(long, value_enum, conflicts_with = "probs")]
    pub preset: Option<Preset>,
    /// Slots per sampling period; must be at least the hop count
    #[arg(long)]
    pub slots_per_period: Option<u32>,
    /// pmf: largest age to tabulate
    #[arg(long, conflicts_with = "tail_tol")]
    pub max_age: Option<usize>,
    /// pmf: grow the table until the remaining tail is below this
    #[arg(long)]
    pub tail_tol: Option<f64>,
    /// icdf: comma-separated descending tail probabilities
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<f64>>,
    /// simulate/compare: sampling periods per repetition
    #[arg(long)]
    pub periods: Option<u64>,
    /// simulate/compare: independent repetitions
    #[arg(long)]
    pub reps: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// simulate/compare: leading periods excluded from statistics
    #[arg(long)]
    pub warmup: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write results here instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON file with any of the above fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Simulation worker threads (default: available parallelism)
    #[arg(long)]
    pub threads: Option<usize>,
}

/// One invocation, as read from flags and/or a JSON config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub command: Option<Command>,
    pub probs: Option<Vec<f64>>,
    pub preset: Option<Preset>,
    pub slots_per_period: Option<u32>,
    pub max_age: Option<usize>,
    pub tail_tol: Option<f64>,
    pub targets: Option<Vec<f64>>,
    pub periods: Option<u64>,
    pub reps: Option<u32>,
    pub seed: Option<u64>,
    pub warmup: Option<u64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunSpec {
    /// Fields set in `over` replace those in `self`. A path given either as
    /// probabilities or as a preset replaces both path fields.
    pub fn overridden_by(self, over: RunSpec) -> RunSpec {
        let path_given = over.probs.is_some() || over.preset.is_some();
        let pmf_horizon_given = over.max_age.is_some() || over.tail_tol.is_some();
        RunSpec {
            command: over.command.or(self.command),
            probs: if path_given { over.probs } else { self.probs },
            preset: if path_given { over.preset } else { self.preset },
            slots_per_period: over.slots_per_period.or(self.slots_per_period),
            max_age: if pmf_horizon_given { over.max_age } else { self.max_age },
            tail_tol: if pmf_horizon_given { over.tail_tol } else { self.tail_tol },
            targets: over.targets.or(self.targets),
            periods: over.periods.or(self.periods),
            reps: over.reps.or(self.reps),
            seed: over.seed.or(self.seed),
            warmup: over.warmup.or(self.warmup),
            format: over.format.or(self.format),
            output: over.output.or(self.output),
            threads: over.threads.or(self.threads),
        }
    }

    pub fn path(&self) -> Result<PathConfig, CliError> {
        let probs = match (&self.probs, self.preset) {
            (Some(_), Some(_)) => return Err(CliError::Invalid("give either probs or preset, not both".into())),
            (Some(p), None) => p.as_slice(),
            (None, Some(preset)) => preset.loss_probs(),
            (None, None) => return Err(CliError::Invalid("probs required".into())),
        };
        Ok(validate_path(probs, self.slots_per_period)?)
    }
}

impl From<Args> for RunSpec {
    fn from(args: Args) -> Self {
        RunSpec {
            command: args.command,
            probs: args.probs,
            preset: args.preset,
            slots_per_period: args.slots_per_period,
            max_age: args.max_age,
            tail_tol: args.tail_tol,
            targets: args.targets,
            periods: args.periods,
            reps: args.reps,
            seed: args.seed,
            warmup: args.warmup,
            format: args.format,
            output: args.output,
            threads: args.threads,
        }
    }
}

/// Reads a JSON config file into a [`RunSpec`].
pub fn load_config(file: &Path) -> Result<RunSpec, CliError> {
    let text = std::fs::read_to_string(file).map_err(|source| CliError::ConfigRead {
        path: file.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::ConfigParse {
        path: file.to_path_buf(),
        source,
    })
}

/// Formats like C's `%.{sig}g`: `sig` significant digits, trailing zeros
/// trimmed, scientific notation outside `[1e-5, 10^sig)`.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= sig as i32 {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Six significant digits, always with a decimal point (`1.0`, `10.3333`).
fn format_scalar(x: f64) -> String {
    let s = format_sig(x, 6);
    if s.contains(['.', 'e', 'i', 'N']) {
        s
    } else {
        format!("{s}.0")
    }
}

fn p12(x: f64) -> String {
    format_sig(x, 12)
}

struct Output {
    rows: Vec<Value>,
    columns: Vec<&'static str>,
    csv_rows: Vec<Vec<String>>,
    meta: serde_json::Map<String, Value>,
    csv_trailer: Vec<(&'static str, String)>,
}

impl Output {
    fn new(columns: Vec<&'static str>) -> Self {
        Output {
            rows: Vec::new(),
            columns,
            csv_rows: Vec::new(),
            meta: serde_json::Map::new(),
            csv_trailer: Vec::new(),
        }
    }

    fn row(&mut self, json: Value, csv: Vec<String>) {
        self.rows.push(json);
        self.csv_rows.push(csv);
    }

    fn render(self, format: Format) -> String {
        match format {
            Format::Json => {
                let doc = json!({ "rows": self.rows, "meta": self.meta });
                let mut s = serde_json::to_string_pretty(&doc).expect("serializable output");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = self.columns.join(",");
                s.push('\n');
                for row in &self.csv_rows {
                    s.push_str(&row.join(","));
                    s.push('\n');
                }
                if !self.csv_trailer.is_empty() {
                    s.push('#');
                    for (key, value) in &self.csv_trailer {
                        let _ = write!(s, " {key}={value}");
                    }
                    s.push('\n');
                }
                s
            }
        }
    }
}

fn base_meta(command: Command, spec: &RunSpec, path: &PathConfig) -> serde_json::Map<String, Value> {
    let mut config = json!({
        "command": command,
        "probs": path.loss_probs(),
    });
    let obj = config.as_object_mut().expect("object");
    if let Some(preset) = spec.preset {
        obj.insert("preset".into(), json!(preset));
    }
    if let Some(m) = path.slots_per_period() {
        obj.insert("slots_per_period".into(), json!(m));
    }
    let mut meta = serde_json::Map::new();
    meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    meta.insert("config".into(), config);
    meta.insert("seed".into(), Value::Null);
    meta
}

fn config_mut(meta: &mut serde_json::Map<String, Value>) -> &mut serde_json::Map<String, Value> {
    meta.get_mut("config").and_then(Value::as_object_mut).expect("config object")
}

fn cmd_pmf(spec: &RunSpec, path: &PathConfig) -> Result<Output, CliError> {
    let pmf = match (spec.max_age, spec.tail_tol) {
        (Some(_), Some(_)) => return Err(CliError::Invalid("give either max_age or tail_tol, not both".into())),
        (Some(max_age), None) => analytic::pmf_dp(path, max_age),
        (None, tol) => analytic::pmf_auto_truncate(path, tol.unwrap_or(DEFAULT_TAIL_TOL))?,
    };
    let mean = pmf_mean(&pmf, path.max_loss());

    let mut out = Output::new(vec!["age", "probability"]);
    for (age, &p) in pmf.probs().iter().enumerate() {
        out.row(json!({ "age": age, "probability": p }), vec![age.to_string(), p12(p)]);
    }
    out.meta = base_meta(Command::Pmf, spec, path);
    let cfg = config_mut(&mut out.meta);
    match spec.max_age {
        Some(m) => cfg.insert("max_age".into(), json!(m)),
        None => cfg.insert("tail_tol".into(), json!(spec.tail_tol.unwrap_or(DEFAULT_TAIL_TOL))),
    };
    out.meta.insert("horizon".into(), json!(pmf.horizon()));
    out.meta.insert("tail_mass".into(), json!(pmf.tail_mass()));
    out.meta.insert("mean".into(), json!(mean.value()));
    out.meta.insert("tail_correction".into(), json!(mean.tail_correction));
    out.csv_trailer = vec![("tail_mass", p12(pmf.tail_mass())), ("mean", p12(mean.value()))];
    Ok(out)
}

fn cmd_icdf(spec: &RunSpec, path: &PathConfig) -> Result<Output, CliError> {
    let targets = spec
        .targets
        .clone()
        .unwrap_or_else(|| QuantileQuery::reliability_decades().targets().to_vec());
    if targets.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Invalid("targets must be strictly descending".into()));
    }
    let query = QuantileQuery::new(targets)?;
    let ages = analytic::icdf(path, &query)?;

    let mut out = Output::new(vec!["target", "age"]);
    for (&eps, &age) in query.targets().iter().zip(&ages) {
        out.row(json!({ "target": eps, "age": age }), vec![p12(eps), age.to_string()]);
    }
    out.meta = base_meta(Command::Icdf, spec, path);
    config_mut(&mut out.meta).insert("targets".into(), json!(query.targets()));
    Ok(out)
}

fn cmd_expected(spec: &RunSpec, path: &PathConfig) -> Output {
    let mean = analytic::expected_age(path);
    let mut out = Output::new(vec!["expected_age"]);
    out.row(json!({ "expected_age": mean }), vec![format_scalar(mean)]);
    out.meta = base_meta(Command::Expected, spec, path);
    out
}

fn sim_config(spec: &RunSpec, path: &PathConfig) -> SimConfig {
    SimConfig::new(
        path.clone(),
        spec.periods.unwrap_or(DEFAULT_PERIODS),
        spec.reps.unwrap_or(DEFAULT_REPS),
        spec.seed.unwrap_or(0),
    )
    .with_warmup(spec.warmup.unwrap_or(0))
}

fn run_simulation(spec: &RunSpec, config: &SimConfig) -> Result<simulator::SimResult, CliError> {
    config.validate()?;
    match spec.threads {
        Some(0) => Err(CliError::Invalid("threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Threads(e.to_string()))?;
            Ok(pool.install(|| simulator::run(config))?)
        }
        None => Ok(simulator::run(config)?),
    }
}

fn sim_meta(command: Command, spec: &RunSpec, config: &SimConfig) -> serde_json::Map<String, Value> {
    let mut meta = base_meta(command, spec, &config.path);
    let cfg = config_mut(&mut meta);
    cfg.insert("periods".into(), json!(config.periods));
    cfg.insert("reps".into(), json!(config.repetitions));
    cfg.insert("warmup".into(), json!(config.warmup));
    cfg.insert("seed".into(), json!(config.seed));
    meta.insert("seed".into(), json!(config.seed));
    meta
}

fn cmd_simulate(spec: &RunSpec, path: &PathConfig) -> Result<Output, CliError> {
    let config = sim_config(spec, path);
    let result = run_simulation(spec, &config)?;
    let total = result.empirical.total() as f64;

    let mut out = Output::new(vec!["age", "count", "probability"]);
    for (&age, &count) in result.empirical.counts() {
        let p = count as f64 / total;
        out.row(
            json!({ "age": age, "count": count, "probability": p }),
            vec![age.to_string(), count.to_string(), p12(p)],
        );
    }
    out.meta = sim_meta(Command::Simulate, spec, &config);
    out.meta.insert(
        "summary".into(),
        json!({
            "samples": result.empirical.total(),
            "mean_age": result.mean_age,
            "mean_peak_age": result.mean_peak_age,
            "deliveries": result.deliveries,
            "expected_age": analytic::expected_age(path),
        }),
    );
    out.csv_trailer = vec![
        ("mean_age", p12(result.mean_age.mean)),
        ("mean_age_sd", p12(result.mean_age.std_dev)),
        ("mean_peak_age", p12(result.mean_peak_age.mean)),
        ("mean_peak_age_sd", p12(result.mean_peak_age.std_dev)),
        ("deliveries", result.deliveries.to_string()),
    ];
    Ok(out)
}

fn cmd_compare(spec: &RunSpec, path: &PathConfig) -> Result<Output, CliError> {
    let config = sim_config(spec, path);
    let result = run_simulation(spec, &config)?;
    let report = stats::compare(path, &result)?;

    let mut out = Output::new(vec!["age", "empirical", "analytic", "residual"]);
    for r in &report.per_age_residuals {
        let residual = r.empirical - r.analytic;
        out.row(
            json!({ "age": r.age, "empirical": r.empirical, "analytic": r.analytic, "residual": residual }),
            vec![r.age.to_string(), p12(r.empirical), p12(r.analytic), p12(residual)],
        );
    }
    out.meta = sim_meta(Command::Compare, spec, &config);
    out.meta.insert(
        "report".into(),
        json!({
            "tv_distance": report.tv_distance,
            "mean_gap": report.mean_gap,
            "sample_count": report.sample_count,
            "empirical_tail": report.empirical_tail,
            "analytic_tail": report.analytic_tail,
            "mean_age": result.mean_age,
            "mean_peak_age": result.mean_peak_age,
        }),
    );
    out.csv_trailer = vec![
        ("tv_distance", p12(report.tv_distance)),
        ("mean_gap", p12(report.mean_gap)),
        ("sample_count", report.sample_count.to_string()),
        ("empirical_tail", p12(report.empirical_tail)),
        ("analytic_tail", p12(report.analytic_tail)),
    ];
    Ok(out)
}

/// Runs `spec` and returns the rendered output.
pub fn execute(spec: &RunSpec) -> Result<String, CliError> {
    let command = spec
        .command
        .ok_or_else(|| CliError::Invalid("command required (pmf, icdf, expected, simulate, compare)".into()))?;
    let path = spec.path()?;
    let out = match command {
        Command::Pmf => cmd_pmf(spec, &path)?,
        Command::Icdf => cmd_icdf(spec, &path)?,
        Command::Expected => cmd_expected(spec, &path),
        Command::Simulate => cmd_simulate(spec, &path)?,
        Command::Compare => cmd_compare(spec, &path)?,
    };
    Ok(out.render(spec.format.unwrap_or_default()))
}

fn resolve(args: Args) -> Result<RunSpec, CliError> {
    let file = match &args.config {
        Some(path) => load_config(path)?,
        None => RunSpec::default(),
    };
    Ok(file.overridden_by(args.into()))
}

fn run_spec(spec: &RunSpec) -> Result<(), CliError> {
    let text = execute(spec)?;
    match &spec.output {
        Some(file) => std::fs::write(file, text).map_err(CliError::Output),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(CliError::Output)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Diagnostics go to standard error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match resolve(args).and_then(|spec| run_spec(&spec)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
