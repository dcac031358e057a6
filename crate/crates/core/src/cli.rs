//! Command-line front end: flag and config parsing, CSV input/output and
//! run manifests.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numeric failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bands::{lil_bands, normal_bands, BandMethod, BandSpec, BandSurfaces, MIN_BAND_N};
use crate::copula::{FrankCopula, VarianceField};
use crate::error::Error;
use crate::estimator::{
    default_bandwidth, make_pseudo_sample, BandwidthRule, CopulaGrid, GridSpec,
    KernelCopulaEstimator, PairedSample,
};
use crate::montecarlo::{
    run_bias_check, run_coverage, run_lil_check, with_workers, CoverageReport, DeviationReport,
    ExperimentConfig, LIL_BOUND,
};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "COPULA_BANDS_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Keys accepted in experiment config files.
pub const CONFIG_KEYS: [&str; 10] = [
    "thetas",
    "ns",
    "B",
    "seed",
    "grid",
    "bandwidth",
    "methods",
    "A",
    "confidence",
    "epsilon",
];

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numeric(_) => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "copula-bands",
    version,
    about = "Probit kernel copula estimation with simultaneous confidence bands"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the copula of an `x,y` CSV on a grid.
    Estimate(EstimateArgs),
    /// Estimate and add LIL or normal confidence bands.
    Bands(BandsArgs),
    /// Monte Carlo coverage of the bands on Frank copula data.
    SimulateCoverage(SimulateArgs),
    /// Empirical deviation (lil) or bias (bias) statistics.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Two-column CSV with header `x,y`.
    #[arg(long)]
    pub input: PathBuf,
    /// Bandwidth; defaults to 1 / log n.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Knots per axis of the interior grid.
    #[arg(long, default_value_t = 33)]
    pub grid: usize,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Lil,
    Normal,
}

impl From<MethodArg> for BandMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lil => BandMethod::Lil,
            MethodArg::Normal => BandMethod::Normal,
        }
    }
}

#[derive(Debug, Args)]
pub struct BandsArgs {
    #[command(flatten)]
    pub estimate: EstimateArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Lil)]
    pub method: MethodArg,
    /// LIL constant A(c).
    #[arg(long = "A", default_value_t = 0.5)]
    pub a: f64,
    /// LIL margin factor, in (-1, 1).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub epsilon: f64,
    /// Pointwise level of the normal band.
    #[arg(long, default_value_t = 0.99)]
    pub confidence: f64,
    /// Frank parameter whose asymptotic variance drives the normal band.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Keep band values outside [0, 1].
    #[arg(long)]
    pub no_clamp: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Flat `key = value` experiment file.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to $COPULA_BANDS_WORKERS or all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    Lil,
    Bias,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub mode: VerifyMode,
    #[command(flatten)]
    pub run: SimulateArgs,
}

/// Reproducibility record written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub version: String,
    pub duration_seconds: f64,
}

impl RunManifest {
    fn new(subcommand: &str, parameters: BTreeMap<String, String>, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            parameters,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: 0.0,
        }
    }
}

/// `<out>.manifest.json`
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code. Diagnostics go to stderr as one line.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let kind = if e.code == EXIT_NUMERIC { "numeric" } else { "usage" };
            eprintln!("error[{kind}]: {}", e.message);
            e.code
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let start = Instant::now();
    let (manifest, out) = match cli.command {
        Command::Estimate(args) => cmd_estimate(&args)?,
        Command::Bands(args) => cmd_bands(&args)?,
        Command::SimulateCoverage(args) => cmd_simulate_coverage(&args)?,
        Command::Verify(args) => cmd_verify(&args)?,
    };
    if let (Some(mut manifest), Some(out)) = (manifest, out) {
        manifest.duration_seconds = start.elapsed().as_secs_f64();
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::usage(format!("cannot serialize manifest: {e}")))?;
        std::fs::write(manifest_path(&out), text + "\n").map_err(|e| {
            CliError::usage(format!("cannot write manifest for {}: {e}", out.display()))
        })?;
    }
    Ok(())
}

type Outcome = (Option<RunManifest>, Option<PathBuf>);

fn open_output(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            CliError::usage(format!("cannot create {}: {e}", path.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_failed(e: io::Error) -> CliError {
    CliError::usage(format!("write failed: {e}"))
}

/// Reads a two-column `x,y` CSV. Errors name the offending line and column.
pub fn read_sample_csv<R: Read>(reader: R) -> Result<PairedSample, Error> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::InvalidInput(format!("cannot read CSV header: {e}")))?
        .clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(Error::InvalidInput(format!(
            "line 1: expected header 'x,y', got '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::InvalidInput(format!("line {line}: malformed CSV record: {e}"))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "line {line}: expected 2 fields, got {}",
                record.len()
            )));
        }
        for (col, name, dst) in [(0, "x", &mut xs), (1, "y", &mut ys)] {
            let field = &record[col];
            let value: f64 = field.parse().map_err(|_| {
                Error::InvalidInput(format!(
                    "line {line}, column {name}: '{field}' is not a number"
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "line {line}, column {name}: value must be finite"
                )));
            }
            dst.push(value);
        }
    }
    PairedSample::new(xs, ys)
}

fn load_sample(path: &Path) -> CliResult<PairedSample> {
    let file = File::open(path)
        .map_err(|e| CliError::usage(format!("cannot open {}: {e}", path.display())))?;
    Ok(read_sample_csv(file)?)
}

pub fn write_estimate_csv<W: Write>(mut w: W, grid: &CopulaGrid) -> io::Result<()> {
    writeln!(w, "u,v,estimate")?;
    for (u, v, c) in grid.iter() {
        writeln!(w, "{u},{v},{c}")?;
    }
    w.flush()
}

pub fn write_bands_csv<W: Write>(mut w: W, bands: &BandSurfaces) -> io::Result<()> {
    writeln!(w, "u,v,lower,center,upper")?;
    let rows = bands
        .center
        .iter()
        .zip(bands.lower.values())
        .zip(bands.upper.values());
    for (((u, v, c), l), h) in rows {
        writeln!(w, "{u},{v},{l},{c},{h}")?;
    }
    w.flush()
}

pub fn write_coverage_csv<W: Write>(mut w: W, report: &CoverageReport) -> io::Result<()> {
    writeln!(w, "method,theta,n,coverage,mc_stderr,B,seed")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.method,
            r.theta,
            r.n,
            r.coverage(),
            r.mc_stderr(),
            r.replications,
            r.seed
        )?;
    }
    w.flush()
}

/// Per-cell LIL statistics and a closing `# verdict` line.
pub fn write_lil_csv<W: Write>(mut w: W, report: &DeviationReport) -> io::Result<bool> {
    writeln!(w, "theta,n,h,B,stat_max,stat_mean,stat_p99,fraction_within_bound")?;
    let mut ok = true;
    for r in &report.rows {
        ok &= r.lil_max() <= LIL_BOUND;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.theta,
            r.n,
            r.bandwidth,
            r.replications,
            r.lil_max(),
            r.lil_mean(),
            r.lil_quantile(0.99),
            r.fraction_within(LIL_BOUND)
        )?;
    }
    let verdict = if ok { "bound satisfied" } else { "bound violated" };
    writeln!(w, "# verdict: {verdict} (all statistics <= {LIL_BOUND}: {ok})")?;
    w.flush()?;
    Ok(ok)
}

/// Per-cell bias statistics and a closing `# verdict` line; decay means
/// strictly decreasing in `n` within every θ.
pub fn write_bias_csv<W: Write>(mut w: W, report: &DeviationReport) -> io::Result<bool> {
    writeln!(w, "theta,n,h,B,bias_stat,mc_error")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.theta, r.n, r.bandwidth, r.replications, r.bias_stat, r.bias_mc_error
        )?;
    }
    let ok = bias_decays(report);
    let verdict = if ok { "decay observed" } else { "no decay" };
    writeln!(w, "# verdict: {verdict}")?;
    w.flush()?;
    Ok(ok)
}

/// Whether the bias statistic strictly decreases with `n` for every θ.
pub fn bias_decays(report: &DeviationReport) -> bool {
    let mut by_theta: BTreeMap<u64, Vec<(usize, f64)>> = BTreeMap::new();
    for r in &report.rows {
        by_theta
            .entry(r.theta.to_bits())
            .or_default()
            .push((r.n, r.bias_stat));
    }
    by_theta.values_mut().all(|cells| {
        cells.sort_by_key(|c| c.0);
        cells.windows(2).all(|w| w[1].1 < w[0].1)
    })
}

fn estimate_grid_for(
    sample: &PairedSample,
    bandwidth: Option<f64>,
    resolution: usize,
) -> CliResult<(CopulaGrid, f64)> {
    if resolution < 1 {
        return Err(CliError::usage("--grid must be at least 1"));
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(CliError::usage(format!("--bandwidth must be positive, got {h}"))),
        None => default_bandwidth(sample.len())?.h,
    };
    let pseudo = make_pseudo_sample(sample);
    let knots = GridSpec::interior(resolution).knots();
    let grid = KernelCopulaEstimator::probit(&pseudo).grid(h, &knots, &knots)?;
    Ok((grid, h))
}

pub fn cmd_estimate(args: &EstimateArgs) -> CliResult<Outcome> {
    let sample = load_sample(&args.input)?;
    let (grid, h) = estimate_grid_for(&sample, args.bandwidth, args.grid)?;
    let mut out = open_output(args.out.as_deref())?;
    write_estimate_csv(&mut out, &grid).map_err(write_failed)?;
    let mut p = BTreeMap::new();
    p.insert("input".into(), args.input.display().to_string());
    p.insert("n".into(), sample.len().to_string());
    p.insert("bandwidth".into(), h.to_string());
    p.insert("grid".into(), args.grid.to_string());
    Ok((Some(RunManifest::new("estimate", p, None)), args.out.clone()))
}

pub fn cmd_bands(args: &BandsArgs) -> CliResult<Outcome> {
    let method = BandMethod::from(args.method);
    if method == BandMethod::Normal && args.theta.is_none() {
        return Err(CliError::usage(
            "--method normal needs --theta (the Frank parameter of the variance)",
        ));
    }
    let sample = load_sample(&args.estimate.input)?;
    if sample.len() < MIN_BAND_N {
        return Err(CliError::usage(format!(
            "bands need n >= {MIN_BAND_N} so that R_n = sqrt(n / (2 log log n)) is defined, got n = {}",
            sample.len()
        )));
    }
    let (center, h) = estimate_grid_for(&sample, args.estimate.bandwidth, args.estimate.grid)?;
    let spec = BandSpec {
        method,
        a: args.a,
        epsilon: args.epsilon,
        confidence: args.confidence,
        clamp: !args.no_clamp,
    };
    let n = sample.len();
    let bands = match method {
        BandMethod::Lil => lil_bands(&center, n, &spec)?,
        BandMethod::Normal => {
            let theta = args.theta.expect("checked above");
            let copula = FrankCopula::new(theta)?;
            let field = VarianceField::evaluate(&copula, center.u_knots(), center.v_knots());
            normal_bands(&center, n, &field, &spec)?
        }
    }
    .with_bandwidth(h);
    let mut out = open_output(args.estimate.out.as_deref())?;
    write_bands_csv(&mut out, &bands).map_err(write_failed)?;
    let mut p = BTreeMap::new();
    p.insert("input".into(), args.estimate.input.display().to_string());
    p.insert("n".into(), n.to_string());
    p.insert("bandwidth".into(), h.to_string());
    p.insert("grid".into(), args.estimate.grid.to_string());
    p.insert("method".into(), method.to_string());
    p.insert("A".into(), args.a.to_string());
    p.insert("epsilon".into(), args.epsilon.to_string());
    p.insert("confidence".into(), args.confidence.to_string());
    p.insert("clamp".into(), (!args.no_clamp).to_string());
    if let Some(t) = args.theta {
        p.insert("theta".into(), t.to_string());
    }
    p.insert("half_width_min".into(), bands.metadata.half_width_min.to_string());
    p.insert("half_width_max".into(), bands.metadata.half_width_max.to_string());
    Ok((Some(RunManifest::new("bands", p, None)), args.estimate.out.clone()))
}

/// Parses a flat `key = value` experiment description. Blank lines and
/// `#` comments are ignored; list values are comma separated.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Error> {
    let mut entries: BTreeMap<String, String> = BTreeMap::new();
    let mut unknown = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", i + 1)))?;
        let key = key.trim();
        if !CONFIG_KEYS.contains(&key) {
            unknown.push(key.to_string());
            continue;
        }
        if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key '{key}'", i + 1)));
        }
    }
    if !unknown.is_empty() {
        return Err(Error::Config(format!(
            "unknown config keys: {} (allowed: {})",
            unknown.join(", "),
            CONFIG_KEYS.join(", ")
        )));
    }

    fn num<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, Error> {
        s.trim()
            .parse()
            .map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", s.trim())))
    }
    fn list<T: std::str::FromStr>(key: &str, s: &str) -> Result<Vec<T>, Error> {
        s.split(',').map(|x| num(key, x)).collect()
    }

    let mut config = ExperimentConfig::default();
    if let Some(v) = entries.get("thetas") {
        config.thetas = list("thetas", v)?;
    }
    if let Some(v) = entries.get("ns") {
        config.ns = list("ns", v)?;
    }
    if let Some(v) = entries.get("B") {
        config.replications = num("B", v)?;
    }
    if let Some(v) = entries.get("seed") {
        config.seed = num("seed", v)?;
    }
    if let Some(v) = entries.get("grid") {
        config.grid = GridSpec::interior(num("grid", v)?);
    }
    if let Some(v) = entries.get("bandwidth") {
        config.bandwidth = v.parse::<BandwidthRule>()?;
    }
    let methods: Vec<BandMethod> = match entries.get("methods") {
        Some(v) => v.split(',').map(str::parse).collect::<Result<_, _>>()?,
        None => vec![BandMethod::Lil, BandMethod::Normal],
    };
    let mut lil = BandSpec::lil();
    let mut normal = BandSpec::normal();
    if let Some(v) = entries.get("A") {
        lil.a = num("A", v)?;
    }
    if let Some(v) = entries.get("epsilon") {
        lil.epsilon = num("epsilon", v)?;
    }
    if let Some(v) = entries.get("confidence") {
        normal.confidence = num("confidence", v)?;
    }
    config.bands = methods
        .into_iter()
        .map(|m| match m {
            BandMethod::Lil => lil,
            BandMethod::Normal => normal,
        })
        .collect();
    config.validate()?;
    Ok(config)
}

fn load_config(args: &SimulateArgs) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        CliError::usage(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn worker_count(flag: Option<usize>) -> CliResult<usize> {
    if let Some(w) = flag {
        return Ok(w.max(1));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|w| w.max(1))
            .map_err(|_| CliError::usage(format!("{WORKERS_ENV} must be a positive integer, got '{v}'"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn config_parameters(config: &ExperimentConfig) -> BTreeMap<String, String> {
    let join = |xs: Vec<String>| xs.join(",");
    let mut p = BTreeMap::new();
    p.insert("thetas".into(), join(config.thetas.iter().map(f64::to_string).collect()));
    p.insert("ns".into(), join(config.ns.iter().map(usize::to_string).collect()));
    p.insert("B".into(), config.replications.to_string());
    p.insert("seed".into(), config.seed.to_string());
    p.insert("grid".into(), config.grid.resolution.to_string());
    p.insert("bandwidth".into(), config.bandwidth.to_string());
    p.insert(
        "methods".into(),
        join(config.bands.iter().map(|b| b.method.to_string().to_lowercase()).collect()),
    );
    if let Some(l) = config.bands.iter().find(|b| b.method == BandMethod::Lil) {
        p.insert("A".into(), l.a.to_string());
        p.insert("epsilon".into(), l.epsilon.to_string());
    }
    if let Some(nb) = config.bands.iter().find(|b| b.method == BandMethod::Normal) {
        p.insert("confidence".into(), nb.confidence.to_string());
    }
    p
}

pub fn cmd_simulate_coverage(args: &SimulateArgs) -> CliResult<Outcome> {
    let config = load_config(args)?;
    let workers = worker_count(args.workers)?;
    let report = with_workers(workers, || run_coverage(&config))??;
    let mut out = open_output(args.out.as_deref())?;
    write_coverage_csv(&mut out, &report).map_err(write_failed)?;
    let manifest = RunManifest::new("simulate-coverage", config_parameters(&config), Some(config.seed));
    Ok((Some(manifest), args.out.clone()))
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<Outcome> {
    let config = load_config(&args.run)?;
    let workers = worker_count(args.run.workers)?;
    let mut out = open_output(args.run.out.as_deref())?;
    let (name, ok) = match args.mode {
        VerifyMode::Lil => {
            let report = with_workers(workers, || run_lil_check(&config))??;
            ("lil", write_lil_csv(&mut out, &report).map_err(write_failed)?)
        }
        VerifyMode::Bias => {
            let report = with_workers(workers, || run_bias_check(&config))??;
            ("bias", write_bias_csv(&mut out, &report).map_err(write_failed)?)
        }
    };
    if args.run.out.is_some() {
        println!("verify {name}: {}", if ok { "pass" } else { "fail" });
    }
    let mut p = config_parameters(&config);
    p.insert("mode".into(), name.into());
    let manifest = RunManifest::new("verify", p, Some(config.seed));
    Ok((Some(manifest), args.run.out.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_overrides() {
        let c = parse_config("thetas = -2, 1\nns = 50,100 # sizes\nB = 10\nseed = 3\n").unwrap();
        assert_eq!(c.thetas, vec![-2.0, 1.0]);
        assert_eq!(c.ns, vec![50, 100]);
        assert_eq!(c.replications, 10);
        assert_eq!(c.seed, 3);
        assert_eq!(c.bands.len(), 2);
        assert_eq!(c.grid, GridSpec::interior(33));

        let c = parse_config("methods = lil\nA = 0.7\nepsilon = -0.25\nbandwidth = power:-0.25\ngrid = 9").unwrap();
        assert_eq!(c.bands, vec![BandSpec::lil().with_a(0.7).with_epsilon(-0.25)]);
        assert_eq!(c.grid.resolution, 9);
        assert_eq!(c.bandwidth.bandwidth(16), 0.5);
    }

    #[test]
    fn config_errors() {
        let err = parse_config("thetas = 1\nreps = 4\nfoo = 1").unwrap_err().to_string();
        assert!(err.contains("reps") && err.contains("foo"), "{err}");
        assert!(parse_config("B = 0").is_err());
        assert!(parse_config("B = ten").is_err());
        assert!(parse_config("ns = 10").is_err());
        assert!(parse_config("methods = bootstrap").is_err());
        assert!(parse_config("just text").is_err());
        assert!(parse_config("B = 1\nB = 2").is_err());
    }

    #[test]
    fn sample_csv_parsing() {
        let s = read_sample_csv("x,y\n1,2\n3.5, -4\n".as_bytes()).unwrap();
        assert_eq!(s.xs(), &[1.0, 3.5]);
        assert_eq!(s.ys(), &[2.0, -4.0]);
        let err = read_sample_csv("x,y\n1,2\n3,abc\n".as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("column y"), "{err}");
        assert!(read_sample_csv("a,b\n1,2\n3,4\n".as_bytes()).is_err());
        assert!(read_sample_csv("x,y\n1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(
            manifest_path(Path::new("/tmp/out.csv")),
            PathBuf::from("/tmp/out.csv.manifest.json")
        );
    }
}
