//! Command-line front end: ROC runs, spectrum enumeration, code reports and
//! the error-exponent bound.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dht_core::analysis::{delta_grid, exponent_bound, exponent_terms, BoundaryConvention, LogBase};
use dht_core::codes::{make_code, CacheStatus, LinearCode, SpectrumCache, TieRule};
use dht_core::par::Execution;
use dht_core::schemes::{SchemeConfig, SchemeKind, Setup};
use dht_core::sim::{analytic_roc, brute_force_roc, run_roc_with, Engine, RocCurve, RunOptions};
use dht_core::sources::{parse_seed, HypothesisPair};

pub mod output;

pub use output::{write_csv, write_json, CSV_HEADER};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const SCOPE: i32 = 3;
    pub const BUDGET: i32 = 4;
}

#[derive(Parser, Debug)]
#[command(name = "dht", version, about = "Short-length coding schemes for binary distributed hypothesis testing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report n, k, minimum distance, covering radius and weight distribution.
    CodeInfo(CodeInfoArgs),
    /// Compute a ROC staircase.
    Roc(RocArgs),
    /// Enumerate and cache a spectrum.
    Enumerate(EnumerateArgs),
    /// Evaluate the asymptotic Type-II error exponent bound.
    Exponent(ExponentArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize)]
pub struct CacheArgs {
    /// Spectrum cache directory [default: $DHT_CACHE_DIR or a temp dir]
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

impl CacheArgs {
    fn cache(&self) -> SpectrumCache {
        match &self.cache_dir {
            Some(dir) => SpectrumCache::new(dir),
            None => SpectrumCache::from_env(),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CodeInfoArgs {
    /// Built-in code name or code file path.
    #[arg(long)]
    pub code: String,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Outcomes at the threshold count once, as in the test itself.
    Partition,
    /// Outcomes at the threshold count in both error types.
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Tie {
    #[value(name = "lex-min")]
    #[serde(rename = "lex-min")]
    LexMin,
    #[value(name = "lex-max")]
    #[serde(rename = "lex-max")]
    LexMax,
}

impl From<Tie> for TieRule {
    fn from(t: Tie) -> Self {
        match t {
            Tie::LexMin => TieRule::SmallestPattern,
            Tie::LexMax => TieRule::LargestPattern,
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize)]
pub struct RocArgs {
    #[arg(long, value_parser = parse_from_str::<SchemeKind>)]
    pub scheme: SchemeKind,
    #[arg(long, default_value = "asym", value_parser = parse_from_str::<Setup>)]
    pub setup: Setup,
    /// Quantizer code (quantization and qb).
    #[arg(long)]
    pub code: Option<String>,
    /// Code whose parity-check matrix bins the quantizer messages (qb).
    #[arg(long)]
    pub bin_code: Option<String>,
    /// Truncation length.
    #[arg(long)]
    pub l: Option<usize>,
    /// Block length; implied by --code for coded schemes.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p0: f64,
    #[arg(long)]
    pub p1: f64,
    #[arg(long)]
    pub c0: f64,
    #[arg(long)]
    pub c1: f64,
    /// Monte-Carlo trials per hypothesis.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Master seed, decimal or 0x-hex.
    #[arg(long, default_value = "0")]
    pub seed: String,
    #[arg(long, default_value = "montecarlo", value_parser = parse_from_str::<Engine>)]
    pub engine: Engine,
    /// `lo:hi`, `lo:hi:step` or a comma-separated list; default is the full grid.
    #[arg(long)]
    pub thresholds: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Trials per hypothesis used to estimate nuisance parameters.
    #[arg(long, default_value_t = dht_core::schemes::DEFAULT_CALIBRATION_TRIALS)]
    pub calib_trials: u64,
    /// Boundary treatment of the analytic truncation errors.
    #[arg(long, value_enum, default_value = "partition")]
    pub boundary: Boundary,
    #[arg(long, value_enum, default_value = "lex-min")]
    pub tie: Tie,
    /// Build (or load) a syndrome table of up to 27 redundancy bits.
    #[arg(long)]
    pub large_table: bool,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spectrum {
    Cosets,
    Weights,
    ZeroRegion,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub code: String,
    #[arg(long)]
    pub bin_code: Option<String>,
    #[arg(long, value_enum)]
    pub what: Spectrum,
    #[arg(long, value_enum, default_value = "lex-min")]
    pub tie: Tie,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    Bits,
    Nats,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExponentArgs {
    #[arg(long)]
    pub p0: f64,
    #[arg(long)]
    pub p1: f64,
    /// Rate R1 of the encoder, in units of the chosen base.
    #[arg(long)]
    pub rate: f64,
    /// Spacing of the δ grid.
    #[arg(long, default_value_t = 1e-3)]
    pub grid: f64,
    /// Also evaluate the inner minimum at this δ and base predictions on it.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_enum, default_value = "bits")]
    pub base: Base,
    /// Block lengths for the β_n predictions.
    #[arg(long = "n", value_delimiter = ',', default_values_t = [50usize, 100])]
    pub lengths: Vec<usize>,
}

fn parse_from_str<T: std::str::FromStr<Err = dht_core::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: dht_core::Error| e.to_string())
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.chain().find_map(|e| e.downcast_ref::<dht_core::Error>()) {
            Some(dht_core::Error::ScopeViolation(_)) => exit::SCOPE,
            Some(dht_core::Error::BudgetExceeded { .. }) => exit::BUDGET,
            Some(
                dht_core::Error::InvalidParameter(_)
                | dht_core::Error::UnknownCode(_)
                | dht_core::Error::MalformedCodeFile { .. }
                | dht_core::Error::DimensionMismatch { .. }
                | dht_core::Error::InvalidLength(_)
                | dht_core::Error::DegenerateTest,
            ) => exit::USAGE,
            _ if error.downcast_ref::<UsageError>().is_some() => exit::USAGE,
            _ => exit::FAILURE,
        };
        Self { code, error }
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

/// Parses argv, runs the command, prints to stdout and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    let mut stdout = std::io::stdout().lock();
    match run(&cli, &mut stdout) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let threads = match &cli.command {
        Command::CodeInfo(a) => a.cache.threads,
        Command::Roc(a) => a.cache.threads,
        Command::Enumerate(a) => a.cache.threads,
        Command::Exponent(_) => None,
    };
    let body = || -> anyhow::Result<Vec<u8>> {
        let mut buf = Vec::new();
        match &cli.command {
            Command::CodeInfo(a) => buf.extend(cmd_code_info(a)?.to_string().into_bytes()),
            Command::Roc(a) => emit_roc(a, &cmd_roc(a)?, &mut buf)?,
            Command::Enumerate(a) => buf.extend(cmd_enumerate(a)?.to_string().into_bytes()),
            Command::Exponent(a) => buf.extend(cmd_exponent(a)?.to_string().into_bytes()),
        }
        Ok(buf)
    };
    let bytes = match threads {
        Some(0) => return Err(usage("--threads must be at least 1").into()),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .context("building the thread pool")?
            .install(body)?,
        None => body()?,
    };
    out.write_all(&bytes).map_err(anyhow::Error::from)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeInfo {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub rate: f64,
    pub content_hash: String,
    pub min_distance: Option<usize>,
    pub covering_radius: Option<usize>,
    pub weight_distribution: Option<Vec<u64>>,
}

impl std::fmt::Display for CodeInfo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "code {} (hash {})", self.name, self.content_hash)?;
        let dmin = self.min_distance.map_or("unknown".into(), |d| d.to_string());
        writeln!(f, "n={} k={} d_min={} rate={:.6}", self.n, self.k, dmin, self.rate)?;
        match self.covering_radius {
            Some(r) => writeln!(f, "covering radius {r}")?,
            None => writeln!(f, "covering radius unavailable (enumeration budget exceeded)")?,
        }
        match &self.weight_distribution {
            Some(wd) => {
                let list: Vec<String> = wd.iter().map(u64::to_string).collect();
                writeln!(f, "weight distribution {}", list.join(","))
            }
            None => writeln!(f, "weight distribution unavailable (dimension above 26)"),
        }
    }
}

pub fn cmd_code_info(args: &CodeInfoArgs) -> anyhow::Result<CodeInfo> {
    let code = make_code(&args.code)?;
    let cache = args.cache.cache();
    let wd = match cache.weight_distribution(&code) {
        Ok((wd, _)) => Some(wd),
        Err(dht_core::Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let covering_radius = match cache.coset_leader_spectrum(&code, TieRule::default()) {
        Ok((s, _)) => Some(s.d_max()),
        Err(dht_core::Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(CodeInfo {
        name: code.name().to_string(),
        n: code.n(),
        k: code.k(),
        rate: code.rate(),
        content_hash: format!("{:016x}", code.content_hash()),
        min_distance: wd.as_ref().and_then(|w| w.minimum_distance()),
        covering_radius,
        weight_distribution: wd.map(|w| w.counts().to_vec()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnumerateReport {
    pub what: Spectrum,
    pub code: String,
    pub bin_code: Option<String>,
    pub counts: Vec<u64>,
    pub total: u64,
    /// `log2(total)` when the total is a power of two.
    pub total_log2: Option<u32>,
    pub cache_hit: bool,
    pub cache_dir: PathBuf,
}

impl std::fmt::Display for EnumerateReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let symbol = match self.what {
            Spectrum::Weights => "A",
            _ => "E",
        };
        let mut line = String::new();
        for (w, c) in self.counts.iter().enumerate().filter(|(_, &c)| c > 0) {
            let _ = write!(line, "{symbol}{w}={c} ");
        }
        writeln!(f, "{}", line.trim_end())?;
        match self.total_log2 {
            Some(e) => writeln!(f, "total={} (2^{e})", self.total)?,
            None => writeln!(f, "total={}", self.total)?,
        }
        let status = if self.cache_hit { "hit" } else { "miss" };
        writeln!(f, "cache {status} ({})", self.cache_dir.display())
    }
}

pub fn cmd_enumerate(args: &EnumerateArgs) -> anyhow::Result<EnumerateReport> {
    let code = make_code(&args.code)?;
    let cache = args.cache.cache();
    let tie = TieRule::from(args.tie);
    let budget_hint = |e: dht_core::Error| -> anyhow::Error {
        match e {
            dht_core::Error::BudgetExceeded { .. } => anyhow::Error::new(e).context(
                "exhaustive enumeration is out of reach; Monte-Carlo runs still work through the bounded-search decoder",
            ),
            other => other.into(),
        }
    };
    let (counts, status) = match args.what {
        Spectrum::Cosets => {
            let (s, st) = cache.coset_leader_spectrum(&code, tie).map_err(budget_hint)?;
            (s.counts().to_vec(), st)
        }
        Spectrum::Weights => {
            let (w, st) = cache.weight_distribution(&code).map_err(budget_hint)?;
            (w.counts().to_vec(), st)
        }
        Spectrum::ZeroRegion => {
            let bin = args
                .bin_code
                .as_deref()
                .ok_or_else(|| usage("--what zero-region needs --bin-code"))?;
            let hb = make_code(bin)?.parity_check().clone();
            let (s, st) = cache.zero_region_spectrum(&code, &hb, tie).map_err(budget_hint)?;
            (s.counts().to_vec(), st)
        }
    };
    let total: u64 = counts.iter().sum();
    Ok(EnumerateReport {
        what: args.what,
        code: code.name().to_string(),
        bin_code: args.bin_code.clone(),
        counts,
        total,
        total_log2: total.is_power_of_two().then(|| total.trailing_zeros()),
        cache_hit: status == CacheStatus::Hit,
        cache_dir: cache.dir().to_path_buf(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedDelta {
    pub delta: f64,
    pub rate_term: f64,
    pub divergence_term: f64,
    pub inner_min: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub n: usize,
    /// `e^(−nθ)`: θ read as nats.
    pub beta_exp: f64,
    /// `2^(−nθ)`: θ read as bits.
    pub beta_pow2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentReport {
    pub base: Base,
    pub theta: f64,
    pub delta_star: f64,
    pub fixed: Option<FixedDelta>,
    /// Exponent the predictions use: the fixed-δ value when given, else θ.
    pub exponent_used: f64,
    pub predictions: Vec<Prediction>,
}

impl std::fmt::Display for ExponentReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let unit = match self.base {
            Base::Bits => "bits",
            Base::Nats => "nats",
        };
        writeln!(f, "theta = {:.6} {unit} per symbol at delta* = {:.4}", self.theta, self.delta_star)?;
        if let Some(d) = &self.fixed {
            writeln!(
                f,
                "delta = {}: rate term {:.6}, divergence {:.6}, inner min {:.6} {unit}",
                d.delta, d.rate_term, d.divergence_term, d.inner_min
            )?;
        }
        writeln!(
            f,
            "the base of the logarithm is not fixed by the bound; both readings of beta_n ~ exp(-n*theta) follow"
        )?;
        for p in &self.predictions {
            writeln!(
                f,
                "n={}: exp(-n*theta) = {:.3e}   2^(-n*theta) = {:.3e}",
                p.n, p.beta_exp, p.beta_pow2
            )?;
        }
        Ok(())
    }
}

pub fn cmd_exponent(args: &ExponentArgs) -> anyhow::Result<ExponentReport> {
    let base = match args.base {
        Base::Bits => LogBase::Bits,
        Base::Nats => LogBase::Nats,
    };
    let bound = exponent_bound(args.p0, args.p1, args.rate, &delta_grid(args.grid)?, base)?;
    let fixed = match args.delta {
        Some(d) if (0.0..=1.0).contains(&d) => {
            let (rate_term, divergence_term) = exponent_terms(args.p0, args.p1, args.rate, d, base);
            Some(FixedDelta {
                delta: d,
                rate_term,
                divergence_term,
                inner_min: rate_term.min(divergence_term),
            })
        }
        Some(d) => return Err(usage(format!("--delta {d} outside [0, 1]"))),
        None => None,
    };
    let exponent_used = fixed.map_or(bound.theta, |d| d.inner_min.max(0.0));
    let predictions = args
        .lengths
        .iter()
        .map(|&n| Prediction {
            n,
            beta_exp: (-(n as f64) * exponent_used).exp(),
            beta_pow2: (-(n as f64) * exponent_used).exp2(),
        })
        .collect();
    Ok(ExponentReport {
        base: args.base,
        theta: bound.theta,
        delta_star: bound.delta_star,
        fixed,
        exponent_used,
        predictions,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeRecord {
    pub role: &'static str,
    pub spec: String,
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub content_hash: String,
}

impl CodeRecord {
    fn new(role: &'static str, spec: &str, code: &LinearCode) -> Self {
        Self {
            role,
            spec: spec.to_string(),
            name: code.name().to_string(),
            n: code.n(),
            k: code.k(),
            content_hash: format!("{:016x}", code.content_hash()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub version: &'static str,
    pub parameters: RocArgs,
    pub seed: u64,
    pub codes: Vec<CodeRecord>,
    pub nuisance: Option<dht_core::schemes::EstimatedParams>,
    pub duration_secs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocOutput {
    pub manifest: RunManifest,
    pub curve: RocCurve,
}

/// Parses `lo:hi`, `lo:hi:step` (inclusive) or `a,b,c`.
pub fn parse_thresholds(s: &str) -> anyhow::Result<Vec<f64>> {
    let num = |t: &str| -> anyhow::Result<f64> {
        t.trim().parse::<f64>().map_err(|_| usage(format!("bad threshold `{t}`")))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (lo, hi, step) = match parts.as_slice() {
            [lo, hi] => (num(lo)?, num(hi)?, 1.0),
            [lo, hi, step] => (num(lo)?, num(hi)?, num(step)?),
            _ => return Err(usage(format!("bad threshold range `{s}`"))),
        };
        if step.is_nan() || step <= 0.0 || hi < lo {
            return Err(usage(format!("bad threshold range `{s}`")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| lo + i as f64 * step).collect())
    } else {
        let mut v = s.split(',').map(num).collect::<anyhow::Result<Vec<_>>>()?;
        v.sort_by(f64::total_cmp);
        Ok(v)
    }
}

pub fn cmd_roc(args: &RocArgs) -> anyhow::Result<RocOutput> {
    let start = Instant::now();
    let seed = parse_seed(&args.seed)?;
    let pair = HypothesisPair::new(args.p0, args.c0, args.p1, args.c1)?;
    let tie = TieRule::from(args.tie);
    let cache = args.cache.cache();
    let mut codes = Vec::new();

    let quantizer = match &args.code {
        Some(spec) => {
            let code = make_code(spec)?;
            codes.push(CodeRecord::new("quantizer", spec, &code));
            Some(code)
        }
        None => None,
    };
    let need_code = || -> anyhow::Result<LinearCode> {
        quantizer
            .clone()
            .ok_or_else(|| usage(format!("--scheme {} needs --code", args.scheme)))
    };
    let config = match args.scheme {
        SchemeKind::Separate => SchemeConfig::separate(),
        SchemeKind::Truncation => {
            SchemeConfig::truncation(args.l.ok_or_else(|| usage("--scheme truncation needs --l"))?)
        }
        SchemeKind::Quantization => SchemeConfig::quantization(args.setup, need_code()?),
        SchemeKind::QuantizeBinning => {
            let spec = args.bin_code.as_deref().ok_or_else(|| usage("--scheme qb needs --bin-code"))?;
            let bin = make_code(spec)?;
            codes.push(CodeRecord::new("binning", spec, &bin));
            SchemeConfig::quantize_binning(args.setup, need_code()?, bin.parity_check().clone())
        }
    }
    .with_tie(tie);
    // Uncoded schemes behave the same in both setups; keep the label given.
    let config = SchemeConfig {
        setup: args.setup,
        ..config
    };

    let n = match (config.code_len(), args.n) {
        (Some(cn), Some(n)) if cn != n => bail!(usage(format!("--n {n} disagrees with the code length {cn}"))),
        (Some(cn), _) => cn,
        (None, Some(n)) => n,
        (None, None) => bail!(usage(format!("--scheme {} needs --n", args.scheme))),
    };
    if args.large_table {
        let code = need_code()?;
        cache.install_large_table(&code, tie)?;
    }
    let thresholds = args.thresholds.as_deref().map(parse_thresholds).transpose()?;

    let curve = match args.engine {
        Engine::MonteCarlo => {
            let opts = RunOptions {
                trials: args.trials,
                seed,
                thresholds,
                calibration_trials: args.calib_trials,
                exec: Execution::Parallel,
            };
            run_roc_with(&config, &pair, n, &opts)?
        }
        Engine::Analytic => {
            let convention = match args.boundary {
                Boundary::Partition => BoundaryConvention::Partition,
                Boundary::Printed => BoundaryConvention::DoubleCounted,
            };
            analytic_roc(&config, &pair, n, thresholds.as_deref(), &cache, convention)?
        }
        Engine::BruteForce => brute_force_roc(&config, &pair, n, thresholds.as_deref(), Execution::Parallel)?,
    };
    let manifest = RunManifest {
        command: "roc",
        version: env!("CARGO_PKG_VERSION"),
        parameters: args.clone(),
        seed,
        codes,
        nuisance: curve.nuisance,
        duration_secs: start.elapsed().as_secs_f64(),
    };
    Ok(RocOutput { manifest, curve })
}

fn emit_roc(args: &RocArgs, output: &RocOutput, out: &mut dyn std::io::Write) -> anyhow::Result<()> {
    match (&args.out, args.format) {
        (Some(path), Format::Csv) => {
            let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&output.curve, file)?;
            let manifest_path = output::manifest_path(path);
            std::fs::write(&manifest_path, serde_json::to_vec_pretty(&output.manifest)?)
                .with_context(|| format!("writing {}", manifest_path.display()))?;
        }
        (Some(path), Format::Json) => {
            let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_json(&output.manifest, &output.curve, file)?;
        }
        (None, Format::Csv) => write_csv(&output.curve, out)?,
        (None, Format::Json) => write_json(&output.manifest, &output.curve, out)?,
    }
    Ok(())
}
