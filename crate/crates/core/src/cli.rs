//! Command-line front end: coverage curves, rate profiles, optimal-m sweeps
//! and Monte Carlo validation, written as CSV or JSON.

use crate::error::Error;
use crate::geometry::{NetworkConfig, PzfSplit};
use crate::montecarlo::{estimate_coverage_curve, estimate_rate, McSettings};
use crate::rate::{rate_profile, Receiver, Scheme};
use crate::{pzf, rate};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
/// Monte Carlo and analytic results disagree beyond the z-score bound.
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

const VALIDATE_Z_LIMIT: f64 = 4.0;

#[derive(Debug, Parser)]
#[command(name = "smcov", version, about = "Coverage and rate of spatial multiplexing in Poisson cellular downlinks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coverage probability P(SINR > z) over a range of thresholds
    Coverage(CoverageArgs),
    /// Mean, 5 % and 80 % rate of one configuration
    Rate(RateArgs),
    /// Optimal number of cancelled groups for a sweep of configurations
    OptimalM(OptimalMArgs),
    /// Compare analytic results with Monte Carlo estimates
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RxKind {
    Pzf,
    Mmse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Sm,
    Sst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// key = value file; command-line flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// output file (default: stdout); a `<out>.manifest.json` is written next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct NetworkArgs {
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma2: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CoverageArgs {
    #[arg(long, value_enum)]
    pub rx: Option<RxKind>,
    /// cancelled groups for PZF; omitted selects the optimal split
    #[arg(long)]
    pub m: Option<usize>,
    /// thresholds in dB as start:end:step
    #[arg(long, allow_hyphen_values = true)]
    pub zdb: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[command(flatten)]
    pub net: NetworkArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct RateArgs {
    #[arg(long, value_enum)]
    pub rx: Option<RxKind>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub net: NetworkArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct OptimalMArgs {
    /// comma-separated list
    #[arg(long)]
    pub nt: Option<String>,
    #[arg(long)]
    pub nr: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub sigma2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub rx: Option<RxKind>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub zdb: Option<String>,
    #[command(flatten)]
    pub net: NetworkArgs,
    #[command(flatten)]
    pub common: Common,
}

/// Failure carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_INVALID_CONFIG, message: msg.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_) | Error::Infeasible { .. } | Error::SizeGuard { .. } => EXIT_INVALID_CONFIG,
            _ => EXIT_NUMERIC,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Key-value settings from `--config`.
#[derive(Debug, Default, Clone)]
struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    fn parse(text: &str) -> CliResult<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("config line {}: expected key = value", i + 1)))?;
            map.insert(k.trim().replace('-', "_").to_lowercase(), v.trim().to_string());
        }
        Ok(FileConfig(map))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::config(format!("config key {key}: cannot parse {v:?}"))),
        }
    }

    fn get_enum<T: ValueEnum>(&self, key: &str) -> CliResult<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => T::from_str(v, true)
                .map(Some)
                .map_err(|_| CliError::config(format!("config key {key}: unknown value {v:?}"))),
        }
    }

    fn pick<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    fn pick_enum<T: ValueEnum>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get_enum(key),
        }
    }
}

fn network(args: &NetworkArgs, file: &FileConfig) -> CliResult<NetworkConfig> {
    let d = NetworkConfig::default();
    let cfg = NetworkConfig {
        lambda: file.pick(args.lambda, "lambda")?.unwrap_or(d.lambda),
        alpha: file.pick(args.alpha, "alpha")?.unwrap_or(d.alpha),
        sigma2: file.pick(args.sigma2, "sigma2")?.unwrap_or(d.sigma2),
        n_t: file.pick(args.nt, "nt")?.unwrap_or(d.n_t),
        n_r: file.pick(args.nr, "nr")?.unwrap_or(d.n_r),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn receiver(rx: RxKind, m: Option<usize>, cfg: &NetworkConfig) -> CliResult<Receiver> {
    let r = match (rx, m) {
        (RxKind::Mmse, None) => Receiver::Mmse,
        (RxKind::Mmse, Some(_)) => return Err(CliError::config("--m applies to the PZF receiver only")),
        (RxKind::Pzf, Some(m)) => Receiver::Pzf(PzfSplit::new(cfg.n_t, cfg.n_r, m)?),
        (RxKind::Pzf, None) => Receiver::PzfOptimal,
    };
    Ok(r.resolve(cfg)?)
}

/// Parse `start:end:step` (dB). An `end` below `start` gives an empty range.
pub fn parse_db_range(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("range {spec:?}: expected start:end:step"));
    }
    let mut v = [0.0f64; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.trim().parse().map_err(|_| format!("range {spec:?}: cannot parse {p:?}"))?;
        if !slot.is_finite() {
            return Err(format!("range {spec:?}: values must be finite"));
        }
    }
    let [start, end, step] = v;
    if !(step > 0.0) {
        return Err(format!("range {spec:?}: step must be positive"));
    }
    if end < start {
        return Ok(Vec::new());
    }
    let n = ((end - start) / step + 1e-9).floor() as usize + 1;
    if n > 1_000_000 {
        return Err(format!("range {spec:?}: {n} points is too many"));
    }
    Ok((0..n)
        .map(|i| {
            let x = start + i as f64 * step;
            let x = (x * 1e9).round() / 1e9;
            if x == 0.0 { 0.0 } else { x }
        })
        .collect())
}

pub fn db_to_linear(z_db: f64) -> f64 {
    10f64.powf(z_db / 10.0)
}

fn parse_list<T: std::str::FromStr>(name: &str, text: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::config(format!("{name}: cannot parse {s:?}")))
        })
        .collect()
}

/// Provenance record written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub version: String,
    pub seed: Option<u64>,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputChecksum>,
}

#[derive(Debug, Serialize)]
pub struct OutputChecksum {
    pub path: String,
    pub sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

struct Output {
    command: &'static str,
    parameters: Value,
    seed: Option<u64>,
    body: String,
}

fn emit(out: Option<&Path>, o: Output, started: Instant) -> CliResult<()> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(o.body.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e));
    };
    std::fs::write(path, o.body.as_bytes()).map_err(|e| CliError::io(path, e))?;
    let manifest = RunManifest {
        command: o.command.to_string(),
        parameters: o.parameters,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: o.seed,
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs: vec![OutputChecksum {
            path: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            sha256: sha256_hex(o.body.as_bytes()),
        }],
    };
    let mpath = manifest_path(path);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    std::fs::write(&mpath, text).map_err(|e| CliError::io(&mpath, e))
}

fn mc_settings(common: &Common, file: &FileConfig, default_trials: usize) -> CliResult<McSettings> {
    let mut s = McSettings::new(
        file.pick(common.trials, "trials")?.unwrap_or(default_trials),
        file.pick(common.seed, "seed")?.unwrap_or(1),
    );
    s.threads = file.pick(common.threads, "threads")?;
    if s.threads == Some(0) {
        return Err(CliError::config("--threads must be at least 1"));
    }
    Ok(s)
}

fn cmd_coverage(a: &CoverageArgs, started: Instant) -> CliResult<()> {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let cfg = network(&a.net, &file)?;
    let rx_kind = file.pick_enum(a.rx, "rx")?.unwrap_or(RxKind::Pzf);
    let rx = receiver(rx_kind, file.pick(a.m, "m")?, &cfg)?;
    let zdb_spec = file.pick(a.zdb.clone(), "zdb")?.unwrap_or_else(|| "-10:20:1".into());
    let zdb = parse_db_range(&zdb_spec).map_err(CliError::config)?;
    let method = file.pick_enum(a.method, "method")?.unwrap_or(Method::Analytic);
    let settings = mc_settings(&a.common, &file, 100_000)?;

    let mut body = String::from("z_db,z_linear,coverage,method,ci_halfwidth\n");
    let zs: Vec<f64> = zdb.iter().map(|&d| db_to_linear(d)).collect();
    match method {
        Method::Analytic => {
            for (d, z) in zdb.iter().zip(&zs) {
                let p = rx.coverage(&cfg, *z)?;
                writeln!(body, "{d},{z},{p},analytic,").unwrap();
            }
        }
        Method::Mc => {
            if !zs.is_empty() {
                let est = estimate_coverage_curve(&cfg, rx, &zs, &settings)?;
                for ((d, z), e) in zdb.iter().zip(&zs).zip(&est) {
                    writeln!(body, "{d},{z},{},mc,{}", e.mean, 1.96 * e.std_error).unwrap();
                }
            }
        }
    }
    let params = json!({
        "config": cfg,
        "receiver": rx.to_string(),
        "zdb": zdb_spec,
        "method": method,
        "trials": (method == Method::Mc).then_some(settings.trials),
    });
    let seed = (method == Method::Mc).then_some(settings.seed);
    emit(a.common.out.as_deref(), Output { command: "coverage", parameters: params, seed, body }, started)
}

fn cmd_rate(a: &RateArgs, started: Instant) -> CliResult<()> {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let cfg = network(&a.net, &file)?;
    let scheme = match file.pick_enum(a.scheme, "scheme")?.unwrap_or(SchemeArg::Sm) {
        SchemeArg::Sm => Scheme::Sm,
        SchemeArg::Sst => Scheme::Sst,
    };
    let rx_kind = file.pick_enum(a.rx, "rx")?.unwrap_or(RxKind::Mmse);
    let m = file.pick(a.m, "m")?;
    let rx_cfg = match scheme {
        Scheme::Sm => cfg,
        Scheme::Sst => NetworkConfig { n_t: 1, ..cfg },
    };
    let rx = receiver(rx_kind, m, &rx_cfg)?;
    let profile = rate_profile(scheme, &cfg, rx)?;
    let format = file.pick_enum(a.format, "format")?.unwrap_or(Format::Json);
    let body = match format {
        Format::Json => serde_json::to_string_pretty(&profile).expect("profile serialises") + "\n",
        Format::Csv => format!(
            "scheme,receiver,n_t,n_r,mean_rate,q05,q80\n{:?},{},{},{},{},{},{}\n",
            profile.scheme,
            csv_field(&profile.receiver.to_string()),
            profile.n_t,
            profile.n_r,
            profile.mean_rate,
            profile.q05,
            profile.q80
        ),
    };
    let params = json!({ "config": cfg, "scheme": scheme, "receiver": rx.to_string() });
    emit(a.common.out.as_deref(), Output { command: "rate", parameters: params, seed: None, body }, started)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_optimal_m(a: &OptimalMArgs, started: Instant) -> CliResult<()> {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let list = |flag: &Option<String>, key: &str, default: &str| -> CliResult<String> {
        Ok(file.pick(flag.clone(), key)?.unwrap_or_else(|| default.to_string()))
    };
    let nts: Vec<usize> = parse_list("nt", &list(&a.nt, "nt", "1")?)?;
    let nrs: Vec<usize> = parse_list("nr", &list(&a.nr, "nr", "1,2,3,4,5,6,7,8,9,10")?)?;
    let alphas: Vec<f64> = parse_list("alpha", &list(&a.alpha, "alpha", "4")?)?;
    let sigmas: Vec<f64> = parse_list("sigma2", &list(&a.sigma2, "sigma2", "0")?)?;
    let lambda = file.pick(a.lambda, "lambda")?.unwrap_or(1.0);

    let mut body = String::from("n_t,n_r,alpha,sigma2,m_star,argmin,agrees,status\n");
    for &n_t in &nts {
        for &n_r in &nrs {
            for &alpha in &alphas {
                for &sigma2 in &sigmas {
                    let cfg = NetworkConfig::new(lambda, alpha, sigma2, n_t, n_r)?;
                    match pzf::optimal_m_report(&cfg) {
                        Ok(r) => {
                            let argmin = r.argmin.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(";");
                            writeln!(body, "{n_t},{n_r},{alpha},{sigma2},{},{argmin},{},ok", r.m_star, r.agrees())
                                .unwrap();
                        }
                        Err(Error::Infeasible { .. }) => {
                            writeln!(body, "{n_t},{n_r},{alpha},{sigma2},,,,infeasible").unwrap();
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
    }
    let params = json!({ "nt": nts, "nr": nrs, "alpha": alphas, "sigma2": sigmas, "lambda": lambda });
    emit(a.common.out.as_deref(), Output { command: "optimal-m", parameters: params, seed: None, body }, started)
}

/// Returns whether every z-score stayed within bounds.
fn cmd_validate(a: &ValidateArgs, started: Instant) -> CliResult<bool> {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let cfg = network(&a.net, &file)?;
    let rx_kind = file.pick_enum(a.rx, "rx")?.unwrap_or(RxKind::Pzf);
    let rx = receiver(rx_kind, file.pick(a.m, "m")?, &cfg)?;
    let zdb_spec = file.pick(a.zdb.clone(), "zdb")?.unwrap_or_else(|| "-5:20:5".into());
    let zdb = parse_db_range(&zdb_spec).map_err(CliError::config)?;
    let settings = mc_settings(&a.common, &file, 20_000)?;

    let zs: Vec<f64> = zdb.iter().map(|&d| db_to_linear(d)).collect();
    let mut body = String::from("quantity,z_db,analytic,monte_carlo,std_error,z_score\n");
    let mut ok = true;
    let est = if zs.is_empty() { Vec::new() } else { estimate_coverage_curve(&cfg, rx, &zs, &settings)? };
    for ((d, z), e) in zdb.iter().zip(&zs).zip(&est) {
        let exact = rx.coverage(&cfg, *z)?;
        let score = e.z_score(exact);
        ok &= score.abs() <= VALIDATE_Z_LIMIT;
        writeln!(body, "coverage,{d},{exact},{},{},{score}", e.mean, e.std_error).unwrap();
    }
    let exact_rate = rate::ergodic_rate(|z| rx.coverage(&cfg, z), rate::RateCutoff::default())?;
    let e = estimate_rate(&cfg, rx, &settings)?;
    let score = e.z_score(exact_rate);
    ok &= score.abs() <= VALIDATE_Z_LIMIT;
    writeln!(body, "rate,,{exact_rate},{},{},{score}", e.mean, e.std_error).unwrap();

    let params = json!({
        "config": cfg,
        "receiver": rx.to_string(),
        "zdb": zdb_spec,
        "trials": settings.trials,
        "z_limit": VALIDATE_Z_LIMIT,
    });
    let out = Output { command: "validate", parameters: params, seed: Some(settings.seed), body };
    emit(a.common.out.as_deref(), out, started)?;
    Ok(ok)
}

/// Run a parsed command and return the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let started = Instant::now();
    let result = match &cli.command {
        Command::Coverage(a) => cmd_coverage(a, started).map(|_| EXIT_OK),
        Command::Rate(a) => cmd_rate(a, started).map(|_| EXIT_OK),
        Command::OptimalM(a) => cmd_optimal_m(a, started).map(|_| EXIT_OK),
        Command::Validate(a) => cmd_validate(a, started).map(|ok| {
            if ok {
                EXIT_OK
            } else {
                eprintln!("smcov: validation failed: |z-score| > {VALIDATE_Z_LIMIT}");
                EXIT_VALIDATION
            }
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("smcov: {}", e.message);
        e.code
    })
}

/// Parse arguments and run; clap's own usage errors exit with code 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INVALID_CONFIG
            } else {
                EXIT_OK
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_ranges() {
        let r = parse_db_range("-5:20:1").unwrap();
        assert_eq!(r.len(), 26);
        assert_eq!(r[5], 0.0);
        assert_eq!(parse_db_range("0:0:1").unwrap(), vec![0.0]);
        assert!(parse_db_range("3:1:1").unwrap().is_empty());
        assert_eq!(parse_db_range("0:1:0.1").unwrap()[3], 0.3);
        assert!(parse_db_range("0:1:0").is_err());
        assert!(parse_db_range("0:1").is_err());
        assert!(parse_db_range("0:inf:1").is_err());
    }

    #[test]
    fn config_file_parsing() {
        let f = FileConfig::parse("# comment\nnt = 2\nalpha=3.5 # trailing\n\nrx = MMSE\n").unwrap();
        assert_eq!(f.get::<usize>("nt").unwrap(), Some(2));
        assert_eq!(f.pick(Some(3usize), "nt").unwrap(), Some(3));
        assert_eq!(f.get_enum::<RxKind>("rx").unwrap(), Some(RxKind::Mmse));
        assert!(FileConfig::parse("nt 2").is_err());
        assert!(f.get::<usize>("alpha").is_err());
    }

    #[test]
    fn manifest_name() {
        assert_eq!(manifest_path(Path::new("/tmp/a.csv")), Path::new("/tmp/a.csv.manifest.json"));
        assert_eq!(sha256_hex(b"abc").len(), 64);
        assert!(sha256_hex(b"abc").starts_with("ba7816bf"));
    }
}
