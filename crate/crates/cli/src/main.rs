//! `widthlab`: identity checks, certification runs, n-scans and scaling fits.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use widthlab::experiment::{
    apply_delta, calibrate_delta, calibration_config, fit_rows, read_rows, render_svg,
    rows_to_string, run_identity_suite, run_schedule, smallest_conforming_n, ErrorColumn,
    FamilyKind, RunConfig, ScanRow, VerifyOptions, DEFAULT_SAFETY,
};
use widthlab::Error;

use config::ConfigFile;

#[derive(Parser)]
#[command(name = "widthlab", version, about = "Numerical lower bounds for widths of W^1_1 in L_q")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suite and report every check.
    Verify(VerifyArgs),
    /// Certify one or more (n, family) runs and write their rows as CSV.
    Certify(RunArgs),
    /// Scan an n schedule and write the rows as CSV.
    Scan(RunArgs),
    /// Fit e = c n^-alpha (ln n)^beta to a column of a results file.
    Fit(FitArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest level used by the exact suites (at most 12).
    #[arg(long)]
    k1_max: Option<u32>,
    /// Seed for the randomised checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the machine-readable report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config file whose `[verify]` section supplies defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Target exponent, q > 2 (default 4).
    #[arg(long)]
    q: Option<f64>,
    /// Band exponent in (1/q, 1/2) (default 0.3).
    #[arg(long)]
    gamma: Option<f64>,
    /// Threshold constant of the L_2 branch; calibrated when omitted.
    #[arg(long)]
    delta: Option<f64>,
    /// A single subspace dimension.
    #[arg(long)]
    n: Option<u64>,
    /// Comma-separated, strictly ascending.
    #[arg(long)]
    n_list: Option<String>,
    /// Comma-separated family names.
    #[arg(long)]
    family: Option<String>,
    /// Seed for the random family.
    #[arg(long)]
    seed: Option<u64>,
    /// log2 of t-subcells per finest cell for nonlinear families.
    #[arg(long)]
    oversample: Option<u32>,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config file whose section for this command supplies defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write a log-log chart of `--column` against n.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Column plotted by `--svg`.
    #[arg(long)]
    column: Option<String>,
    /// Record wall-clock time per row (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct FitArgs {
    /// Results file in the widthlab-v1 format.
    input: Option<PathBuf>,
    /// Error column to fit (default sup_q).
    #[arg(long)]
    column: Option<String>,
    /// Restrict the fit to one family.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Failure classes and their exit codes.
enum Failure {
    Assertion(String),
    Config(String),
    Refusal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Assertion(_) => 1,
            Self::Config(_) => 2,
            Self::Refusal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Assertion(m) | Self::Config(m) | Self::Refusal(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Capacity(_) | Error::Regime { .. } => Self::Refusal(msg),
            Error::Parameter(_) | Error::Shape(_) | Error::Io(_) | Error::Fit(_) => Self::Config(msg),
            Error::Precondition(_) | Error::Evaluation { .. } | Error::EmptySubspace => Self::Assertion(msg),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile, Failure> {
    match path {
        Some(p) => ConfigFile::load(p).map_err(config_err),
        None => Ok(ConfigFile::default()),
    }
}

/// Flag value if given, else the config file's, parsed.
fn pick<T: std::str::FromStr>(flag: Option<T>, cfg: &ConfigFile, section: &str, key: &str) -> Result<Option<T>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match cfg.get(section, key) {
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| config_err(format!("[{section}] {key} = '{raw}' is not a valid value"))),
        None => Ok(None),
    }
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>, Failure> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| config_err(format!("invalid {what} '{s}'"))))
        .collect()
}

fn parse_families(raw: &str) -> Result<Vec<FamilyKind>, Failure> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<FamilyKind>().map_err(Failure::from))
        .collect()
}

fn write_output(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| config_err(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| config_err(format!("stdout: {e}")))
        }
    }
}

struct ResolvedRun {
    cfg: RunConfig,
    out: Option<PathBuf>,
    svg: Option<PathBuf>,
    column: ErrorColumn,
}

fn resolve_run(args: RunArgs, section: &str) -> Result<ResolvedRun, Failure> {
    let file = load_config(args.config.as_deref())?;
    let defaults = RunConfig::default();
    let n: Option<u64> = pick(args.n, &file, section, "n")?;
    let n_list: Option<String> = pick(args.n_list, &file, section, "n-list")?;
    let n_list = match (n, n_list) {
        (Some(_), Some(_)) => return Err(config_err("give either --n or --n-list, not both")),
        (Some(n), None) => vec![n],
        (None, Some(list)) => parse_list(&list, "n")?,
        (None, None) if section == "certify" => return Err(config_err("certify needs --n or --n-list")),
        (None, None) => defaults.n_list.clone(),
    };
    let families = match pick::<String>(args.family, &file, section, "family")? {
        Some(raw) => parse_families(&raw)?,
        None if section == "certify" => vec![FamilyKind::HaarTruncation],
        None => defaults.families.clone(),
    };
    let timing = args.timing || pick::<bool>(None, &file, section, "timing")?.unwrap_or(false);
    let cfg = RunConfig {
        q: pick(args.q, &file, section, "q")?.unwrap_or(defaults.q),
        gamma: pick(args.gamma, &file, section, "gamma")?.unwrap_or(defaults.gamma),
        delta: pick(args.delta, &file, section, "delta")?,
        n_list,
        families,
        seed: pick(args.seed, &file, section, "seed")?.unwrap_or(defaults.seed),
        oversample: pick(args.oversample, &file, section, "oversample")?.unwrap_or(defaults.oversample),
        timing,
    };
    cfg.validate()?;
    let column = pick::<String>(args.column, &file, section, "column")?
        .map(|c| c.parse::<ErrorColumn>())
        .transpose()?
        .unwrap_or(ErrorColumn::AvgQ);
    Ok(ResolvedRun {
        cfg,
        out: pick(args.out, &file, section, "out")?,
        svg: pick(args.svg, &file, section, "svg")?,
        column,
    })
}

/// `delta` from the flag, or calibrated on the out-of-sample battery.
fn resolve_delta(cfg: &RunConfig) -> Result<f64, Failure> {
    if let Some(d) = cfg.delta {
        return Ok(d);
    }
    let battery = calibration_config(cfg);
    let rows = run_schedule(&battery)?;
    let cal = calibrate_delta(&rows, DEFAULT_SAFETY)?;
    for (n, fam) in &cal.unusable {
        eprintln!("calibration: n = {n} {fam} has zero L_2 error and no L_q certificate; ignored");
    }
    match (cal.delta_max, cal.delta) {
        (Some(max), Some(d)) => {
            eprintln!(
                "calibrated delta = {d:.6e} ({:.2} x largest admissible {max:.6e}, battery n = {:?}, seed {})",
                cal.safety, battery.n_list, battery.seed
            );
            Ok(d)
        }
        _ => {
            eprintln!("calibration: every battery row holds the L_q branch; using delta = 1");
            Ok(1.0)
        }
    }
}

fn summarize(rows: &[ScanRow]) {
    for r in rows {
        match (r.metrics(), r.skip_reason()) {
            (Some(m), _) => eprintln!(
                "n = {:>5} {:<16} dim {:>5}  avg_2 {:.4e}  holder_lb {:.4e}  branch {}",
                r.n,
                r.family.name(),
                m.dim,
                m.avg_2,
                m.holder_lb,
                r.dichotomy().map(|d| d.to_string()).unwrap_or_default()
            ),
            (None, Some(why)) => eprintln!("n = {:>5} {:<16} skipped: {why}", r.n, r.family.name()),
            _ => {}
        }
    }
}

fn run_rows(args: RunArgs, section: &str) -> Result<(Vec<ScanRow>, ResolvedRun), Failure> {
    let run = resolve_run(args, section)?;
    let delta = resolve_delta(&run.cfg)?;
    let cfg = RunConfig { delta: Some(delta), ..run.cfg.clone() };
    let mut rows = run_schedule(&cfg)?;
    apply_delta(&mut rows, delta);
    let csv = rows_to_string(&rows)?;
    write_output(run.out.as_deref(), &csv)?;
    if let Some(path) = &run.svg {
        write_output(Some(path), &render_svg(&rows, run.column))?;
    }
    summarize(&rows);
    Ok((rows, run))
}

fn cmd_certify(args: RunArgs) -> CmdResult {
    let (rows, _) = run_rows(args, "certify")?;
    let refused: Vec<String> = rows
        .iter()
        .filter_map(|r| r.skip_reason().map(|why| format!("n = {} {}: {why}", r.n, r.family)))
        .collect();
    if refused.is_empty() {
        Ok(())
    } else {
        Err(Failure::Refusal(format!("refused: {}", refused.join("; "))))
    }
}

fn cmd_scan(args: RunArgs) -> CmdResult {
    let (rows, _) = run_rows(args, "scan")?;
    match smallest_conforming_n(&rows) {
        Some(n) => eprintln!("smallest conforming n: {n}"),
        None => eprintln!("smallest conforming n: none (the largest n violates the dichotomy)"),
    }
    Ok(())
}

fn cmd_fit(args: FitArgs) -> CmdResult {
    let file = load_config(args.config.as_deref())?;
    let input: PathBuf = pick(args.input, &file, "fit", "input")?.ok_or_else(|| config_err("fit needs an input file"))?;
    let column = pick::<String>(args.column, &file, "fit", "column")?
        .map(|c| c.parse::<ErrorColumn>())
        .transpose()?
        .unwrap_or(ErrorColumn::SupQ);
    let family = pick::<String>(args.family, &file, "fit", "family")?
        .map(|f| f.parse::<FamilyKind>())
        .transpose()?;
    let text = fs::File::open(&input).map_err(|e| config_err(format!("cannot open {}: {e}", input.display())))?;
    let rows = read_rows(text)?;
    let f = fit_rows(&rows, column, family)?;
    let report = format!(
        "column={column}\nfamily={}\npoints={}\nc={:.16e}\nalpha={:.16e}\nbeta={:.16e}\nresidual_rms={:.16e}\n",
        family.map(|f| f.name()).unwrap_or("all"),
        f.points,
        f.c,
        f.alpha,
        f.beta,
        f.residual_rms
    );
    write_output(pick(args.out, &file, "fit", "out")?.as_deref(), &report)
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let file = load_config(args.config.as_deref())?;
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        k1_max: pick(args.k1_max, &file, "verify", "k1-max")?.unwrap_or(defaults.k1_max),
        seed: pick(args.seed, &file, "verify", "seed")?.unwrap_or(defaults.seed),
        ..defaults
    };
    let report = run_identity_suite(&opts)?;
    print!("{}", report.human());
    let out: Option<PathBuf> = pick(args.out, &file, "verify", "out")?;
    if out.is_none() {
        println!();
    }
    write_output(out.as_deref(), &report.machine())?;
    let failed: Vec<&str> = report.failures().map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("identity failed: {}", failed.join(", "))))
    }
}

fn init_workers() -> CmdResult {
    let Ok(raw) = std::env::var("WIDTHLAB_WORKERS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| config_err(format!("WIDTHLAB_WORKERS = '{raw}' must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| config_err(format!("worker pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_workers().and_then(|()| match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Fit(a) => cmd_fit(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("widthlab: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
