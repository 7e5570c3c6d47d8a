use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qchan::experiment::{
    analyze, curve_points, curve_to_csv, gnuplot_script, render_scan, run_scan, Curve, Ensemble,
    OutputFormat, ScanConfig,
};
use qchan::spec::ChannelSpec;
use qchan::verify::{run_suite, Suite};
use qchan::{Error, Order};

/// Entropies of quantum channels: single-channel reports, entropy-plane
/// scans, boundary curves and randomised bound verification.
///
/// Exit codes: 0 success, 1 bound or property violation, 2 input error.
/// QCHAN_THREADS caps the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "qchan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entropies, spectral quantities, bound report and separability verdict
    /// of one channel, as JSON on stdout.
    Analyze(AnalyzeArgs),
    /// Sample an ensemble and write one row per channel.
    Scan(ScanArgs),
    /// Trace a one-parameter family through the entropy plane.
    Curve(CurveArgs),
    /// Run randomised property suites and print per-invariant tallies.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Channel description (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Comma-separated Rényi orders; `inf` for the min-entropy.
    #[arg(long, default_value = "1,2,inf")]
    q: String,
    /// Report entropies in bits instead of nats.
    #[arg(long)]
    bits: bool,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// entropy_plane or appendixC_plane.
    #[arg(long, default_value = "entropy_plane")]
    mode: String,
    /// random_cptp, random_bistochastic, pauli, interval,
    /// reshuffle_invariant or depolarizing.
    #[arg(long, default_value = "random_cptp")]
    ensemble: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value = "1")]
    q: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Environment dimension for random_cptp (default N²).
    #[arg(long)]
    env_dim: Option<usize>,
    /// Number of unitaries mixed by random_bistochastic (default N²).
    #[arg(long)]
    mix: Option<usize>,
    /// Also write a gnuplot script plotting the CSV in `--out`.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// ab, interval_cd or diagonal_Rinv.
    #[arg(long)]
    name: String,
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "1")]
    q: String,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// all, bounds, lemmas, separability or zoo.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Add a non-trace-preserving map to the bounds suite as a negative
    /// control; the run must then fail.
    #[arg(long)]
    inject_invalid: bool,
}

#[derive(Debug)]
enum Failure {
    /// Bad arguments, unreadable or invalid input, I/O errors.
    Input(String),
    /// Computation finished but some bound or invariant failed.
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads().and_then(|threads| match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Scan(a) => cmd_scan(a, threads),
        Command::Curve(a) => cmd_curve(a),
        Command::Verify(a) => cmd_verify(a, threads),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("qchan: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("qchan: {msg}");
            ExitCode::from(2)
        }
    }
}

fn threads() -> Result<usize, Failure> {
    match std::env::var("QCHAN_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Failure::Input(format!(
                "QCHAN_THREADS must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn parse_orders(list: &str) -> Result<Vec<Order>, Failure> {
    let qs = list
        .split(',')
        .map(str::parse)
        .collect::<Result<Vec<Order>, Error>>()?;
    if qs.is_empty() || qs.iter().any(|q| q.value().is_nan() || q.value() < 0.0) {
        return Err(Failure::Input(format!(
            "orders must be non-negative, got `{list}`"
        )));
    }
    Ok(qs)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => emit(text),
    }
}

/// Writes to stdout. A closed pipe (`qchan ... | head`) is not an error; the exit
/// code still reports the outcome of the command.
fn emit(text: &str) -> Result<(), Failure> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            Err(Failure::Input(format!("cannot write stdout: {e}")))
        }
        _ => Ok(()),
    }
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.spec)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", a.spec.display())))?;
    let qs = parse_orders(&a.q)?;
    let ch = ChannelSpec::from_json(&text)
        .and_then(|s| s.build())
        .map_err(|e| Failure::Input(format!("{}: {e}", a.spec.display())))?;
    let report = analyze(&ch, &qs, a.bits)?;
    emit(&format!("{}\n", report.to_json()))?;
    if report.all_bounds_satisfied() {
        Ok(())
    } else {
        Err(Failure::Violation("some bounds are violated".into()))
    }
}

fn cmd_scan(a: ScanArgs, threads: usize) -> Result<(), Failure> {
    let cfg = ScanConfig {
        mode: a.mode.parse()?,
        n_samples: a.n,
        dim: a.dim,
        q: a.q.parse()?,
        ensemble: Ensemble::parse(&a.ensemble, a.env_dim, a.mix)?,
        seed: a.seed,
        format: a.format.parse()?,
    };
    cfg.validate()?;
    if let Some(script) = &a.gnuplot {
        let data = match (&a.out, cfg.format) {
            (Some(out), OutputFormat::Csv) => out,
            _ => {
                return Err(Failure::Input(
                    "--gnuplot needs --out with --format csv".into(),
                ))
            }
        };
        write_output(
            Some(script),
            &gnuplot_script(cfg.mode, &data.display().to_string()),
        )?;
    }
    let rows = run_scan(&cfg, threads)?;
    write_output(a.out.as_deref(), &render_scan(&cfg, &rows))?;
    let bad = rows.iter().filter(|r| !r.bounds_satisfied()).count();
    if bad == 0 {
        Ok(())
    } else {
        let first = rows
            .iter()
            .find(|r| !r.bounds_satisfied())
            .map_or(0, |r| r.seed_index);
        Err(Failure::Violation(format!(
            "{bad} of {} rows violate a bound (first at seed_index {first})",
            rows.len()
        )))
    }
}

fn cmd_curve(a: CurveArgs) -> Result<(), Failure> {
    let curve: Curve = a.name.parse()?;
    let q: Order = a.q.parse()?;
    let points = curve_points(curve, a.grid, q)?;
    write_output(a.out.as_deref(), &curve_to_csv(&points))
}

fn cmd_verify(a: VerifyArgs, threads: usize) -> Result<(), Failure> {
    let suites = Suite::parse_selection(&a.suite)?;
    if a.n == 0 {
        return Err(Failure::Input("--n must be at least 1".into()));
    }
    let mut failed = Vec::new();
    for suite in suites {
        let summary = run_suite(suite, a.n, a.seed, a.inject_invalid, threads)?;
        emit(&summary.render())?;
        if !summary.passed() {
            failed.push(suite.name());
        }
    }
    if failed.is_empty() {
        emit("all invariants hold\n")?;
        Ok(())
    } else {
        Err(Failure::Violation(format!(
            "violations in: {}",
            failed.join(", ")
        )))
    }
}
