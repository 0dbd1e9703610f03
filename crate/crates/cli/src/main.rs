use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rcv_core::{
    ci_ratio_two_sample, compute_interval, emit_results, if_curve, rasd, read_sample_csv, run_coverage_with_progress,
    true_measures, Combine, DistributionSpec, IntervalOptions, Measure, Method, OutputFormat, RcvError,
    SimulationConfig, DEFAULT_BOOT_B, DEFAULT_LEVEL,
};

/// Full-scale trial count used by `simulate --full`.
const FULL_TRIALS: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "rcv", version, about = "Robust coefficients of variation: estimates, intervals and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Point estimate and confidence interval for one sample (JSON on stdout).
    Estimate(EstimateArgs),
    /// Ratio interval comparing the dispersion of two samples (JSON on stdout).
    Compare(CompareArgs),
    /// Population measures and relative asymptotic SDs (CSV on stdout).
    Truth(TruthArgs),
    /// Monte-Carlo coverage study driven by a TOML or JSON config.
    Simulate(SimulateArgs),
    /// Influence curves of CV, RCV_Q and RCV_M (CSV on stdout).
    Ifcurve(IfcurveArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Treat the first row of each input as a header.
    #[arg(long)]
    header: bool,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// One-column CSV of observations.
    #[arg(long)]
    input: PathBuf,
    /// cv, rcvq or rcvm.
    #[arg(long, value_parser = parse_with::<Measure>)]
    measure: Measure,
    /// Interval method, e.g. gulhar, inverse, asymptotic, boot-np, boot-param.
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = DEFAULT_BOOT_B)]
    boot_b: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    input_opts: InputArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    input1: PathBuf,
    #[arg(long)]
    input2: PathBuf,
    #[arg(long, value_parser = parse_with::<Measure>)]
    measure: Measure,
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    /// How the two standard errors are combined: linear-sum or quadrature.
    #[arg(long, default_value = "linear-sum", value_parser = parse_with::<Combine>)]
    combine: Combine,
    #[command(flatten)]
    input_opts: InputArgs,
}

#[derive(Debug, Args)]
struct TruthArgs {
    /// Distribution, e.g. "exp(1)" or "normal(5,1)". Repeatable.
    #[arg(long = "dist", required = true, value_parser = parse_with::<DistributionSpec>)]
    dists: Vec<DistributionSpec>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Simulation config (TOML, or JSON when the extension is .json).
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = parse_with::<OutputFormat>)]
    format: OutputFormat,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "RCV_WORKERS")]
    workers: Option<usize>,
    /// Run the full-scale 10000 trials regardless of the config.
    #[arg(long)]
    full: bool,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct IfcurveArgs {
    #[arg(long, value_parser = parse_with::<DistributionSpec>)]
    dist: DistributionSpec,
    #[arg(long, default_value_t = 401)]
    points: usize,
}

fn parse_with<T>(s: &str) -> Result<T, String>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rcv: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 3 })
        }
    }
}

fn run(command: Command) -> rcv_core::Result<()> {
    match command {
        Command::Estimate(a) => estimate(a),
        Command::Compare(a) => compare(a),
        Command::Truth(a) => truth(a),
        Command::Simulate(a) => simulate(a),
        Command::Ifcurve(a) => ifcurve(a),
    }
}

fn default_method(measure: Measure) -> Method {
    match measure {
        Measure::Cv => Method::Gulhar,
        Measure::RcvQ => Method::RcvQ,
        Measure::RcvM => Method::RcvMAsymptotic,
    }
}

fn estimate(a: EstimateArgs) -> rcv_core::Result<()> {
    let sample = read_sample_csv(&a.input, a.input_opts.header)?;
    let method = match &a.method {
        Some(name) => Method::resolve(a.measure, name)?,
        None => default_method(a.measure),
    };
    let opts = IntervalOptions {
        level: a.level,
        boot_b: a.boot_b,
        seed: a.seed,
    };
    let ci = compute_interval(&sample, method, &opts)?;
    write_json(&ci)
}

fn compare(a: CompareArgs) -> rcv_core::Result<()> {
    let s1 = read_sample_csv(&a.input1, a.input_opts.header)?;
    let s2 = read_sample_csv(&a.input2, a.input_opts.header)?;
    let ci = ci_ratio_two_sample(&s1, &s2, a.measure, a.level, a.combine)?;
    write_json(&ci)
}

fn write_json<T: serde::Serialize>(value: &T) -> rcv_core::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| RcvError::Io(e.to_string()))?;
    text.push('\n');
    io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn truth(a: TruthArgs) -> rcv_core::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| RcvError::Io(e.to_string());
    w.write_record([
        "distribution",
        "cv",
        "rcv_q",
        "rcv_m",
        "rasd_cv",
        "rasd_rcv_q",
        "rasd_rcv_m",
        "median",
        "iqr",
        "mad",
    ])
    .map_err(csv_err)?;
    for spec in &a.dists {
        let t = true_measures(spec)?;
        let row = [
            spec.to_string(),
            opt_cell(t.cv),
            t.rcv_q.to_string(),
            t.rcv_m.to_string(),
            opt_cell(rasd(Measure::Cv, spec)?),
            opt_cell(rasd(Measure::RcvQ, spec)?),
            opt_cell(rasd(Measure::RcvM, spec)?),
            t.median.to_string(),
            t.iqr.to_string(),
            t.mad.to_string(),
        ];
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| RcvError::Io(e.to_string()))?;
    io::stdout().write_all(&bytes)?;
    Ok(())
}

fn load_config(path: &Path) -> rcv_core::Result<SimulationConfig> {
    let text = fs::read_to_string(path).map_err(|e| RcvError::Io(format!("{}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
    let config: SimulationConfig = if is_json {
        serde_json::from_str(&text).map_err(|e| RcvError::Parameter(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| RcvError::Parameter(format!("{}: {e}", path.display())))?
    };
    config.validate()?;
    Ok(config)
}

fn simulate(a: SimulateArgs) -> rcv_core::Result<()> {
    let mut config = load_config(&a.config)?;
    if a.full {
        config.trials = FULL_TRIALS;
    }
    if let Some(seed) = a.seed {
        config.base_seed = seed;
    }
    let rows = run_coverage_with_progress(&config, a.workers, |done, total, cell| {
        eprintln!("[{done}/{total}] {cell}");
    })?;
    let bytes = emit_results(&rows, a.format)?;
    match &a.out {
        Some(path) => fs::write(path, bytes).map_err(|e| RcvError::Io(format!("{}: {e}", path.display())))?,
        None => io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

fn ifcurve(a: IfcurveArgs) -> rcv_core::Result<()> {
    let points = if_curve(&a.dist, a.points)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| RcvError::Io(e.to_string());
    w.write_record(["x", "if_cv", "if_rcv_q", "if_rcv_m"]).map_err(csv_err)?;
    for p in points {
        w.write_record([p.x.to_string(), opt_cell(p.if_cv), p.if_rcv_q.to_string(), p.if_rcv_m.to_string()])
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| RcvError::Io(e.to_string()))?;
    io::stdout().write_all(&bytes)?;
    Ok(())
}
