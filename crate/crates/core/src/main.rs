use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use htsr::correlation::{
    correlate_groups, fixture_points, join_reports, read_accuracies, CorrelationResult, Metric,
    MetricPoint,
};
use htsr::fixtures::fixture;
use htsr::io::write_csv;
use htsr::lab::{run_and_write, Experiment, ExperimentSettings, DEFAULT_N_GRID};
use htsr::report::{analyze_path, read_report, write_report};
use htsr::tensor_store::DEFAULT_MIN_MATRIX_DIM;
use htsr::{AnalysisConfig, DenominatorMode, ModelReport};

#[derive(Parser)]
#[command(name = "htsr", version, about = "Heavy-tailed spectral capacity metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a weight bundle and write a JSON report.
    Analyze(AnalyzeArgs),
    /// Run a heavy-tailed random-matrix experiment and write CSVs.
    Synth(SynthArgs),
    /// Correlate a metric with top-1 accuracy.
    Correlate(CorrelateArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    bundle: PathBuf,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_MATRIX_DIM)]
    min_dim: usize,
    #[arg(long, default_value_t = htsr::powerlaw::DEFAULT_MIN_TAIL_COUNT)]
    min_tail: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::PerMatrix)]
    alpha_hat_mode: ModeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    PerMatrix,
    PerLayer,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    AlphaMu,
    Scaling,
    PlNorm,
    Derivation,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    experiment: ExperimentArg,
    /// Tail exponents, comma separated.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_mu)]
    mu: Vec<f64>,
    /// Matrix sizes N, comma separated. Defaults to 200..3200 for scaling
    /// and pl-norm, 1000 otherwise.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, default_value_t = htsr::lab::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Aspect ratio Q = N / M.
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    w0: f64,
    #[arg(long, default_value_t = htsr::powerlaw::DEFAULT_MIN_TAIL_COUNT)]
    min_tail: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Built-in table of published values for a family, or `all`.
    #[arg(long, conflicts_with = "reports", required_unless_present = "reports")]
    fixtures: Option<String>,
    /// Directory of report JSON files.
    #[arg(long, requires = "accuracies")]
    reports: Option<PathBuf>,
    /// CSV with header `model,architecture_group,top1_accuracy`.
    #[arg(long)]
    accuracies: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MetricArg::AlphaHat)]
    metric: MetricArg,
    /// Write the results as CSV here as well as printing them.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    AlphaHat,
    LogNorm,
}

fn parse_mu(s: &str) -> Result<f64, String> {
    let mu: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if mu.is_finite() && mu > 0.0 {
        Ok(mu)
    } else {
        Err(format!("mu must be positive and finite, got {s}"))
    }
}

/// Failure split by exit code: 1 for bad input, 2 for anything internal.
enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl From<htsr::Error> for Failure {
    fn from(e: htsr::Error) -> Self {
        if e.is_input() {
            Failure::Input(e.into())
        } else {
            Failure::Internal(e.into())
        }
    }
}

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Input(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Synth(args) => synth(args),
        Command::Correlate(args) => correlate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let config = AnalysisConfig {
        min_dim: args.min_dim,
        min_tail_count: args.min_tail,
        denominator_mode: match args.alpha_hat_mode {
            ModeArg::PerMatrix => DenominatorMode::PerMatrix,
            ModeArg::PerLayer => DenominatorMode::PerLayer,
        },
    };
    let report = analyze_path(&args.bundle, &config)?;
    write_report(&args.out, &report)?;
    let fmt = |v: Option<f64>| v.map_or("undefined".to_string(), |v| format!("{v:.4}"));
    println!(
        "{}: {} matrices analyzed, {} included, {} skipped; alpha_hat = {}, <log10 ||W||_F> = {}",
        report.model_name,
        report.layers.len(),
        report.summary.n_matrices,
        report.skipped.len(),
        fmt(report.summary.alpha_hat),
        fmt(report.summary.avg_log_frobenius),
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let experiment = match args.experiment {
        ExperimentArg::AlphaMu => Experiment::AlphaMu,
        ExperimentArg::Scaling => Experiment::Scaling,
        ExperimentArg::PlNorm => Experiment::PlNorm,
        ExperimentArg::Derivation => Experiment::Derivation,
    };
    let n_grid = if !args.n.is_empty() {
        args.n
    } else if matches!(experiment, Experiment::Scaling | Experiment::PlNorm) {
        DEFAULT_N_GRID.to_vec()
    } else {
        vec![1000]
    };
    let settings = ExperimentSettings {
        trials: args.trials,
        seed: args.seed,
        aspect_ratio: args.q,
        w0: args.w0,
        min_tail_count: args.min_tail,
    };
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))
        .map_err(input)?;
    for path in run_and_write(experiment, &args.mu, &n_grid, &settings, &args.out_dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn correlate(args: CorrelateArgs) -> Result<(), Failure> {
    let metric = match args.metric {
        MetricArg::AlphaHat => Metric::AlphaHat,
        MetricArg::LogNorm => Metric::LogNorm,
    };
    let points: Vec<MetricPoint> = if let Some(family) = &args.fixtures {
        if args.accuracies.is_some() {
            eprintln!("note: --accuracies is ignored with --fixtures; the tables carry their own");
        }
        if metric != Metric::AlphaHat {
            return Err(input(anyhow::anyhow!(
                "the built-in tables only carry alpha-hat values"
            )));
        }
        let records = fixture(family);
        if records.is_empty() {
            return Err(input(anyhow::anyhow!(
                "no built-in table for {family:?}; try one of: all, {}",
                htsr::fixtures::families().join(", ")
            )));
        }
        fixture_points(&records)
    } else {
        let dir = args.reports.as_deref().expect("clap enforces --reports");
        let accuracies_path = args.accuracies.as_deref().expect("clap enforces --accuracies");
        let reports = read_reports(dir)?;
        let accuracies = read_accuracies(accuracies_path)?;
        let join = join_reports(&reports, &accuracies, metric)?;
        if !join.unmatched.is_empty() {
            println!("unmatched (no report): {}", join.unmatched.join(", "));
        }
        if !join.missing_metric.is_empty() {
            println!("no {metric} value: {}", join.missing_metric.join(", "));
        }
        join.points
    };
    let results = correlate_groups(metric, &points);
    print_results(&results);
    if let Some(out) = &args.out {
        write_csv(out, &results)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn read_reports(dir: &Path) -> Result<Vec<ModelReport>, Failure> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))
        .map_err(input)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    let mut reports = Vec::with_capacity(paths.len());
    for path in paths {
        reports.push(read_report(&path)?);
    }
    Ok(reports)
}

fn print_results(results: &[CorrelationResult]) {
    let fmt = |v: Option<f64>| v.map_or("undef".to_string(), |v| format!("{v:+.4}"));
    println!(
        "{:<16} {:>4} {:>9} {:>9} {:>9} {:>9}",
        "group", "n", "spearman", "kendall", "pearson", "slope"
    );
    for r in results {
        println!(
            "{:<16} {:>4} {:>9} {:>9} {:>9} {:>9}{}",
            r.group,
            r.n_models,
            fmt(r.spearman_rho),
            fmt(r.kendall_tau),
            fmt(r.pearson_r),
            fmt(r.slope),
            r.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default(),
        );
    }
}
