//! `gibbs`: EPPF tables, random partitions and verification runs.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 numerical failure.

mod model;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gibbs_partitions::combinatorics::partition_shapes;
use gibbs_partitions::eppf::{Eppf, VTableDocument};
use gibbs_partitions::samplers::{crp_sample, fisher_sample, gibbs_predictive_sample, shape_histogram, RandomSource};
use gibbs_partitions::verification::{run_gibbs_suite, run_tilting_suite, verify_model, CheckReport, GibbsSuiteConfig, TiltingSuiteConfig};
use gibbs_partitions::Error;

use model::{ModelArgs, ModelKind, Resolved};
use output::{EppfRow, Format, HistogramRow, SampleRow, Sink};

#[derive(Debug, Parser)]
#[command(name = "gibbs", version, about = "Gibbs-type exchangeable random partitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probability of every partition shape of n.
    Eppf(EppfArgs),
    /// Draw random partitions of [n].
    Sample(SampleArgs),
    /// Run verification suites, or check a single model or table.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct EppfArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print shape counts instead of the partitions.
    #[arg(long)]
    histogram: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Tilting,
    Gibbs,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Suite to run when no model or table is given.
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    /// Largest n checked.
    #[arg(long)]
    n: Option<usize>,
    /// Monte Carlo draws per sampler check.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the model's V-table as JSON.
    #[arg(long)]
    table_out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {0} check(s) did not pass")]
    Verification(usize),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Quadrature(_)
            | Error::ToleranceExceeded { .. }
            | Error::NegativePredictive { .. }
            | Error::InfiniteExponent(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eppf(a) => cmd_eppf(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gibbs: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn write_table(resolved: &Resolved, path: &Option<PathBuf>) -> Result<(), CliError> {
    if let Some(path) = path {
        let json = VTableDocument::from_model(resolved.model()).to_json()?;
        std::fs::write(path, json)?;
    }
    Ok(())
}

fn cmd_eppf(args: EppfArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let resolved = args.model.resolve(args.n + 1)?;
    let model = resolved.model();
    let mut rows = Vec::new();
    let mut total = 0.0;
    for shape in partition_shapes(args.n) {
        let ln_p = model.ln_eppf(&shape)?;
        let multiplicity = shape.set_partition_count();
        total += multiplicity * ln_p.exp();
        rows.push(EppfRow {
            shape: shape.to_string(),
            blocks: shape.k(),
            multiplicity,
            probability: ln_p.exp(),
            log_probability: ln_p,
        });
    }
    let mut sink = Sink::open(&args.out.output)?;
    output::write_eppf(&mut sink, args.out.format, &resolved, args.n, total, &rows)?;
    write_table(&resolved, &args.out.table_out)?;
    let tol = resolved.tolerance();
    if !((total - 1.0).abs() <= tol) {
        return Err(CliError::Numerical(format!(
            "probabilities sum to {total} (tolerance {tol:e})"
        )));
    }
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let resolved = args.model.resolve(args.n)?;
    let mut src = RandomSource::new(args.seed);
    let mut draw = |r: &mut RandomSource| match resolved.kind() {
        Some(ModelKind::Pd) => crp_sample(resolved.alpha(), resolved.theta(), args.n, r),
        Some(ModelKind::Fisher) => fisher_sample(resolved.alpha(), resolved.atoms(), args.n, r),
        _ => gibbs_predictive_sample(resolved.model(), args.n, r),
    };
    let mut sink = Sink::open(&args.out.output)?;
    if args.histogram {
        let hist = shape_histogram(args.count, &mut src, &mut draw)?;
        let mut rows = Vec::new();
        for shape in partition_shapes(args.n) {
            let count = hist.get(&shape).copied().unwrap_or(0);
            let expected = resolved.model().eppf(&shape)? * shape.set_partition_count();
            rows.push(HistogramRow {
                shape: shape.to_string(),
                count,
                frequency: count as f64 / args.count.max(1) as f64,
                expected,
            });
        }
        output::write_histogram(&mut sink, args.out.format, &rows)?;
    } else {
        let mut rows = Vec::with_capacity(args.count.min(1 << 20));
        for index in 0..args.count {
            let p = draw(&mut src)?;
            rows.push(SampleRow {
                index,
                partition: p.to_string(),
                shape: p.shape().to_string(),
            });
        }
        output::write_samples(&mut sink, args.out.format, &rows)?;
    }
    write_table(&resolved, &args.out.table_out)
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let report = if args.model.is_specified() {
        let n = args.n.unwrap_or(8);
        let resolved = args.model.resolve(n + 1)?;
        let depth = n.min(resolved.model().max_n().saturating_sub(1)).max(1);
        verify_model(resolved.model(), depth)?
    } else {
        let mut report = CheckReport::default();
        if matches!(args.suite, Suite::Tilting | Suite::All) {
            let mut config = TiltingSuiteConfig::default();
            if let Some(n) = args.n {
                config.max_n = n;
            }
            report.merge(run_tilting_suite(&config));
        }
        if matches!(args.suite, Suite::Gibbs | Suite::All) {
            let mut config = GibbsSuiteConfig::default();
            if let Some(n) = args.n {
                config.max_n = n;
            }
            if let Some(c) = args.count {
                config.samples = c;
            }
            if let Some(s) = args.seed {
                config.seed = s;
            }
            report.merge(run_gibbs_suite(&config));
        }
        report
    };
    eprint!("{}", report.to_text());
    let mut sink = Sink::open(&args.output)?;
    match args.format {
        ReportFormat::Json => sink.write_line(&report.to_json()?)?,
        ReportFormat::Text => sink.write_str(&report.to_text())?,
    }
    match report.failures().count() {
        0 => Ok(()),
        n => Err(CliError::Verification(n)),
    }
}
