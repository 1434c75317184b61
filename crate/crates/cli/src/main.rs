//! `spdmeans`: compute means and distances of positive definite matrices, run
//! the verification suites and search for counterexamples.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 solver non-convergence
//! (`compute`), 3 asserted violation (`verify`).

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use spdmeans::majorization::DEFAULT_BAND;
use spdmeans::means::{MeanKind, MeanProblem, MeanValue, SolverConfig, SolverResult};
use spdmeans::metrics::MetricId;
use spdmeans::spd::{RandomEnsembleConfig, ScalarField, SpdMatrix};
use spdmeans::verify::{run_suite, search_counterexamples, CheckResult, Provenance, Report, SearchTarget, Suite, REVERIFY_FACTOR};

const VERSION: &str = env!("SPDMEANS_VERSION");

#[derive(Parser)]
#[command(name = "spdmeans", version = VERSION, about = "Means, metrics and inequality checks for positive definite matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a mean of the matrices in a problem file
    Compute(ComputeArgs),
    /// Distance between two matrices
    Distance(DistanceArgs),
    /// Run a verification suite on a seeded random ensemble
    Verify(VerifyArgs),
    /// Search a seeded random ensemble for counterexamples
    Search(SearchArgs),
    /// Summarize a report written by `verify`
    Report(ReportArgs),
}

#[derive(Args)]
struct SolverArgs {
    /// Relative residual at which iterative solvers stop
    #[arg(long, default_value_t = 1e-12)]
    residual_tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> anyhow::Result<SolverConfig> {
        let cfg = SolverConfig { residual_tol: self.residual_tol, max_iter: self.max_iter, ..SolverConfig::default() };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ComputeArgs {
    /// arithmetic, harmonic, log-euclidean, power, cartan, wasserstein or lim-palfia
    #[arg(long)]
    mean: String,
    /// Exponent of the power mean or parameter of the Lim–Palfia mean
    #[arg(long)]
    param: Option<f64>,
    /// JSON file holding `{"weights": [...], "matrices": [...]}`
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct DistanceArgs {
    /// bures-wasserstein, cartan, log-euclidean or hellinger
    #[arg(long)]
    metric: String,
    /// JSON file holding `{"a": .., "b": ..}`, a two-matrix problem or a list of two matrices
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Field {
    Real,
    Complex,
}

#[derive(Args)]
struct EnsembleArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Matrix dimension
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Number of matrices per instance
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Condition number bound `HIGH` or range `LOW,HIGH`
    #[arg(long, value_delimiter = ',', num_args = 1..=2, default_values_t = [1.0, 1e4])]
    cond: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Field::Complex)]
    field: Field,
    /// Draw all matrices of an instance in a shared eigenbasis
    #[arg(long)]
    commuting: bool,
    #[arg(long)]
    seed: u64,
    /// Width of the indeterminate band around zero margins
    #[arg(long, default_value_t = DEFAULT_BAND)]
    band: f64,
    /// Worker threads; defaults to one per core
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
}

impl EnsembleArgs {
    fn ensemble(&self) -> anyhow::Result<RandomEnsembleConfig> {
        let cond_range = match self.cond.as_slice() {
            [high] => [1.0, *high],
            [low, high] => [*low, *high],
            _ => bail!("--cond takes one or two values"),
        };
        let field = match self.field {
            Field::Real => ScalarField::Real,
            Field::Complex => ScalarField::Complex,
        };
        let ensemble = RandomEnsembleConfig::new(self.n, self.m, cond_range, field, self.seed).commuting(self.commuting);
        ensemble.validate()?;
        Ok(ensemble)
    }

    fn provenance(&self, cfg: &SolverConfig) -> Provenance {
        Provenance {
            version: VERSION.to_string(),
            residual_tol: cfg.residual_tol,
            max_iter: cfg.max_iter,
            band: self.band,
            reverify_factor: REVERIFY_FACTOR,
        }
    }

    fn in_pool<T: Send>(&self, job: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
        match self.threads {
            Some(threads) => {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
                Ok(pool.install(job))
            }
            None => Ok(job()),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct VerifyArgs {
    /// theorem1, theorem2, proposition5, limits, remarks, all, or a comma list of check ids
    #[arg(long)]
    suite: String,
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// `json` writes the report, `csv` the per-trial margins
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    target: String,
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Report JSON written by `verify`
    input: PathBuf,
}

#[derive(Serialize)]
struct ComputeOutput<'a> {
    mean: MeanKind,
    #[serde(flatten)]
    value: ComputeValue<'a>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum ComputeValue<'a> {
    Closed { value: &'a SpdMatrix },
    Iterative(&'a SolverResult),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PairInput {
    Named { a: SpdMatrix, b: SpdMatrix },
    Problem { matrices: Vec<SpdMatrix> },
    List(Vec<SpdMatrix>),
}

#[derive(Serialize)]
struct Findings {
    target: &'static str,
    ensemble: RandomEnsembleConfig,
    trials: usize,
    provenance: Provenance,
    hits: Vec<CheckResult>,
}

enum Outcome {
    Success,
    NoConvergence,
    AssertedViolation,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file)).with_context(|| format!("cannot parse {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn compute(args: &ComputeArgs) -> anyhow::Result<Outcome> {
    let kind = MeanKind::parse(&args.mean, args.param)?;
    let cfg = args.solver.config()?;
    let problem: MeanProblem = read_json(&args.input)?;
    let mean = kind.compute(&problem, &cfg)?;
    let value = match &mean {
        MeanValue::Closed(x) => ComputeValue::Closed { value: x },
        MeanValue::Iterative(r) => ComputeValue::Iterative(r),
    };
    emit(args.output.as_deref(), &serde_json::to_string_pretty(&ComputeOutput { mean: kind, value })?)?;
    if let MeanValue::Iterative(r) = &mean {
        if !r.converged {
            eprintln!("no convergence after {} iterations (residual {:.3e})", r.iterations, r.residual);
            return Ok(Outcome::NoConvergence);
        }
    }
    Ok(Outcome::Success)
}

fn distance(args: &DistanceArgs) -> anyhow::Result<Outcome> {
    let metric = MetricId::parse(&args.metric)?;
    let (a, b) = match read_json::<PairInput>(&args.input)? {
        PairInput::Named { a, b } => (a, b),
        PairInput::Problem { matrices: v } | PairInput::List(v) => match <[SpdMatrix; 2]>::try_from(v) {
            Ok([a, b]) => (a, b),
            Err(v) => bail!("expected two matrices, found {}", v.len()),
        },
    };
    let d = metric.distance(&a, &b)?;
    emit(args.output.as_deref(), &serde_json::to_string_pretty(&d)?)?;
    Ok(Outcome::Success)
}

fn verify(args: &VerifyArgs) -> anyhow::Result<Outcome> {
    let suite = Suite::parse(&args.suite)?;
    let ensemble = args.ensemble.ensemble()?;
    let cfg = args.ensemble.solver.config()?;
    let trials = args.ensemble.trials;
    let band = args.ensemble.band;
    let report = args.ensemble.in_pool(|| run_suite(&suite, &ensemble, trials, &cfg, band, VERSION))??;
    let text = match args.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.margins_csv()?,
    };
    emit(args.output.as_deref(), &text)?;
    eprintln!(
        "{}: {} trials, {} asserted violations, {} violations listed ({:.1} s)",
        report.suite,
        report.trials,
        report.asserted_violations,
        report.violations.len(),
        report.wall_clock_seconds
    );
    Ok(if report.asserted_violations > 0 { Outcome::AssertedViolation } else { Outcome::Success })
}

fn search(args: &SearchArgs) -> anyhow::Result<Outcome> {
    let target = SearchTarget::parse(&args.target)?;
    let ensemble = args.ensemble.ensemble()?;
    let cfg = args.ensemble.solver.config()?;
    let trials = args.ensemble.trials;
    let band = args.ensemble.band;
    let hits = args.ensemble.in_pool(|| search_counterexamples(target, &ensemble, trials, &cfg, band))??;
    eprintln!("{}: {} re-verified hits in {} trials", target.name(), hits.len(), trials);
    let findings = Findings { target: target.name(), ensemble, trials, provenance: args.ensemble.provenance(&cfg), hits };
    emit(args.output.as_deref(), &serde_json::to_string_pretty(&findings)?)?;
    Ok(Outcome::Success)
}

fn fmt_margin(m: Option<f64>) -> String {
    m.map_or_else(|| "-".to_string(), |m| format!("{m:.3e}"))
}

fn report(args: &ReportArgs) -> anyhow::Result<Outcome> {
    let report: Report = read_json(&args.input)?;
    let mut out = format!(
        "suite {} | {} trials | seed {} | n {} m {} | version {}\n",
        report.suite, report.trials, report.seed, report.ensemble.n, report.ensemble.m, report.provenance.version
    );
    out.push_str(&format!("{:<24} {:>7} {:>8} {:>13} {:>12}\n", "check", "holds", "violated", "indeterminate", "worst"));
    for r in &report.results {
        let c = &r.status_counts;
        out.push_str(&format!(
            "{:<24} {:>7} {:>8} {:>13} {:>12}{}\n",
            r.check_id.name(),
            c.holds,
            c.violated,
            c.indeterminate,
            fmt_margin(r.worst_margin),
            if r.exploratory { "  (exploratory)" } else { "" }
        ));
    }
    out.push_str(&format!("asserted violations: {}\n", report.asserted_violations));
    emit(None, &out)?;
    Ok(Outcome::Success)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Compute(a) => compute(a),
        Command::Distance(a) => distance(a),
        Command::Verify(a) => verify(a),
        Command::Search(a) => search(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::NoConvergence) => ExitCode::from(2),
        Ok(Outcome::AssertedViolation) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
