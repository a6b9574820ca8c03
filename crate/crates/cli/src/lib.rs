//! `glasso` command-line harness: generate synthetic problems, solve one
//! problem, or benchmark solvers over seeds.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use glasso_core::io::{self, format_f64};
use glasso_core::problems::{empirical_cov, sample_mvn, standardize};
use glasso_core::{
    solve_gista, solve_pista, GenError, GraphKind, GroundTruth, IoError, MatrixFormat, Problem,
    ProblemDescriptor, ProblemError, RunRecord, RunSummary, SolveError, SolveResult, SolverConfig,
    SymMatrix,
};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub const DEFAULT_SAMPLE_RATIO: f64 = 0.03;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        match e {
            GenError::ZeroVariance { .. } | GenError::NoSamples => CliError::Input(e.to_string()),
            GenError::TooSmall { .. } | GenError::InvalidDensity(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        match e {
            ProblemError::InvalidAlpha(_) => CliError::Usage(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            SolveError::NonPositiveDiagonal { .. } | SolveError::DimensionMismatch { .. } => {
                CliError::Input(e.to_string())
            }
            SolveError::InitialNotPositiveDefinite => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
pub enum SolverKind {
    Pista,
    Gista,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Pista => "pista",
            SolverKind::Gista => "gista",
        }
    }

    pub fn solve(self, prob: &Problem, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
        match self {
            SolverKind::Pista => solve_pista(prob, None, cfg),
            SolverKind::Gista => solve_gista(prob, None, cfg),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Chain,
    Random,
    Planar,
}

impl From<KindArg> for GraphKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Chain => GraphKind::Chain,
            KindArg::Random => GraphKind::Random,
            KindArg::Planar => GraphKind::Planar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Mtx,
}

#[derive(Debug, Parser)]
#[command(name = "glasso", version, about = "Sparse inverse covariance estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a ground-truth precision, samples and their empirical covariance.
    Generate(GenerateArgs),
    /// Solve one problem from a covariance or sample file.
    Solve(SolveArgs),
    /// Run every (kind, alpha, solver, seed) cell and aggregate over seeds.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = SolverConfig::default().max_iter)]
    pub max_iter: usize,
    #[arg(long, default_value_t = SolverConfig::default().stop_rel)]
    pub stop_rel: f64,
    /// Run every kernel on one thread.
    #[arg(long)]
    pub sequential: bool,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            max_iter: self.max_iter,
            stop_rel: self.stop_rel,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of samples; defaults to `ceil(sample_ratio·n)`.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATIO)]
    pub sample_ratio: f64,
    /// Output prefix; files are `{out}_precision.mtx`, `{out}_samples.csv`
    /// and `{out}_cov.mtx`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Covariance matrix (`.mtx` is Matrix Market, otherwise dense CSV).
    #[arg(long, conflicts_with = "samples")]
    pub cov: Option<PathBuf>,
    /// Samples CSV, one sample per row.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Override the covariance format detected from the extension.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = SolverKind::Pista)]
    pub solver: SolverKind,
    /// Rescale the covariance to unit diagonal.
    #[arg(long)]
    pub standardize: bool,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    /// Output prefix; files are `{out}_estimate.mtx`, `{out}_trace.csv` and
    /// `{out}_result.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long = "kind", value_enum, value_delimiter = ',', default_value = "chain")]
    pub kinds: Vec<KindArg>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_RATIO)]
    pub sample_ratio: f64,
    #[arg(long = "alpha", value_delimiter = ',', required = true)]
    pub alphas: Vec<f64>,
    #[arg(long = "seed", value_delimiter = ',', default_value = "0,1,2,3,4")]
    pub seeds: Vec<u64>,
    #[arg(long = "solver", value_enum, value_delimiter = ',', default_value = "pista,gista")]
    pub solvers: Vec<SolverKind>,
    /// Rescale each empirical covariance to unit diagonal.
    #[arg(long)]
    pub standardize: bool,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

/// `ceil(ratio·n)`, at least one sample.
pub fn sample_count(n: usize, ratio: f64) -> usize {
    // the small slack keeps e.g. 0.03·1000 from rounding up to 31
    ((ratio * n as f64 - 1e-9).ceil() as usize).max(1)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("{}: {e}", dir.display()))),
        _ => Ok(()),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(&cli) {
        Ok(report) => {
            print!("{report}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => in_pool(args.solver_args.sequential, || cmd_solve(args)),
        Command::Bench(args) => {
            let spec = BenchSpec::from_args(args)?;
            in_pool(args.solver_args.sequential, || {
                cmd_bench(&spec, &args.solver_args.config(), &args.out, !args.solver_args.sequential)
            })
            .map(|report| report.render())
        }
    }
}

/// Runs `f` in a one-thread pool when `sequential`, else on the global pool.
fn in_pool<R: Send>(sequential: bool, f: impl FnOnce() -> R + Send) -> R {
    if sequential {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool")
            .install(f)
    } else {
        f()
    }
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<String, CliError> {
    if !(args.sample_ratio > 0.0) {
        return Err(CliError::Usage("--sample-ratio must be positive".into()));
    }
    let m = args.m.unwrap_or_else(|| sample_count(args.n, args.sample_ratio));
    let truth = GroundTruth::generate(args.kind.into(), args.n, args.seed)?;
    let samples = sample_mvn(&truth.precision, m, args.seed)?;
    let cov = empirical_cov(&samples)?;

    ensure_parent(&args.out)?;
    let precision_path = with_suffix(&args.out, "_precision.mtx");
    let samples_path = with_suffix(&args.out, "_samples.csv");
    let cov_path = with_suffix(&args.out, "_cov.mtx");
    io::write_matrix_market(&truth.precision, &precision_path)?;
    io::write_samples(&samples, &samples_path)?;
    io::write_matrix_market(&cov, &cov_path)?;

    Ok(format!(
        "shift={}\nprecision={}\nsamples={}\ncov={}\n",
        format_f64(truth.shift),
        precision_path.display(),
        samples_path.display(),
        cov_path.display()
    ))
}

/// `solver iter=K time=T f=F nnz=Z subgrad_l1=G`.
pub fn summary_line(solver: SolverKind, summary: &RunSummary) -> String {
    format!(
        "{} iter={} time={:.6} f={} nnz={} subgrad_l1={}",
        solver,
        summary.iterations,
        summary.wall_seconds,
        format_f64(summary.f_total),
        summary.nnz,
        format_f64(summary.min_subgrad_l1)
    )
}

/// Runs one solve and writes `{prefix}_estimate.mtx`, `{prefix}_trace.csv`
/// and `{prefix}_result.json`. Timing covers the solve call only.
fn solve_and_write(
    prob: &Problem,
    descriptor: ProblemDescriptor,
    solver: SolverKind,
    cfg: &SolverConfig,
    prefix: &Path,
) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let result = solver.solve(prob, cfg)?;
    let summary = RunSummary::from_result(&result, start.elapsed().as_secs_f64());

    ensure_parent(prefix)?;
    io::write_matrix_market(&result.estimate, &with_suffix(prefix, "_estimate.mtx"))?;
    io::write_trace(&result.traces, &with_suffix(prefix, "_trace.csv"))?;
    let record = RunRecord::new(descriptor, solver.name(), cfg.clone(), summary.clone());
    io::write_result(&record, &with_suffix(prefix, "_result.json"))
        .map_err(|e| match e {
            IoError::Serialization(msg) => CliError::Numerical(msg),
            other => other.into(),
        })?;
    Ok(summary)
}

pub fn cmd_solve(args: &SolveArgs) -> Result<String, CliError> {
    let (s, m): (SymMatrix, Option<usize>) = match (&args.cov, &args.samples) {
        (Some(path), None) => {
            let format = match args.format {
                Some(FormatArg::Csv) => MatrixFormat::DenseCsv,
                Some(FormatArg::Mtx) => MatrixFormat::MatrixMarket,
                None => MatrixFormat::from_path(path),
            };
            (io::read_matrix(path, format)?, None)
        }
        (None, Some(path)) => {
            let samples = io::read_samples(path)?;
            (empirical_cov(&samples)?, Some(samples.m))
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --cov or --samples is required".into(),
            ))
        }
    };
    let s = if args.standardize { standardize(&s)? } else { s };
    let cfg = args.solver_args.config();
    cfg.validate()?;
    let prob = Problem::new(s, args.alpha)?;
    let descriptor = ProblemDescriptor {
        kind: None,
        n: prob.n(),
        m,
        alpha: args.alpha,
        seed: None,
        shift: None,
    };
    let summary = solve_and_write(&prob, descriptor, args.solver, &cfg, &args.out)?;
    Ok(format!("{}\n", summary_line(args.solver, &summary)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub kinds: Vec<GraphKind>,
    pub n: usize,
    /// Explicit sample count; overrides `sample_ratio`.
    pub m: Option<usize>,
    pub sample_ratio: f64,
    pub alphas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub solvers: Vec<SolverKind>,
    pub standardize: bool,
}

impl BenchSpec {
    pub fn from_args(args: &BenchArgs) -> Result<Self, CliError> {
        let spec = Self {
            kinds: args.kinds.iter().map(|&k| k.into()).collect(),
            n: args.n,
            m: args.m,
            sample_ratio: args.sample_ratio,
            alphas: args.alphas.clone(),
            seeds: args.seeds.clone(),
            solvers: args.solvers.clone(),
            standardize: args.standardize,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: &str| Err(CliError::Usage(msg.into()));
        if self.kinds.is_empty() {
            return usage("bench needs at least one kind");
        }
        if self.alphas.is_empty() {
            return usage("bench needs at least one alpha");
        }
        if self.seeds.is_empty() {
            return usage("bench needs at least one seed");
        }
        if self.solvers.is_empty() {
            return usage("bench needs at least one solver");
        }
        if !(self.sample_ratio > 0.0) {
            return usage("sample ratio must be positive");
        }
        if self.m == Some(0) {
            return usage("sample count must be positive");
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return usage("alphas must be positive");
        }
        Ok(())
    }

    pub fn sample_count(&self) -> usize {
        self.m.unwrap_or_else(|| sample_count(self.n, self.sample_ratio))
    }
}

/// Outcome of one (kind, alpha, solver, seed) cell.
#[derive(Debug, Clone)]
pub struct BenchRun {
    pub kind: GraphKind,
    pub alpha: f64,
    pub solver: SolverKind,
    pub seed: u64,
    pub outcome: Result<RunSummary, String>,
}

/// Seed average for one (kind, alpha, solver); means are over successful
/// runs and `None` when every run failed.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub kind: GraphKind,
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub solver: SolverKind,
    pub runs: usize,
    pub failures: usize,
    pub converged: usize,
    pub mean_iter: Option<f64>,
    pub mean_nnz: Option<f64>,
    pub mean_subgrad_fro: Option<f64>,
    pub mean_f: Option<f64>,
    pub mean_time_s: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub runs: Vec<BenchRun>,
    pub aggregate_path: PathBuf,
    pub timing_path: PathBuf,
}

pub const AGGREGATE_HEADER: &str =
    "kind,n,m,alpha,solver,runs,failures,converged,mean_iter,mean_nnz,mean_subgrad_fro,mean_f";

pub const TIMING_HEADER: &str = "kind,n,m,alpha,solver,mean_time_s";

fn opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

impl BenchReport {
    /// Seed-averaged results without wall times; byte-identical across
    /// reruns of the same spec.
    pub fn aggregate_csv(&self) -> String {
        let mut out = format!("{AGGREGATE_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.kind,
                r.n,
                r.m,
                format_f64(r.alpha),
                r.solver,
                r.runs,
                r.failures,
                r.converged,
                opt(r.mean_iter),
                opt(r.mean_nnz),
                opt(r.mean_subgrad_fro),
                opt(r.mean_f)
            ));
        }
        out
    }

    pub fn timing_csv(&self) -> String {
        let mut out = format!("{TIMING_HEADER}\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.kind,
                r.n,
                r.m,
                format_f64(r.alpha),
                r.solver,
                opt(r.mean_time_s)
            ));
        }
        out
    }

    /// Human-readable table in the `time (iter)` layout.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<8} {:>6} {:>8} {:<6} {:>22} {:>10} {:>12}\n",
            "kind", "n", "alpha", "solver", "time (iter)", "nnz", "subgrad_fro"
        );
        for r in &self.rows {
            let time_iter = match (r.mean_time_s, r.mean_iter) {
                (Some(t), Some(k)) => format!("{t:.3}s ({k:.1})"),
                _ => "failed".to_string(),
            };
            out.push_str(&format!(
                "{:<8} {:>6} {:>8} {:<6} {:>22} {:>10} {:>12}\n",
                r.kind.as_str(),
                r.n,
                format_f64(r.alpha),
                r.solver.name(),
                time_iter,
                r.mean_nnz.map(|v| format!("{v:.1}")).unwrap_or_default(),
                r.mean_subgrad_fro.map(|v| format!("{v:.3e}")).unwrap_or_default()
            ));
        }
        for run in &self.runs {
            if let Err(e) = &run.outcome {
                out.push_str(&format!(
                    "failed: {} alpha={} {} seed={}: {e}\n",
                    run.kind,
                    format_f64(run.alpha),
                    run.solver,
                    run.seed
                ));
            }
        }
        out.push_str(&format!("aggregate={}\n", self.aggregate_path.display()));
        out
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

fn run_prefix(out_dir: &Path, kind: GraphKind, alpha: f64, solver: SolverKind, seed: u64) -> PathBuf {
    out_dir
        .join("runs")
        .join(format!("{kind}_a{}_{solver}_s{seed}", format_f64(alpha)))
}

/// One ground truth and covariance per (kind, seed), shared by every
/// alpha and solver.
struct BenchProblem {
    kind: GraphKind,
    seed: u64,
    built: Result<(SymMatrix, f64), String>,
}

/// Runs every cell of `spec`, writing per-run artifacts under
/// `out_dir/runs/` plus `aggregate.csv` and `timing.csv`. Cells are
/// independent and run in parallel when `parallel`; rows are sorted by
/// (kind, alpha, solver) either way.
pub fn cmd_bench(
    spec: &BenchSpec,
    cfg: &SolverConfig,
    out_dir: &Path,
    parallel: bool,
) -> Result<BenchReport, CliError> {
    spec.validate()?;
    cfg.validate()?;
    let m = spec.sample_count();
    fs::create_dir_all(out_dir.join("runs"))
        .map_err(|e| CliError::Input(format!("{}: {e}", out_dir.display())))?;

    let build = |&(kind, seed): &(GraphKind, u64)| BenchProblem {
        kind,
        seed,
        built: GroundTruth::generate(kind, spec.n, seed)
            .and_then(|t| {
                let samples = sample_mvn(&t.precision, m, seed)?;
                let cov = empirical_cov(&samples)?;
                let cov = if spec.standardize { standardize(&cov)? } else { cov };
                Ok((cov, t.shift))
            })
            .map_err(|e| e.to_string()),
    };
    let pairs: Vec<(GraphKind, u64)> = spec
        .kinds
        .iter()
        .flat_map(|&k| spec.seeds.iter().map(move |&s| (k, s)))
        .collect();
    let problems: Vec<BenchProblem> = if parallel {
        pairs.par_iter().map(build).collect()
    } else {
        pairs.iter().map(build).collect()
    };

    let cells: Vec<(&BenchProblem, f64, SolverKind)> = problems
        .iter()
        .flat_map(|p| {
            spec.alphas
                .iter()
                .flat_map(move |&a| spec.solvers.iter().map(move |&s| (p, a, s)))
        })
        .collect();
    let run_cell = |&(p, alpha, solver): &(&BenchProblem, f64, SolverKind)| {
        let outcome = p.built.clone().and_then(|(cov, shift)| {
            let prob = Problem::new(cov, alpha).map_err(|e| e.to_string())?;
            let descriptor = ProblemDescriptor {
                kind: Some(p.kind),
                n: spec.n,
                m: Some(m),
                alpha,
                seed: Some(p.seed),
                shift: Some(shift),
            };
            let prefix = run_prefix(out_dir, p.kind, alpha, solver, p.seed);
            solve_and_write(&prob, descriptor, solver, cfg, &prefix).map_err(|e| e.to_string())
        });
        BenchRun {
            kind: p.kind,
            alpha,
            solver,
            seed: p.seed,
            outcome,
        }
    };
    let mut runs: Vec<BenchRun> = if parallel {
        cells.par_iter().map(run_cell).collect()
    } else {
        cells.iter().map(run_cell).collect()
    };
    runs.sort_by(|a, b| {
        (a.kind, a.solver, a.seed)
            .cmp(&(b.kind, b.solver, b.seed))
            .then(a.alpha.total_cmp(&b.alpha))
    });

    let mut keys: Vec<(GraphKind, f64, SolverKind)> = Vec::new();
    for &k in &spec.kinds {
        for &a in &spec.alphas {
            for &s in &spec.solvers {
                if !keys.iter().any(|&(k2, a2, s2)| k2 == k && a2 == a && s2 == s) {
                    keys.push((k, a, s));
                }
            }
        }
    }
    keys.sort_by(|x, y| {
        x.0.cmp(&y.0)
            .then(x.1.total_cmp(&y.1))
            .then(x.2.name().cmp(y.2.name()))
    });

    let rows: Vec<BenchRow> = keys
        .into_iter()
        .map(|(kind, alpha, solver)| {
            let cell: Vec<&BenchRun> = runs
                .iter()
                .filter(|r| r.kind == kind && r.alpha == alpha && r.solver == solver)
                .collect();
            let ok: Vec<&RunSummary> = cell.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            BenchRow {
                kind,
                n: spec.n,
                m,
                alpha,
                solver,
                runs: cell.len(),
                failures: cell.len() - ok.len(),
                converged: ok.iter().filter(|s| s.converged).count(),
                mean_iter: mean(ok.iter().map(|s| s.iterations as f64)),
                mean_nnz: mean(ok.iter().map(|s| s.nnz as f64)),
                mean_subgrad_fro: mean(ok.iter().map(|s| s.min_subgrad_fro)),
                mean_f: mean(ok.iter().map(|s| s.f_total)),
                mean_time_s: mean(ok.iter().map(|s| s.wall_seconds)),
            }
        })
        .collect();

    let report = BenchReport {
        rows,
        runs,
        aggregate_path: out_dir.join("aggregate.csv"),
        timing_path: out_dir.join("timing.csv"),
    };
    let write = |path: &Path, text: String| {
        fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    };
    write(&report.aggregate_path, report.aggregate_csv())?;
    write(&report.timing_path, report.timing_csv())?;
    Ok(report)
}
