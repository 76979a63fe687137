//! The `kbz` command-line front end.
//!
//! [`run_cli`] takes the raw arguments and output sinks and returns the process
//! exit code, so the whole command surface is testable in-process.

mod config_file;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::convex::ObjectiveSpec;
use crate::error::{Error, Result};
use crate::experiments::{
    load_mnist_image, recover_image, run_benchmark, synthetic_image, GrayImage, InstanceSpec,
    MatrixSource, RecoverySetting, SuiteConfig, MNIST_SIDE,
};
use crate::linalg::{
    compute_spectral_bounds, load_vector, numerical_rank, singular_values, Axis, DenseMatrix,
    Partition, RANK_CUTOFF,
};
use crate::problem::{ProblemInstance, ProblemKind};
use crate::solvers::{
    constant_alpha_defaults, run, AlphaChoice, Method, SolverConfig, StopReason, TraceOptions,
};

pub use config_file::parse_key_values;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MAX_ITERS: i32 = 2;

const SWITCHES: &[&str] = &["synthetic", "bregman"];

#[derive(Debug, Parser)]
#[command(
    name = "kbz",
    version,
    about = "Randomized block extended Bregman-Kaczmarz solvers",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one problem and write its convergence trace.
    Solve(SolveArgs),
    /// Run a method comparison over instances and seeds.
    Bench(BenchArgs),
    /// Compressed image recovery with several methods at equal budgets.
    Recover(RecoverArgs),
    /// Print dimensions, rank and block spectral constants of a matrix.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    Gaussian,
    Structured,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Sparse,
    Minnorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlphaMode {
    Experiment,
    Theory,
}

#[derive(Debug, Clone, Args)]
struct ProblemArgs {
    /// Matrix source.
    #[arg(long, value_enum, default_value = "gaussian")]
    gen: GenKind,
    #[arg(long, default_value_t = 200)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Rank of structured matrices (default: min(m, n)).
    #[arg(long)]
    rank: Option<usize>,
    /// Condition-number bound of structured matrices.
    #[arg(long, default_value_t = 10.0)]
    kappa: f64,
    #[arg(long, value_enum, default_value = "sparse")]
    kind: KindArg,
    /// Elastic-net weight for sparse problems.
    #[arg(long, default_value_t = 5.0)]
    lambda: f64,
    /// Noise level relative to the consistent right-hand side.
    #[arg(long, default_value_t = 5.0)]
    q: f64,
    /// Support fraction of planted sparse solutions.
    #[arg(long, default_value_t = 0.01)]
    sparsity: f64,
    /// Matrix file (`--gen file`).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Right-hand side file (`--gen file`).
    #[arg(long)]
    rhs: Option<PathBuf>,
    /// Reference solution file (`--gen file`); enables tolerance-based stopping.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 20)]
    tau: usize,
    #[arg(long = "delta-z", default_value_t = 1.0)]
    delta_z: f64,
    #[arg(long = "delta-x", default_value_t = 1.0)]
    delta_x: f64,
    /// Constant relaxation choice for cRABEBK / REABK.
    #[arg(long = "alpha-mode", value_enum, default_value = "experiment")]
    alpha_mode: AlphaMode,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long = "max-iters", default_value_t = 1_000_000)]
    max_iters: usize,
}

#[derive(Debug, Clone, Args)]
struct OutArgs {
    /// Output directory.
    #[arg(long, env = "KBZ_OUT", default_value = "kbz-out")]
    out: PathBuf,
    /// Flat `key = value` file supplying flags; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    method: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "trace-stride", default_value_t = 10)]
    trace_stride: usize,
    /// Also trace the Bregman distance to the reference.
    #[arg(long)]
    bregman: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args)]
struct BenchArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Comma-separated sizes `MxN`; overrides --m/--n.
    #[arg(long)]
    sizes: Option<String>,
    /// Comma-separated method ids.
    #[arg(long)]
    methods: Option<String>,
    /// Seeds as a list `1,2,5` and/or ranges `1-10`.
    #[arg(long, default_value = "1-10")]
    seeds: String,
    /// Write a trace per run, sampled at this stride.
    #[arg(long = "trace-stride")]
    trace_stride: Option<usize>,
    /// Worker threads (0: all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args)]
struct RecoverArgs {
    /// MNIST IDX3 image file.
    #[arg(long)]
    mnist: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Use the built-in 8x8 test image instead of MNIST data.
    #[arg(long)]
    synthetic: bool,
    #[arg(long, value_enum, default_value = "sparse")]
    kind: KindArg,
    /// Rows of the sensing matrix (default: 3n/4 sparse, 2n min-norm).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 5.0)]
    lambda: f64,
    #[arg(long, default_value_t = 5.0)]
    q: f64,
    /// Iteration budget (default: 10000 sparse, 1000 min-norm).
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    methods: Option<String>,
    #[arg(long, default_value_t = 20)]
    tau: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args)]
struct InspectArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value_t = 20)]
    tau: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match config_file::expand_config(args, SWITCHES) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, out, err),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Recover(a) => cmd_recover(&a, out),
        Command::Inspect(a) => cmd_inspect(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn problem_kind(kind: KindArg, lambda: f64) -> Result<ProblemKind> {
    let k = match kind {
        KindArg::Sparse => ProblemKind::SparseLeastSquares { lambda },
        KindArg::Minnorm => ProblemKind::MinNormLeastSquares,
    };
    k.objective()?;
    Ok(k)
}

fn instance_spec(p: &ProblemArgs, m: usize, n: usize) -> Result<InstanceSpec> {
    let source = match p.gen {
        GenKind::Gaussian => MatrixSource::Gaussian,
        GenKind::Structured => MatrixSource::Structured {
            rank: p.rank.unwrap_or(m.min(n)),
            kappa: p.kappa,
        },
        GenKind::File => {
            return Err(Error::InvalidArgument(
                "file input is not a generator".into(),
            ))
        }
    };
    let mut spec = InstanceSpec::new(source, m, n, problem_kind(p.kind, p.lambda)?).with_q(p.q);
    spec.sparsity = p.sparsity;
    spec.validate()?;
    Ok(spec)
}

/// Loads or validates the problem description without generating anything.
enum ProblemPlan {
    Generated(InstanceSpec),
    Files {
        matrix: PathBuf,
        rhs: PathBuf,
        reference: Option<PathBuf>,
        kind: ProblemKind,
    },
}

fn plan_problem(p: &ProblemArgs) -> Result<ProblemPlan> {
    if p.gen == GenKind::File {
        let matrix = p
            .matrix
            .clone()
            .ok_or_else(|| Error::InvalidArgument("--gen file needs --matrix".into()))?;
        let rhs = p
            .rhs
            .clone()
            .ok_or_else(|| Error::InvalidArgument("--gen file needs --rhs".into()))?;
        return Ok(ProblemPlan::Files {
            matrix,
            rhs,
            reference: p.reference.clone(),
            kind: problem_kind(p.kind, p.lambda)?,
        });
    }
    Ok(ProblemPlan::Generated(instance_spec(p, p.m, p.n)?))
}

fn materialize(plan: &ProblemPlan, seed: u64) -> Result<ProblemInstance> {
    match plan {
        ProblemPlan::Generated(spec) => spec.build(seed),
        ProblemPlan::Files {
            matrix,
            rhs,
            reference,
            kind,
        } => {
            let a = DenseMatrix::load(matrix)?;
            let b = load_vector(rhs)?;
            let id = matrix
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".into());
            let mut p = ProblemInstance::new(a, b, *kind)?.with_id(id);
            if let Some(r) = reference {
                p = p.with_reference(load_vector(r)?)?;
            }
            p.seed = seed;
            Ok(p)
        }
    }
}

fn solver_config(method: Method, objective: ObjectiveSpec, s: &SolverArgs) -> SolverConfig {
    let alpha = match s.alpha_mode {
        AlphaMode::Experiment => AlphaChoice::Experiment,
        AlphaMode::Theory => AlphaChoice::Theory,
    };
    SolverConfig::new(method, objective)
        .tau(s.tau)
        .deltas(s.delta_z, s.delta_x)
        .alpha(alpha)
        .tol(Some(s.tol))
        .max_iters(s.max_iters)
}

fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let methods: Vec<Method> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if methods.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no methods given; valid methods: {}",
            Method::valid_names()
        )));
    }
    Ok(methods)
}

fn parse_seeds(list: &str) -> Result<Vec<u64>> {
    let bad = |t: &str| Error::InvalidArgument(format!("bad seed specification `{t}`"));
    let mut seeds = Vec::new();
    for tok in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = tok.split_once('-') {
            let lo: u64 = lo.trim().parse().map_err(|_| bad(tok))?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad(tok))?;
            if lo > hi {
                return Err(bad(tok));
            }
            seeds.extend(lo..=hi);
        } else {
            seeds.push(tok.parse().map_err(|_| bad(tok))?);
        }
    }
    if seeds.is_empty() {
        return Err(bad(list));
    }
    Ok(seeds)
}

fn parse_sizes(list: &str) -> Result<Vec<(usize, usize)>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|tok| {
            let (m, n) = tok
                .split_once(['x', 'X'])
                .ok_or_else(|| Error::InvalidArgument(format!("size `{tok}` is not MxN")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("size `{tok}` is not MxN")))
            };
            Ok((parse(m)?, parse(n)?))
        })
        .collect()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let method: Method = a.method.parse()?;
    let plan = plan_problem(&a.problem)?;
    let objective = problem_kind(a.problem.kind, a.problem.lambda)?.objective()?;
    let mut cfg = solver_config(method, objective, &a.solver)
        .seed(a.seed)
        .trace(TraceOptions {
            stride: a.trace_stride,
            bregman: a.bregman,
            dual_residual: true,
        });
    cfg.validate()?;

    let problem = materialize(&plan, a.seed)?;
    if problem.x_hat.is_none() {
        writeln!(
            err,
            "warning: no reference solution; running the full {} iterations without a tolerance check",
            cfg.max_iters
        )?;
        cfg.tol = None;
    }
    let outcome = run(&cfg, &problem)?;

    ensure_dir(&a.out.out)?;
    let trace_path = a.out.out.join(format!(
        "trace-{}-{}-seed{}.csv",
        method.id(),
        sanitize(&problem.id),
        a.seed
    ));
    fs::write(&trace_path, outcome.trace.to_csv())?;
    let rel = outcome
        .final_rel_err
        .map(|e| format!("{e:.3e}"))
        .unwrap_or_else(|| "n/a".into());
    writeln!(
        out,
        "method={} instance={} iters={} rel_err={} seconds={:.6} status={}",
        method.display_name(),
        problem.id,
        outcome.iterations,
        rel,
        outcome.setup_seconds + outcome.solve_seconds,
        match outcome.stop_reason {
            StopReason::Converged => "converged",
            StopReason::MaxIterations => "max-iters",
        }
    )?;
    let code = match (outcome.stop_reason, cfg.tol) {
        (StopReason::MaxIterations, Some(_)) => EXIT_MAX_ITERS,
        _ => EXIT_OK,
    };
    Ok(code)
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    if a.problem.gen == GenKind::File {
        return Err(Error::InvalidArgument(
            "bench draws its own instances; use --gen gaussian or structured".into(),
        ));
    }
    let sizes = match &a.sizes {
        Some(s) => parse_sizes(s)?,
        None => vec![(a.problem.m, a.problem.n)],
    };
    let instances = sizes
        .iter()
        .map(|&(m, n)| instance_spec(&a.problem, m, n))
        .collect::<Result<Vec<_>>>()?;
    let default_methods = match a.problem.kind {
        KindArg::Sparse => "rebk,crabebk,arabebk",
        KindArg::Minnorm => "reabk,crabebk,arabebk",
    };
    let methods = parse_methods(a.methods.as_deref().unwrap_or(default_methods))?;
    let mut suite = SuiteConfig::new(instances, methods, parse_seeds(&a.seeds)?);
    suite.tau = a.solver.tau;
    suite.tol = a.solver.tol;
    suite.max_iters = a.solver.max_iters;
    suite.delta_z = a.solver.delta_z;
    suite.delta_x = a.solver.delta_x;
    suite.trace_stride = a.trace_stride;
    suite.jobs = a.jobs;
    suite.validate()?;

    let report = run_benchmark(&suite)?;
    ensure_dir(&a.out.out)?;
    fs::write(a.out.out.join("benchmark.csv"), report.to_csv())?;
    if a.trace_stride.is_some() {
        for r in &report.rows {
            if let Some(t) = &r.trace {
                let name = format!(
                    "trace-{}-{}-seed{}.csv",
                    r.method.id(),
                    sanitize(&r.instance),
                    r.seed
                );
                fs::write(a.out.out.join(name), t.to_csv())?;
            }
        }
    }
    write!(out, "{}", report.table())?;
    for d in report.limit_disagreements(Method::Rebk, Method::Arabebk, 10.0 * suite.tol) {
        writeln!(
            out,
            "note: REBK and aRABEBK limits differ by {:.2e} on {} (seed {})",
            d.relative_gap, d.instance, d.seed
        )?;
    }
    let all_converged = report.rows.iter().all(|r| r.converged);
    Ok(if all_converged {
        EXIT_OK
    } else {
        EXIT_MAX_ITERS
    })
}

fn cmd_recover(a: &RecoverArgs, out: &mut dyn Write) -> Result<i32> {
    let image = match (&a.mnist, a.synthetic) {
        (_, true) => synthetic_image(),
        (Some(path), false) => {
            GrayImage::new(MNIST_SIDE, MNIST_SIDE, load_mnist_image(path, a.index)?)?
        }
        (None, false) => {
            return Err(Error::InvalidArgument(
                "recover needs --mnist FILE or --synthetic".into(),
            ))
        }
    };
    let n = image.pixels.len();
    let mut setting = match a.kind {
        KindArg::Sparse => RecoverySetting::sparse(n, a.lambda),
        KindArg::Minnorm => RecoverySetting::minnorm(n),
    };
    setting.kind.objective()?;
    if let Some(m) = a.m {
        if m == 0 {
            return Err(Error::InvalidArgument("--m must be >= 1".into()));
        }
        setting.m = m;
    }
    if let Some(it) = a.iterations {
        setting.iterations = it;
    }
    if let Some(list) = &a.methods {
        setting.methods = parse_methods(list)?;
    }
    setting.q = a.q;
    setting.tau = a.tau;
    for &m in &setting.methods {
        SolverConfig::new(m, setting.kind.objective()?)
            .tau(a.tau)
            .tol(None)
            .max_iters(setting.iterations.max(1))
            .validate()?;
    }

    let results = recover_image(&image, &setting, a.seed)?;
    ensure_dir(&a.out.out)?;
    image.save_pgm(a.out.out.join("original.pgm"))?;
    for r in &results {
        r.image
            .save_pgm(a.out.out.join(format!("recovered-{}.pgm", r.method.id())))?;
        writeln!(
            out,
            "method={} psnr_db={:.2} rel_err={:.3e} iterations={}",
            r.method.display_name(),
            r.psnr,
            r.rel_err,
            setting.iterations
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_inspect(a: &InspectArgs, out: &mut dyn Write) -> Result<i32> {
    if a.tau == 0 {
        return Err(Error::InvalidConfig("tau must be >= 1".into()));
    }
    let matrix = match plan_problem(&a.problem)? {
        ProblemPlan::Files { matrix, .. } => DenseMatrix::load(matrix)?,
        ProblemPlan::Generated(spec) => spec.source.generate(spec.m, spec.n, a.seed)?,
    };
    let (m, n) = matrix.shape();
    let sv = singular_values(&matrix)?;
    let rank = numerical_rank(&sv, RANK_CUTOFF);
    writeln!(out, "shape: {m} x {n}")?;
    writeln!(out, "frobenius_norm: {:.6e}", matrix.frob_sq().sqrt())?;
    writeln!(out, "numerical_rank: {rank}")?;
    writeln!(out, "sigma_max: {:.6e}", sv.first().copied().unwrap_or(0.0))?;
    if rank > 0 {
        writeln!(out, "sigma_min_nonzero: {:.6e}", sv[rank - 1])?;
        writeln!(out, "condition: {:.6e}", sv[0] / sv[rank - 1])?;
    }
    let rows = Partition::for_matrix(&matrix, a.tau.min(m), Axis::Rows)?;
    let cols = Partition::for_matrix(&matrix, a.tau.min(n), Axis::Columns)?;
    let bounds = compute_spectral_bounds(&matrix, &rows, &cols)?;
    writeln!(out, "row_blocks: {} col_blocks: {}", rows.len(), cols.len())?;
    writeln!(out, "beta_max_rows: {:.6}", bounds.beta_max_rows)?;
    writeln!(out, "beta_max_cols: {:.6}", bounds.beta_max_cols)?;
    writeln!(out, "beta_min_rows: {:.6}", bounds.beta_min_rows)?;
    let q = ObjectiveSpec::Quadratic;
    let (az, ax) = constant_alpha_defaults(&bounds, &q, &q, AlphaChoice::Experiment);
    writeln!(out, "constant_alpha: z={az:.6} x={ax:.6}")?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_and_size_lists() {
        assert_eq!(parse_seeds("1-3,7").unwrap(), vec![1, 2, 3, 7]);
        assert!(parse_seeds("3-1").is_err());
        assert!(parse_seeds("x").is_err());
        assert_eq!(
            parse_sizes("200x100, 100X200").unwrap(),
            vec![(200, 100), (100, 200)]
        );
        assert!(parse_sizes("200").is_err());
    }

    #[test]
    fn method_lists() {
        assert_eq!(
            parse_methods("rebk, arabebk").unwrap(),
            vec![Method::Rebk, Method::Arabebk]
        );
        assert!(parse_methods("rebk,nope").is_err());
        assert!(parse_methods(" , ").is_err());
    }
}
