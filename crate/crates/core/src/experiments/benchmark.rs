use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{psnr, relative_error};
use crate::problem::ProblemInstance;
use crate::solvers::{run, ConvergenceTrace, Method, SolverConfig, TraceOptions};

use super::instance::InstanceSpec;

pub const BENCHMARK_CSV_HEADER: &str =
    "method,instance,seed,iters,setup_s,solve_s,final_rel_err,final_psnr";

/// A grid of (instance, seed, method) runs sharing solver settings.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub instances: Vec<InstanceSpec>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub tau: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub delta_z: f64,
    pub delta_x: f64,
    /// Keep a per-run trace sampled at this stride.
    pub trace_stride: Option<usize>,
    /// Worker threads; `0` uses the rayon default.
    pub jobs: usize,
}

impl SuiteConfig {
    pub fn new(instances: Vec<InstanceSpec>, methods: Vec<Method>, seeds: Vec<u64>) -> Self {
        Self {
            instances,
            methods,
            seeds,
            tau: 20,
            tol: 1e-5,
            max_iters: 1_000_000,
            delta_z: 1.0,
            delta_x: 1.0,
            trace_stride: None,
            jobs: 0,
        }
    }

    pub fn solver_config(
        &self,
        method: Method,
        instance: &InstanceSpec,
        seed: u64,
    ) -> Result<SolverConfig> {
        let trace = match self.trace_stride {
            Some(stride) => TraceOptions {
                stride,
                ..TraceOptions::default()
            },
            // Only the endpoints are recorded; tracing must not skew timings.
            None => TraceOptions {
                stride: self.max_iters.max(1),
                bregman: false,
                dual_residual: false,
            },
        };
        Ok(SolverConfig::new(method, instance.kind.objective()?)
            .tau(self.tau)
            .deltas(self.delta_z, self.delta_x)
            .tol(Some(self.tol))
            .max_iters(self.max_iters)
            .seed(seed)
            .trace(trace))
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances.is_empty() || self.methods.is_empty() || self.seeds.is_empty() {
            return Err(Error::InvalidConfig(
                "suite needs at least one instance, method and seed".into(),
            ));
        }
        for inst in &self.instances {
            inst.validate()?;
            for &m in &self.methods {
                self.solver_config(m, inst, 0)?.validate()?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub method: Method,
    pub instance: String,
    pub seed: u64,
    pub iters: usize,
    pub converged: bool,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub final_rel_err: Option<f64>,
    pub final_psnr: Option<f64>,
    pub trace: Option<ConvergenceTrace>,
    /// Primal iterate at termination.
    pub final_x: Vec<f64>,
}

/// Two methods ending at different points on the same sparse instance, which
/// suggests the planted vector is not the regularized solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitDisagreement {
    pub instance: String,
    pub seed: u64,
    pub relative_gap: f64,
}

/// Median statistics of one (method, instance) cell over seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub runs: usize,
    pub converged: usize,
    pub median_iters: f64,
    pub median_setup_seconds: f64,
    pub median_solve_seconds: f64,
    pub median_rel_err: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<RunRecord>,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

impl BenchmarkReport {
    pub fn rows_for<'a>(
        &'a self,
        method: Method,
        instance: &'a str,
    ) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.method == method && r.instance == instance)
    }

    pub fn summary(&self, method: Method, instance: &str) -> Option<CellSummary> {
        let rows: Vec<&RunRecord> = self.rows_for(method, instance).collect();
        if rows.is_empty() {
            return None;
        }
        let col = |f: &dyn Fn(&RunRecord) -> f64| {
            median(&mut rows.iter().map(|r| f(r)).collect::<Vec<_>>())
        };
        Some(CellSummary {
            runs: rows.len(),
            converged: rows.iter().filter(|r| r.converged).count(),
            median_iters: col(&|r| r.iters as f64),
            median_setup_seconds: col(&|r| r.setup_seconds),
            median_solve_seconds: col(&|r| r.solve_seconds),
            median_rel_err: col(&|r| r.final_rel_err.unwrap_or(f64::NAN)),
        })
    }

    /// Instance ids in first-seen order.
    pub fn instances(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.instance) {
                out.push(r.instance.clone());
            }
        }
        out
    }

    pub fn methods(&self) -> Vec<Method> {
        let mut out: Vec<Method> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.method) {
                out.push(r.method);
            }
        }
        out
    }

    /// Runs where methods `a` and `b` end further apart than `threshold`
    /// (relative to the norm of the first).
    pub fn limit_disagreements(
        &self,
        a: Method,
        b: Method,
        threshold: f64,
    ) -> Vec<LimitDisagreement> {
        let mut out = Vec::new();
        for ra in self.rows.iter().filter(|r| r.method == a) {
            let rb = self
                .rows
                .iter()
                .find(|r| r.method == b && r.instance == ra.instance && r.seed == ra.seed);
            if let Some(rb) = rb {
                let gap = relative_error(&rb.final_x, &ra.final_x);
                if gap > threshold {
                    out.push(LimitDisagreement {
                        instance: ra.instance.clone(),
                        seed: ra.seed,
                        relative_gap: gap,
                    });
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(BENCHMARK_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.method.id(),
                r.instance,
                r.seed,
                r.iters,
                r.setup_seconds,
                r.solve_seconds,
                r.final_rel_err.map(|v| v.to_string()).unwrap_or_default(),
                r.final_psnr.map(|v| v.to_string()).unwrap_or_default(),
            );
        }
        s
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(self.to_csv().as_bytes())
    }

    /// Column-aligned table of median iterations (IT) and solve+setup time (CPU)
    /// with one row per instance and one column pair per method.
    pub fn table(&self) -> String {
        let methods = self.methods();
        let mut s = String::new();
        let _ = write!(s, "{:<32}", "instance");
        for m in &methods {
            let _ = write!(
                s,
                " {:>14} {:>10}",
                format!("{} IT", m.display_name()),
                "CPU"
            );
        }
        s.push('\n');
        for inst in self.instances() {
            let _ = write!(s, "{inst:<32}");
            for &m in &methods {
                match self.summary(m, &inst) {
                    Some(c) => {
                        let it = if c.converged == c.runs {
                            format!("{}", c.median_iters)
                        } else {
                            format!("{}*", c.median_iters)
                        };
                        let _ = write!(
                            s,
                            " {:>14} {:>10.4}",
                            it,
                            c.median_setup_seconds + c.median_solve_seconds
                        );
                    }
                    None => {
                        let _ = write!(s, " {:>14} {:>10}", "-", "-");
                    }
                }
            }
            s.push('\n');
        }
        s
    }
}

fn run_one(
    suite: &SuiteConfig,
    spec: &InstanceSpec,
    problem: &ProblemInstance,
    method: Method,
) -> Result<RunRecord> {
    let cfg = suite.solver_config(method, spec, problem.seed)?;
    let out = run(&cfg, problem)?;
    let final_psnr = problem
        .x_hat
        .as_deref()
        .and_then(|xh| psnr(&out.state.x_primal, xh).ok());
    Ok(RunRecord {
        method,
        instance: problem.id.clone(),
        seed: problem.seed,
        iters: out.iterations,
        converged: out.converged(),
        setup_seconds: out.setup_seconds,
        solve_seconds: out.solve_seconds,
        final_rel_err: out.final_rel_err,
        final_psnr,
        trace: suite.trace_stride.map(|_| out.trace),
        final_x: out.state.x_primal,
    })
}

/// Runs every (instance, seed, method) combination; rows come back in that
/// nesting order regardless of scheduling.
pub fn run_benchmark(suite: &SuiteConfig) -> Result<BenchmarkReport> {
    suite.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(suite.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;

    pool.install(|| {
        let cells: Vec<(usize, u64)> = (0..suite.instances.len())
            .flat_map(|i| suite.seeds.iter().map(move |&s| (i, s)))
            .collect();
        let problems: Vec<ProblemInstance> = cells
            .par_iter()
            .map(|&(i, seed)| suite.instances[i].build(seed))
            .collect::<Result<_>>()?;

        let jobs: Vec<(usize, Method)> = (0..cells.len())
            .flat_map(|c| suite.methods.iter().map(move |&m| (c, m)))
            .collect();
        let rows: Vec<RunRecord> = jobs
            .par_iter()
            .map(|&(c, m)| run_one(suite, &suite.instances[cells[c].0], &problems[c], m))
            .collect::<Result<_>>()?;
        Ok(BenchmarkReport { rows })
    })
}

/// Median iterations per method for one instance id.
pub fn median_iterations(report: &BenchmarkReport, instance: &str) -> BTreeMap<Method, f64> {
    report
        .methods()
        .into_iter()
        .filter_map(|m| report.summary(m, instance).map(|c| (m, c.median_iters)))
        .collect()
}
