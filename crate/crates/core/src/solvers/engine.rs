use std::time::Instant;

use rand_chacha::ChaCha8Rng;

use crate::convex::ObjectiveSpec;
use crate::error::{invalid_arg, Error, Result};
use crate::linalg::vector::{axpy, norm, norm_sq};
use crate::linalg::{
    compute_spectral_bounds, sample_block, Axis, BlockSpectralBounds, DenseMatrix, Partition,
};
use crate::metrics::relative_error;
use crate::problem::ProblemInstance;
use crate::rng::{stream_rng, STREAM_SOLVER};

use super::config::SolverConfig;
use super::steps::{adaptive_ratio, constant_alpha_defaults, exact_ratio, StepRule};
use super::trace::{ConvergenceTrace, TraceRecord};

/// Relative residual threshold below which a block update is skipped.
pub const SKIP_EPS_FACTOR: f64 = 1e-14;

/// Live iterates: dual/primal pairs for `x` (length n) and `z` (length m).
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x_dual: Vec<f64>,
    pub x_primal: Vec<f64>,
    pub z_dual: Vec<f64>,
    pub z_primal: Vec<f64>,
    pub iter: usize,
}

/// Source of block indices; one column block then one row block per iteration.
pub trait BlockSelector {
    fn next_column_block(&mut self, partition: &Partition) -> Result<usize>;
    fn next_row_block(&mut self, partition: &Partition) -> Result<usize>;
}

/// Frobenius-weighted random selection from a seeded stream.
#[derive(Debug, Clone)]
pub struct RandomSelector {
    rng: ChaCha8Rng,
}

impl RandomSelector {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: stream_rng(seed, STREAM_SOLVER),
        }
    }
}

impl BlockSelector for RandomSelector {
    fn next_column_block(&mut self, partition: &Partition) -> Result<usize> {
        sample_block(partition, &mut self.rng)
    }

    fn next_row_block(&mut self, partition: &Partition) -> Result<usize> {
        sample_block(partition, &mut self.rng)
    }
}

/// Replays fixed index sequences; used to compare against reference iterations.
#[derive(Debug, Clone)]
pub struct ScriptedSelector {
    columns: Vec<usize>,
    rows: Vec<usize>,
    col_pos: usize,
    row_pos: usize,
}

impl ScriptedSelector {
    pub fn new(columns: Vec<usize>, rows: Vec<usize>) -> Self {
        Self {
            columns,
            rows,
            col_pos: 0,
            row_pos: 0,
        }
    }

    fn take(seq: &[usize], pos: &mut usize, partition: &Partition, what: &str) -> Result<usize> {
        let idx = *seq.get(*pos).ok_or_else(|| {
            Error::InvalidState(format!(
                "scripted {what} sequence exhausted after {pos} draws"
            ))
        })?;
        if idx >= partition.len() {
            return Err(invalid_arg(format!(
                "scripted {what} block {idx} out of range (partition has {})",
                partition.len()
            )));
        }
        *pos += 1;
        Ok(idx)
    }
}

impl BlockSelector for ScriptedSelector {
    fn next_column_block(&mut self, partition: &Partition) -> Result<usize> {
        Self::take(&self.columns, &mut self.col_pos, partition, "column")
    }

    fn next_row_block(&mut self, partition: &Partition) -> Result<usize> {
        Self::take(&self.rows, &mut self.row_pos, partition, "row")
    }
}

/// A solver bound to one matrix and right-hand side.
///
/// Holds the partitions, the resolved step rules and scratch space, so the
/// per-iteration half-steps allocate nothing.
#[derive(Debug)]
pub struct Solver<'a> {
    matrix: &'a DenseMatrix,
    b: &'a [f64],
    objective: ObjectiveSpec,
    misfit: ObjectiveSpec,
    rows: Partition,
    cols: Partition,
    rule_z: StepRule,
    rule_x: StepRule,
    bounds: Option<BlockSpectralBounds>,
    constants: Option<(f64, f64)>,
    skip_eps: f64,
    r_z: Vec<f64>,
    w_z: Vec<f64>,
    u_z: Vec<f64>,
    r_x: Vec<f64>,
    w_x: Vec<f64>,
    u_x: Vec<f64>,
}

impl<'a> Solver<'a> {
    pub fn new(matrix: &'a DenseMatrix, b: &'a [f64], config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        if b.len() != matrix.rows() {
            return Err(invalid_arg(format!(
                "right-hand side has length {}, matrix has {} rows",
                b.len(),
                matrix.rows()
            )));
        }
        if matrix.frob_sq() == 0.0 {
            return Err(Error::InvalidState(
                "matrix is identically zero; no block distribution exists".into(),
            ));
        }
        let tau = config.effective_tau();
        let rows = Partition::for_matrix(matrix, tau.min(matrix.rows()), Axis::Rows)?;
        let cols = Partition::for_matrix(matrix, tau.min(matrix.cols()), Axis::Columns)?;
        rows.ensure_samplable()?;
        cols.ensure_samplable()?;

        let (bounds, constants) = if config.method.uses_spectral_constants() {
            let bounds = compute_spectral_bounds(matrix, &rows, &cols)?;
            let c =
                constant_alpha_defaults(&bounds, &config.objective, &config.misfit, config.alpha);
            (Some(bounds), Some(c))
        } else {
            (None, None)
        };
        let (rule_z, rule_x) = config.step_rules(constants);

        let max_col = cols.max_block_len();
        let max_row = rows.max_block_len();
        Ok(Self {
            matrix,
            b,
            objective: config.objective,
            misfit: config.misfit,
            rows,
            cols,
            rule_z,
            rule_x,
            bounds,
            constants,
            skip_eps: SKIP_EPS_FACTOR * norm(b),
            r_z: vec![0.0; max_col],
            w_z: vec![0.0; matrix.rows()],
            u_z: vec![0.0; max_col],
            r_x: vec![0.0; max_row],
            w_x: vec![0.0; matrix.cols()],
            u_x: vec![0.0; max_row],
        })
    }

    pub fn row_partition(&self) -> &Partition {
        &self.rows
    }

    pub fn column_partition(&self) -> &Partition {
        &self.cols
    }

    pub fn step_rules(&self) -> (StepRule, StepRule) {
        (self.rule_z, self.rule_x)
    }

    /// Spectral bounds, computed only for the constant-relaxation methods.
    pub fn spectral_bounds(&self) -> Option<&BlockSpectralBounds> {
        self.bounds.as_ref()
    }

    /// Resolved `(alpha_z, alpha_x)` for the constant-relaxation methods.
    pub fn constant_alphas(&self) -> Option<(f64, f64)> {
        self.constants
    }

    pub fn skip_eps(&self) -> f64 {
        self.skip_eps
    }

    /// `x* = 0`, `z* = b`, primals through the conjugate maps.
    pub fn initial_state(&self) -> SolverState {
        let n = self.matrix.cols();
        let x_dual = vec![0.0; n];
        let x_primal = self.objective.conjugate_gradient_map(&x_dual);
        let z_dual = self.b.to_vec();
        let z_primal = self.misfit.conjugate_gradient_map(&z_dual);
        SolverState {
            x_dual,
            x_primal,
            z_dual,
            z_primal,
            iter: 0,
        }
    }

    /// One z half-step on column block `block`; returns the relaxation used
    /// (0 when the update was skipped).
    pub fn z_update(&mut self, state: &mut SolverState, block: usize) -> f64 {
        let cols = self.cols.block(block);
        let frob = self.cols.weight(block);
        let k = cols.len();
        let r = &mut self.r_z[..k];
        self.matrix
            .col_block_tr_mul(cols.clone(), &state.z_primal, r);
        let r_sq = norm_sq(r);
        if frob <= 0.0 || r_sq.sqrt() <= self.skip_eps {
            return 0.0;
        }
        self.matrix.col_block_mul(cols.clone(), r, &mut self.w_z);
        let alpha = match self.rule_z {
            StepRule::Constant(a) => Some(a),
            StepRule::Adaptive(delta) => adaptive_ratio(delta, frob, r_sq, norm_sq(&self.w_z)),
            StepRule::ExactLineSearch => {
                let u = &mut self.u_z[..k];
                self.matrix.col_block_tr_mul(cols, &self.w_z, u);
                exact_ratio(frob, norm_sq(&self.w_z), norm_sq(u))
            }
        };
        let Some(alpha) = alpha else { return 0.0 };
        axpy(-alpha / frob, &self.w_z, &mut state.z_dual);
        self.misfit
            .conjugate_gradient_map_into(&state.z_dual, &mut state.z_primal);
        alpha
    }

    /// One x half-step on row block `block`, using the current `z*`.
    pub fn x_update(&mut self, state: &mut SolverState, block: usize) -> f64 {
        let rows = self.rows.block(block);
        let frob = self.rows.weight(block);
        let k = rows.len();
        let r = &mut self.r_x[..k];
        self.matrix.row_block_mul(rows.clone(), &state.x_primal, r);
        for (t, i) in rows.clone().enumerate() {
            r[t] = self.b[i] - r[t] - state.z_dual[i];
        }
        let r_sq = norm_sq(r);
        if frob <= 0.0 || r_sq.sqrt() <= self.skip_eps {
            return 0.0;
        }
        self.matrix.row_block_tr_mul(rows.clone(), r, &mut self.w_x);
        let alpha = match self.rule_x {
            StepRule::Constant(a) => Some(a),
            StepRule::Adaptive(delta) => adaptive_ratio(delta, frob, r_sq, norm_sq(&self.w_x)),
            StepRule::ExactLineSearch => {
                let u = &mut self.u_x[..k];
                self.matrix.row_block_mul(rows, &self.w_x, u);
                exact_ratio(frob, norm_sq(&self.w_x), norm_sq(u))
            }
        };
        let Some(alpha) = alpha else { return 0.0 };
        axpy(alpha / frob, &self.w_x, &mut state.x_dual);
        self.objective
            .conjugate_gradient_map_into(&state.x_dual, &mut state.x_primal);
        alpha
    }

    /// A full iteration: column block, z half-step, row block, x half-step.
    pub fn step<S: BlockSelector + ?Sized>(
        &mut self,
        state: &mut SolverState,
        selector: &mut S,
    ) -> Result<(f64, f64)> {
        let j = selector.next_column_block(&self.cols)?;
        let sz = self.z_update(state, j);
        let i = selector.next_row_block(&self.rows)?;
        let sx = self.x_update(state, i);
        state.iter += 1;
        Ok((sz, sx))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SolverState,
    pub trace: ConvergenceTrace,
    pub stop_reason: StopReason,
    pub iterations: usize,
    /// Relative error against the reference, when one was supplied.
    pub final_rel_err: Option<f64>,
    /// Partitioning plus spectral precomputation.
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub constant_alphas: Option<(f64, f64)>,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        self.stop_reason == StopReason::Converged
    }
}

/// Runs `config` on `problem` with Frobenius-weighted random block selection.
pub fn run(config: &SolverConfig, problem: &ProblemInstance) -> Result<RunOutcome> {
    let mut selector = RandomSelector::new(config.seed);
    run_with_selector(config, problem, &mut selector)
}

/// Runs with an arbitrary block source.
///
/// Stops once the relative error against `problem.x_hat` drops to `config.tol`
/// or after `config.max_iters` iterations. A tolerance without a reference is
/// rejected.
pub fn run_with_selector<S: BlockSelector + ?Sized>(
    config: &SolverConfig,
    problem: &ProblemInstance,
    selector: &mut S,
) -> Result<RunOutcome> {
    let x_hat = problem.x_hat.as_deref();
    if config.tol.is_some() && x_hat.is_none() {
        return Err(Error::InvalidConfig(
            "tolerance-based stopping needs a reference solution; clear tol to run a fixed budget"
                .into(),
        ));
    }
    if let Some(xh) = x_hat {
        if xh.len() != problem.matrix.cols() {
            return Err(invalid_arg(format!(
                "reference has length {}, matrix has {} columns",
                xh.len(),
                problem.matrix.cols()
            )));
        }
    }

    let setup_start = Instant::now();
    let mut solver = Solver::new(&problem.matrix, &problem.b, config)?;
    let setup_seconds = setup_start.elapsed().as_secs_f64();

    let mut state = solver.initial_state();
    let mut trace = ConvergenceTrace::new();
    let opts = config.trace;
    let record = |state: &SolverState, rel_err: Option<f64>, steps: (f64, f64), t: f64| {
        let bregman_x = match (opts.bregman, x_hat) {
            (true, Some(xh)) => Some(config.objective.bregman_distance(
                &state.x_dual,
                &state.x_primal,
                xh,
            )),
            _ => None,
        };
        let dual_residual = opts
            .dual_residual
            .then(|| norm(&problem.matrix.tr_mul_vec(&state.z_primal)));
        TraceRecord {
            iter: state.iter,
            rel_err,
            bregman_x,
            dual_residual,
            step_z: steps.0,
            step_x: steps.1,
            elapsed_seconds: t,
        }
    };
    let err_of = |state: &SolverState| x_hat.map(|xh| relative_error(&state.x_primal, xh));

    let solve_start = Instant::now();
    trace.push(record(&state, err_of(&state), (0.0, 0.0), 0.0));

    let mut stop_reason = StopReason::MaxIterations;
    let mut last_err = err_of(&state);
    let mut steps = (0.0, 0.0);
    while state.iter < config.max_iters {
        steps = solver.step(&mut state, selector)?;
        let on_stride = state.iter % opts.stride == 0;
        if config.tol.is_some() || on_stride {
            last_err = err_of(&state);
        }
        let converged = matches!((config.tol, last_err), (Some(tol), Some(e)) if e <= tol);
        if converged {
            stop_reason = StopReason::Converged;
            break;
        }
        if on_stride {
            let t = solve_start.elapsed().as_secs_f64();
            trace.push(record(&state, last_err, steps, t));
        }
    }
    let solve_seconds = solve_start.elapsed().as_secs_f64();
    let final_rel_err = err_of(&state);
    trace.push(record(&state, final_rel_err, steps, solve_seconds));

    Ok(RunOutcome {
        iterations: state.iter,
        state,
        trace,
        stop_reason,
        final_rel_err,
        setup_seconds,
        solve_seconds,
        constant_alphas: solver.constant_alphas(),
    })
}
