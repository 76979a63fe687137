//! The extended Bregman-Kaczmarz family as one parameterized iteration.
//!
//! Each iteration samples a column block and moves the auxiliary dual
//! variable `z*` toward the null space of `A^T`, then samples a row block and
//! moves `x*` toward `{x : A x = b - z*}`. Methods differ only in the block
//! size and the relaxation rule.

mod config;
mod engine;
mod steps;
mod trace;

pub use config::{Method, SolverConfig, TraceOptions};
pub use engine::{
    run, run_with_selector, BlockSelector, RandomSelector, RunOutcome, ScriptedSelector, Solver,
    SolverState, StopReason, SKIP_EPS_FACTOR,
};
pub use steps::{
    adaptive_step_x, adaptive_step_z, constant_alpha_defaults, exact_line_search_x,
    exact_line_search_z, AlphaChoice, StepRule,
};
pub use trace::{ConvergenceTrace, TraceRecord, TRACE_CSV_HEADER};
