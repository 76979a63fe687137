//! Randomized block extended Bregman-Kaczmarz solvers for sparse and
//! minimum-norm least squares, with an experiment harness.

pub mod cli;
pub mod convex;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod problem;
pub mod rng;
pub mod solvers;

pub use convex::ObjectiveSpec;
pub use error::{Error, Result};
pub use linalg::{Axis, DenseMatrix, Partition};
pub use problem::{ProblemInstance, ProblemKind};
pub use solvers::{run, Method, RunOutcome, SolverConfig, SolverState, StopReason};
