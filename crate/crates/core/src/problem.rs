use std::fmt;

use crate::convex::ObjectiveSpec;
use crate::error::{invalid_arg, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    /// `min lambda ||x||_1 + 1/2 ||x||^2  s.t.  A x = y_hat`
    SparseLeastSquares { lambda: f64 },
    /// `min 1/2 ||x||^2  s.t.  A x = y_hat`
    MinNormLeastSquares,
}

impl ProblemKind {
    pub fn objective(&self) -> Result<ObjectiveSpec> {
        match *self {
            Self::SparseLeastSquares { lambda } => ObjectiveSpec::elastic_net(lambda),
            Self::MinNormLeastSquares => Ok(ObjectiveSpec::Quadratic),
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            Self::SparseLeastSquares { .. } => "sparse",
            Self::MinNormLeastSquares => "minnorm",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SparseLeastSquares { lambda } => write!(f, "sparse(lambda={lambda})"),
            Self::MinNormLeastSquares => f.write_str("minnorm"),
        }
    }
}

/// A linear system `A x ~ b` together with its reference solution, when known.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub id: String,
    pub matrix: DenseMatrix,
    pub b: Vec<f64>,
    /// Planted sparse vector or minimum-norm least-squares solution.
    pub x_hat: Option<Vec<f64>>,
    /// `A x_hat`, the consistent part of `b`.
    pub y_hat: Option<Vec<f64>>,
    pub noise_q: f64,
    /// False when `null(A^T)` was trivial and no noise could be injected.
    pub noise_applied: bool,
    pub kind: ProblemKind,
    pub seed: u64,
}

impl ProblemInstance {
    pub fn new(matrix: DenseMatrix, b: Vec<f64>, kind: ProblemKind) -> Result<Self> {
        if b.len() != matrix.rows() {
            return Err(invalid_arg(format!(
                "right-hand side has length {}, matrix has {} rows",
                b.len(),
                matrix.rows()
            )));
        }
        kind.objective()?;
        Ok(Self {
            id: format!("{}x{}", matrix.rows(), matrix.cols()),
            matrix,
            b,
            x_hat: None,
            y_hat: None,
            noise_q: 0.0,
            noise_applied: false,
            kind,
            seed: 0,
        })
    }

    pub fn with_reference(mut self, x_hat: Vec<f64>) -> Result<Self> {
        if x_hat.len() != self.matrix.cols() {
            return Err(invalid_arg(format!(
                "reference has length {}, matrix has {} columns",
                x_hat.len(),
                self.matrix.cols()
            )));
        }
        self.y_hat = Some(self.matrix.mul_vec(&x_hat));
        self.x_hat = Some(x_hat);
        Ok(self)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }
}
