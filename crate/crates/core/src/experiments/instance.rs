use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid_arg, Error, Result};
use crate::linalg::DenseMatrix;
use crate::problem::{ProblemInstance, ProblemKind};
use crate::rng::{stream_rng, STREAM_RHS};

use super::generators::{
    generate_gaussian, generate_structured, nullspace_noise, plant_sparse_solution,
    pseudo_inverse_solution,
};

/// Default relative support size of planted sparse solutions.
pub const DEFAULT_SPARSITY: f64 = 0.01;
/// Default relative noise level.
pub const DEFAULT_NOISE_Q: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixSource {
    Gaussian,
    Structured { rank: usize, kappa: f64 },
}

impl MatrixSource {
    pub fn generate(&self, m: usize, n: usize, seed: u64) -> Result<DenseMatrix> {
        match *self {
            Self::Gaussian => generate_gaussian(m, n, seed),
            Self::Structured { rank, kappa } => generate_structured(m, n, rank, kappa, seed),
        }
    }
}

impl fmt::Display for MatrixSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian => f.write_str("gaussian"),
            Self::Structured { rank, kappa } => write!(f, "structured(r={rank},kappa={kappa})"),
        }
    }
}

/// Everything needed to draw a synthetic problem, except the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSpec {
    pub source: MatrixSource,
    pub m: usize,
    pub n: usize,
    pub kind: ProblemKind,
    pub q: f64,
    pub sparsity: f64,
}

impl InstanceSpec {
    pub fn new(source: MatrixSource, m: usize, n: usize, kind: ProblemKind) -> Self {
        Self {
            source,
            m,
            n,
            kind,
            q: DEFAULT_NOISE_Q,
            sparsity: DEFAULT_SPARSITY,
        }
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    /// Short stable identifier, e.g. `gaussian-200x100-sparse`.
    pub fn id(&self) -> String {
        let src = match self.source {
            MatrixSource::Gaussian => "gaussian".to_string(),
            MatrixSource::Structured { rank, kappa } => format!("structured-r{rank}-k{kappa}"),
        };
        format!("{src}-{}x{}-{}", self.m, self.n, self.kind.short_name())
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(invalid_arg(format!(
                "matrix dimensions must be >= 1, got {}x{}",
                self.m, self.n
            )));
        }
        if !(self.q >= 0.0 && self.q.is_finite()) {
            return Err(invalid_arg(format!(
                "noise level q must be >= 0, got {}",
                self.q
            )));
        }
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(invalid_arg(format!(
                "sparsity fraction must lie in (0, 1], got {}",
                self.sparsity
            )));
        }
        if let MatrixSource::Structured { rank, kappa } = self.source {
            if rank == 0 || rank > self.m.min(self.n) {
                return Err(invalid_arg(format!(
                    "rank must lie in 1..={}, got {rank}",
                    self.m.min(self.n)
                )));
            }
            if !(kappa > 1.0 && kappa.is_finite()) {
                return Err(invalid_arg(format!("kappa must be > 1, got {kappa}")));
            }
        }
        self.kind.objective()?;
        Ok(())
    }

    pub fn build(&self, seed: u64) -> Result<ProblemInstance> {
        self.validate()?;
        let a = self.source.generate(self.m, self.n, seed)?;
        match self.kind {
            ProblemKind::SparseLeastSquares { .. } => {
                let x_hat = plant_sparse_solution(self.n, self.sparsity, seed)?;
                sparse_instance(a, x_hat, self.kind, self.q, seed)
            }
            ProblemKind::MinNormLeastSquares => minnorm_instance(a, self.q, seed),
        }
        .map(|p| p.with_id(self.id()))
    }
}

/// Adds null-space noise to `y_hat`; when `null(A^T)` is trivial the data
/// stay consistent and the returned flag is false.
fn noisy_rhs(a: &DenseMatrix, y_hat: &[f64], q: f64, seed: u64) -> Result<(Vec<f64>, bool)> {
    match nullspace_noise(a, y_hat, q, seed) {
        Ok(e) => {
            let b = y_hat.iter().zip(&e).map(|(y, e)| y + e).collect();
            Ok((b, q > 0.0))
        }
        Err(Error::NoNoisePossible { .. }) => Ok((y_hat.to_vec(), false)),
        Err(e) => Err(e),
    }
}

/// Problem with reference `x_hat` and right-hand side `A x_hat + e`.
pub fn sparse_instance(
    a: DenseMatrix,
    x_hat: Vec<f64>,
    kind: ProblemKind,
    q: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    let y_hat = a.mul_vec(&x_hat);
    let (b, noise_applied) = noisy_rhs(&a, &y_hat, q, seed)?;
    let mut p = ProblemInstance::new(a, b, kind)?.with_reference(x_hat)?;
    p.noise_q = q;
    p.noise_applied = noise_applied;
    p.seed = seed;
    Ok(p)
}

/// Min-norm problem: `b = A x_gen + e` with Gaussian `x_gen`, reference `A^+ b`.
pub fn minnorm_instance(a: DenseMatrix, q: f64, seed: u64) -> Result<ProblemInstance> {
    let mut rng = stream_rng(seed, STREAM_RHS);
    let x_gen: Vec<f64> = (0..a.cols()).map(|_| rng.sample(StandardNormal)).collect();
    let y_hat = a.mul_vec(&x_gen);
    let (b, noise_applied) = noisy_rhs(&a, &y_hat, q, seed)?;
    let x_hat = pseudo_inverse_solution(&a, &b)?;
    let mut p =
        ProblemInstance::new(a, b, ProblemKind::MinNormLeastSquares)?.with_reference(x_hat)?;
    p.noise_q = q;
    p.noise_applied = noise_applied;
    p.seed = seed;
    Ok(p)
}
