//! Generating functions, their Fenchel conjugates and conjugate-gradient maps,
//! and Bregman distances.
//!
//! Two objectives are supported: the elastic net
//! `f(x) = lambda ||x||_1 + 1/2 ||x||_2^2`, whose conjugate gradient is the
//! soft-thresholding operator, and the plain quadratic `1/2 ||x||_2^2`, which
//! is self-conjugate. Both are 1-strongly convex.

use crate::error::{invalid_arg, Error, Result};
use crate::linalg::vector::{dot, norm_sq};
use crate::linalg::{singular_values, smallest_nonzero, DenseMatrix};

/// Largest column count accepted by [`theta_closed_form`]; the quantity is a
/// minimum over all column subsets.
pub const THETA_MAX_COLUMNS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveSpec {
    Quadratic,
    ElasticNet { lambda: f64 },
}

impl ObjectiveSpec {
    pub fn elastic_net(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid_arg(format!(
                "elastic-net lambda must be finite and >= 0, got {lambda}"
            )));
        }
        Ok(Self::ElasticNet { lambda })
    }

    /// Shrinkage threshold of the conjugate gradient map (0 for the quadratic).
    pub fn lambda(&self) -> f64 {
        match *self {
            Self::Quadratic => 0.0,
            Self::ElasticNet { lambda } => lambda,
        }
    }

    /// Strong-convexity modulus.
    pub fn mu(&self) -> f64 {
        1.0
    }

    /// Lipschitz constant of the gradient; only the quadratic has one.
    pub fn lipschitz_grad(&self) -> Option<f64> {
        match self {
            Self::Quadratic => Some(1.0),
            Self::ElasticNet { .. } => None,
        }
    }

    pub fn is_quadratic(&self) -> bool {
        self.lambda() == 0.0
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        let quad = 0.5 * norm_sq(x);
        match *self {
            Self::Quadratic => quad,
            Self::ElasticNet { lambda } => quad + lambda * l1(x),
        }
    }

    /// `f*(d) = 1/2 ||S_lambda(d)||^2`.
    pub fn conjugate_value(&self, dual: &[f64]) -> f64 {
        match *self {
            Self::Quadratic => 0.5 * norm_sq(dual),
            Self::ElasticNet { lambda } => {
                0.5 * dual.iter().map(|&d| shrink(d, lambda).powi(2)).sum::<f64>()
            }
        }
    }

    /// `grad f*(dual)`, i.e. the primal point paired with `dual`.
    pub fn conjugate_gradient_map(&self, dual: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; dual.len()];
        self.conjugate_gradient_map_into(dual, &mut out);
        out
    }

    pub fn conjugate_gradient_map_into(&self, dual: &[f64], out: &mut [f64]) {
        match *self {
            Self::Quadratic => out.copy_from_slice(dual),
            Self::ElasticNet { lambda } => {
                for (o, &d) in out.iter_mut().zip(dual) {
                    *o = shrink(d, lambda);
                }
            }
        }
    }

    /// `D_f^{dual}(primal_of_dual, target) = f*(dual) - <dual, target> + f(target)`.
    ///
    /// Evaluated in the cancellation-free form
    /// `1/2 ||target - x||^2 + sum_j (lambda |target_j| - u_j target_j)` with
    /// `u = dual - x`, which is algebraically identical when
    /// `primal_of_dual = grad f*(dual)`.
    pub fn bregman_distance(&self, dual: &[f64], primal_of_dual: &[f64], target: &[f64]) -> f64 {
        let lambda = self.lambda();
        let mut euclid = 0.0;
        let mut l1_gap = 0.0;
        for ((&d, &x), &t) in dual.iter().zip(primal_of_dual).zip(target) {
            euclid += (t - x) * (t - x);
            if lambda > 0.0 {
                l1_gap += lambda * t.abs() - (d - x) * t;
            }
        }
        (0.5 * euclid + l1_gap.max(0.0)).max(0.0)
    }
}

#[inline]
fn shrink(v: f64, lambda: f64) -> f64 {
    v.signum() * (v.abs() - lambda).max(0.0)
}

fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

/// Componentwise `sign(x_j) max(|x_j| - lambda, 0)`.
pub fn soft_threshold(x: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(invalid_arg(format!(
            "soft-threshold level must be >= 0, got {lambda}"
        )));
    }
    Ok(x.iter().map(|&v| shrink(v, lambda)).collect())
}

/// Closed form of the error-bound constant `1/theta(x_hat)` for the elastic net:
/// `(1 / s^2) (|x_hat|_min + 2 lambda) / |x_hat|_min`, where `s` is the minimum
/// over all nonzero column submatrices of their smallest nonzero singular value
/// and `|x_hat|_min` is the smallest nonzero magnitude in `x_hat`.
pub fn theta_closed_form(matrix: &DenseMatrix, x_hat: &[f64], lambda: f64) -> Result<f64> {
    let n = matrix.cols();
    if x_hat.len() != n {
        return Err(invalid_arg(format!(
            "x_hat has length {}, matrix has {n} columns",
            x_hat.len()
        )));
    }
    if n > THETA_MAX_COLUMNS {
        return Err(Error::UnsupportedScale(format!(
            "subset enumeration is limited to {THETA_MAX_COLUMNS} columns, got {n}"
        )));
    }
    if lambda.is_nan() || lambda < 0.0 {
        return Err(invalid_arg(format!("lambda must be >= 0, got {lambda}")));
    }
    let xmin = x_hat
        .iter()
        .map(|v| v.abs())
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !xmin.is_finite() {
        return Err(invalid_arg("x_hat has empty support"));
    }

    let mut sigma = f64::INFINITY;
    let mut cols = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        cols.clear();
        cols.extend((0..n).filter(|j| mask & (1 << j) != 0));
        let sub = matrix.select_columns(&cols);
        if sub.frob_sq() == 0.0 {
            continue;
        }
        if let Some(s) = smallest_nonzero(&singular_values(&sub)?) {
            sigma = sigma.min(s);
        }
    }
    if !sigma.is_finite() {
        return Err(invalid_arg("matrix is zero; no nonzero column submatrix"));
    }
    Ok((xmin + 2.0 * lambda) / (xmin * sigma * sigma))
}

/// Checks the Fenchel-Young equality `f*(d) + f(grad f*(d)) = <d, grad f*(d)>`
/// and returns the absolute gap.
pub fn fenchel_young_gap(spec: &ObjectiveSpec, dual: &[f64]) -> f64 {
    let x = spec.conjugate_gradient_map(dual);
    (spec.conjugate_value(dual) + spec.objective_value(&x) - dot(dual, &x)).abs()
}
