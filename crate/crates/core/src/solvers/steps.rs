//! Relaxation parameters for the block-averaged updates.
//!
//! Every rule returns the multiplier `alpha` applied to the normalized
//! direction `A_J r / ||A_J||_F^2` (column blocks) or `A_I^T r / ||A_I||_F^2`
//! (row blocks). `None` signals a degenerate denominator; callers skip the
//! update in that case.

use std::ops::Range;

use crate::convex::ObjectiveSpec;
use crate::linalg::vector::norm_sq;
use crate::linalg::{BlockSpectralBounds, DenseMatrix};

/// How the relaxation parameter of one half-step is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Fixed multiplier; `Constant(1.0)` is the unrelaxed averaging step.
    Constant(f64),
    /// Residual-driven extrapolation scaled by `delta`.
    Adaptive(f64),
    /// Minimizer of the local quadratic residual model along the direction.
    ExactLineSearch,
}

/// Which constant relaxation a constant-step method uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaChoice {
    /// `1 / max(beta_rows, beta_cols)` on both updates.
    Experiment,
    /// `mu_g / beta_cols` for z and `mu_f / beta_rows` for x.
    Theory,
    Fixed {
        alpha_z: f64,
        alpha_x: f64,
    },
}

fn block_frob_sq(matrix: &DenseMatrix, cols: &Range<usize>) -> f64 {
    matrix.col_sq_norms()[cols.clone()].iter().sum()
}

fn row_block_frob_sq(matrix: &DenseMatrix, rows: &Range<usize>) -> f64 {
    matrix.row_sq_norms()[rows.clone()].iter().sum()
}

/// `delta ||A_J||_F^2 ||r||^2 / ||A_J r||^2`, given `w = A_J r`.
#[inline]
pub(crate) fn adaptive_ratio(delta: f64, frob_sq: f64, r_sq: f64, w_sq: f64) -> Option<f64> {
    (w_sq > 0.0).then(|| delta * frob_sq * r_sq / w_sq)
}

/// `||w||^2 ||A||_F^2 / ||u||^2` with `w` the image of the residual and `u`
/// the image of `w` under the adjoint.
#[inline]
pub(crate) fn exact_ratio(frob_sq: f64, w_sq: f64, u_sq: f64) -> Option<f64> {
    (u_sq > 0.0).then(|| w_sq * frob_sq / u_sq)
}

/// Adaptive relaxation for the column block `cols` and residual `r_z = A_J^T z`.
pub fn adaptive_step_z(
    matrix: &DenseMatrix,
    cols: Range<usize>,
    r_z: &[f64],
    delta_z: f64,
) -> Option<f64> {
    let mut w = vec![0.0; matrix.rows()];
    matrix.col_block_mul(cols.clone(), r_z, &mut w);
    adaptive_ratio(
        delta_z,
        block_frob_sq(matrix, &cols),
        norm_sq(r_z),
        norm_sq(&w),
    )
}

/// Exact line-search step for the column block `cols`.
pub fn exact_line_search_z(matrix: &DenseMatrix, cols: Range<usize>, r_z: &[f64]) -> Option<f64> {
    let mut w = vec![0.0; matrix.rows()];
    matrix.col_block_mul(cols.clone(), r_z, &mut w);
    let mut u = vec![0.0; cols.len()];
    matrix.col_block_tr_mul(cols.clone(), &w, &mut u);
    exact_ratio(block_frob_sq(matrix, &cols), norm_sq(&w), norm_sq(&u))
}

/// Adaptive relaxation for the row block `rows` and residual
/// `r_x = b_I - A_I x - z*_I`.
pub fn adaptive_step_x(
    matrix: &DenseMatrix,
    rows: Range<usize>,
    r_x: &[f64],
    delta_x: f64,
) -> Option<f64> {
    let mut w = vec![0.0; matrix.cols()];
    matrix.row_block_tr_mul(rows.clone(), r_x, &mut w);
    adaptive_ratio(
        delta_x,
        row_block_frob_sq(matrix, &rows),
        norm_sq(r_x),
        norm_sq(&w),
    )
}

/// Exact line-search step for the row block `rows`.
pub fn exact_line_search_x(matrix: &DenseMatrix, rows: Range<usize>, r_x: &[f64]) -> Option<f64> {
    let mut w = vec![0.0; matrix.cols()];
    matrix.row_block_tr_mul(rows.clone(), r_x, &mut w);
    let mut u = vec![0.0; rows.len()];
    matrix.row_block_mul(rows.clone(), &w, &mut u);
    exact_ratio(row_block_frob_sq(matrix, &rows), norm_sq(&w), norm_sq(&u))
}

/// Constant relaxation parameters `(alpha_z, alpha_x)` for the given choice.
pub fn constant_alpha_defaults(
    bounds: &BlockSpectralBounds,
    f_spec: &ObjectiveSpec,
    g_spec: &ObjectiveSpec,
    choice: AlphaChoice,
) -> (f64, f64) {
    let inv = |beta: f64| if beta > 0.0 { 1.0 / beta } else { 1.0 };
    match choice {
        AlphaChoice::Experiment => {
            let a = inv(bounds.beta_max());
            (a, a)
        }
        AlphaChoice::Theory => (
            g_spec.mu() * inv(bounds.beta_max_cols),
            f_spec.mu() * inv(bounds.beta_max_rows),
        ),
        AlphaChoice::Fixed { alpha_z, alpha_x } => (alpha_z, alpha_x),
    }
}
