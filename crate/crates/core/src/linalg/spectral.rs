use std::ops::Range;

use crate::error::{invalid_arg, Error, Result};

use super::matrix::{Axis, DenseMatrix};
use super::partition::Partition;
use super::vector::{dot, norm};

const POWER_MAX_ITERS: usize = 1000;
const POWER_REL_TOL: f64 = 1e-13;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Per-partition ratios `sigma_max^2 / ||block||_F^2` (and the smallest-nonzero
/// counterpart for row blocks) that bound admissible constant relaxation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSpectralBounds {
    pub beta_max_rows: f64,
    pub beta_max_cols: f64,
    pub beta_min_rows: f64,
}

impl BlockSpectralBounds {
    pub fn beta_max(&self) -> f64 {
        self.beta_max_rows.max(self.beta_max_cols)
    }
}

/// Gram matrix of the block on its smaller side, as a dense `k x k` row-major array.
fn small_gram(matrix: &DenseMatrix, block: &Range<usize>, axis: Axis) -> (usize, Vec<f64>) {
    let sub = matrix.block(block.clone(), axis);
    let (p, q) = sub.shape();
    if p <= q {
        let mut g = vec![0.0; p * p];
        for i in 0..p {
            for j in i..p {
                let v = dot(sub.row(i), sub.row(j));
                g[i * p + j] = v;
                g[j * p + i] = v;
            }
        }
        (p, g)
    } else {
        let mut g = vec![0.0; q * q];
        for i in 0..p {
            let row = sub.row(i);
            for a in 0..q {
                let ra = row[a];
                if ra == 0.0 {
                    continue;
                }
                for b in a..q {
                    g[a * q + b] += ra * row[b];
                }
            }
        }
        for a in 0..q {
            for b in 0..a {
                g[a * q + b] = g[b * q + a];
            }
        }
        (q, g)
    }
}

/// Largest squared singular value of a row or column block, by power
/// iteration on the block's Gram matrix from the normalized all-ones vector.
pub fn block_sigma_max_sq(matrix: &DenseMatrix, block: Range<usize>, axis: Axis) -> Result<f64> {
    if block.is_empty() || block.end > matrix.extent(axis) {
        return Err(invalid_arg(format!(
            "block {block:?} is empty or exceeds {} {:?}",
            matrix.extent(axis),
            axis
        )));
    }
    let (k, gram) = small_gram(matrix, &block, axis);
    if gram.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }

    // The all-ones start can be an eigenvector of a smaller eigenvalue for
    // structured blocks, so a second deterministic start guards against that.
    let ones = vec![1.0; k];
    let tilted: Vec<f64> = (0..k)
        .map(|i| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_75).fract())
        .collect();
    Ok(power_iterate(&gram, k, ones).max(power_iterate(&gram, k, tilted)))
}

fn power_iterate(gram: &[f64], k: usize, start: Vec<f64>) -> f64 {
    let mut v = start;
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    let mut w = vec![0.0; k];
    let mut rho = 0.0_f64;
    for _ in 0..POWER_MAX_ITERS {
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = dot(&gram[i * k..(i + 1) * k], &v);
        }
        let next = dot(&v, &w);
        let wn = norm(&w);
        if wn == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        let converged = (next - rho).abs() <= POWER_REL_TOL * next;
        rho = next;
        if converged {
            break;
        }
    }
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = dot(&gram[i * k..(i + 1) * k], &v);
    }
    dot(&v, &w).max(rho)
}

/// All singular values of a row or column block, descending.
pub fn block_singular_values(
    matrix: &DenseMatrix,
    block: Range<usize>,
    axis: Axis,
) -> Result<Vec<f64>> {
    singular_values(&matrix.block(block, axis))
}

pub fn singular_values(matrix: &DenseMatrix) -> Result<Vec<f64>> {
    let mut sv = matrix.to_faer().singular_values().map_err(svd_failed)?;
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

fn svd_failed(e: faer::linalg::svd::SvdError) -> Error {
    Error::InvalidState(format!("singular value decomposition failed: {e:?}"))
}

/// Thin SVD `A = U diag(s) V^T` with `s` descending; `U` is `m x k`, `V` is
/// `n x k`, `k = min(m, n)`.
pub(crate) struct ThinSvd {
    pub u: faer::Mat<f64>,
    pub s: Vec<f64>,
    pub v: faer::Mat<f64>,
}

impl ThinSvd {
    /// Indices of singular values above `RANK_CUTOFF * sigma_max`.
    pub fn numerical_support(&self) -> Vec<usize> {
        let top = self.s.iter().copied().fold(0.0, f64::max);
        (0..self.s.len())
            .filter(|&k| self.s[k] > RANK_CUTOFF * top && self.s[k] > 0.0)
            .collect()
    }
}

pub(crate) fn thin_svd(matrix: &DenseMatrix) -> Result<ThinSvd> {
    let svd = matrix.to_faer().thin_svd().map_err(svd_failed)?;
    let k = matrix.rows().min(matrix.cols());
    let s: Vec<f64> = (0..k).map(|i| svd.S()[i]).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let u = faer::Mat::from_fn(matrix.rows(), k, |i, j| svd.U()[(i, order[j])]);
    let v = faer::Mat::from_fn(matrix.cols(), k, |i, j| svd.V()[(i, order[j])]);
    Ok(ThinSvd {
        u,
        s: order.iter().map(|&i| s[i]).collect(),
        v,
    })
}

/// Smallest singular value above `RANK_CUTOFF * sigma_max`; `None` for a zero matrix.
pub fn smallest_nonzero(sorted_desc: &[f64]) -> Option<f64> {
    let top = *sorted_desc.first()?;
    if top <= 0.0 {
        return None;
    }
    sorted_desc
        .iter()
        .rev()
        .copied()
        .find(|&s| s > RANK_CUTOFF * top)
}

pub fn numerical_rank(sorted_desc: &[f64], rel_cutoff: f64) -> usize {
    let top = sorted_desc.first().copied().unwrap_or(0.0);
    sorted_desc
        .iter()
        .filter(|&&s| s > rel_cutoff * top && s > 0.0)
        .count()
}

pub fn compute_spectral_bounds(
    matrix: &DenseMatrix,
    row_partition: &Partition,
    col_partition: &Partition,
) -> Result<BlockSpectralBounds> {
    check_partition(matrix, row_partition, Axis::Rows)?;
    check_partition(matrix, col_partition, Axis::Columns)?;

    let beta_max = |p: &Partition, axis: Axis| -> Result<f64> {
        let mut best = 0.0_f64;
        for (i, b) in p.blocks().iter().enumerate() {
            let fro = p.weight(i);
            if fro > 0.0 {
                best = best.max(block_sigma_max_sq(matrix, b.clone(), axis)? / fro);
            }
        }
        Ok(best)
    };

    let mut beta_min_rows = f64::INFINITY;
    for (i, b) in row_partition.blocks().iter().enumerate() {
        let fro = row_partition.weight(i);
        if fro > 0.0 {
            let sv = block_singular_values(matrix, b.clone(), Axis::Rows)?;
            if let Some(s) = smallest_nonzero(&sv) {
                beta_min_rows = beta_min_rows.min(s * s / fro);
            }
        }
    }
    if !beta_min_rows.is_finite() {
        beta_min_rows = 0.0;
    }

    Ok(BlockSpectralBounds {
        beta_max_rows: beta_max(row_partition, Axis::Rows)?,
        beta_max_cols: beta_max(col_partition, Axis::Columns)?,
        beta_min_rows,
    })
}

fn check_partition(matrix: &DenseMatrix, p: &Partition, axis: Axis) -> Result<()> {
    if p.axis() != axis {
        return Err(invalid_arg(format!(
            "expected a partition over {axis:?}, got {:?}",
            p.axis()
        )));
    }
    let covered = p.blocks().last().map_or(0, |b| b.end);
    if covered != matrix.extent(axis) {
        return Err(invalid_arg(format!(
            "partition covers {covered} indices, matrix has {} {axis:?}",
            matrix.extent(axis)
        )));
    }
    Ok(())
}
