use std::ops::Range;

use rand::Rng;

use crate::error::{invalid_arg, Error, Result};

use super::matrix::{Axis, DenseMatrix};

/// Blocks lighter than this are never sampled.
const NEGLIGIBLE_WEIGHT: f64 = 1e-300;

/// Contiguous index blocks over the rows or columns of a matrix, with a
/// cumulative sampling distribution over the blocks.
///
/// A partition built by [`partition_uniform`] weights each block by its size;
/// [`Partition::with_frobenius_weights`] switches to squared Frobenius norms of
/// the corresponding submatrices, which is what the solvers sample from.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    axis: Axis,
    blocks: Vec<Range<usize>>,
    weights: Vec<f64>,
    total_weight: f64,
    cumulative: Vec<f64>,
}

/// Blocks `[0, tau)`, `[tau, 2 tau)`, ...; the last block takes the remainder.
pub fn partition_uniform(extent: usize, tau: usize, axis: Axis) -> Result<Partition> {
    if extent == 0 {
        return Err(invalid_arg("cannot partition an empty index set"));
    }
    if tau == 0 || tau > extent {
        return Err(invalid_arg(format!(
            "block size tau must lie in 1..={extent}, got {tau}"
        )));
    }
    let blocks: Vec<Range<usize>> = (0..extent)
        .step_by(tau)
        .map(|start| start..(start + tau).min(extent))
        .collect();
    let weights = blocks.iter().map(|b| b.len() as f64).collect();
    Ok(Partition::from_weights(axis, blocks, weights))
}

impl Partition {
    fn from_weights(axis: Axis, blocks: Vec<Range<usize>>, mut weights: Vec<f64>) -> Self {
        for w in &mut weights {
            if *w < NEGLIGIBLE_WEIGHT {
                *w = 0.0;
            }
        }
        let total_weight: f64 = weights.iter().sum();
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(if total_weight > 0.0 {
                acc / total_weight
            } else {
                0.0
            });
        }
        // Pin the tail to exactly 1 so a draw in [0, 1) always lands somewhere.
        if total_weight > 0.0 {
            let last_positive = weights.iter().rposition(|&w| w > 0.0).unwrap();
            for c in &mut cumulative[last_positive..] {
                *c = 1.0;
            }
        }
        Self {
            axis,
            blocks,
            weights,
            total_weight,
            cumulative,
        }
    }

    /// Uniform partition of `matrix` along `axis`, weighted by block
    /// Frobenius norms.
    pub fn for_matrix(matrix: &DenseMatrix, tau: usize, axis: Axis) -> Result<Self> {
        partition_uniform(matrix.extent(axis), tau, axis)?.with_frobenius_weights(matrix)
    }

    pub fn with_frobenius_weights(self, matrix: &DenseMatrix) -> Result<Self> {
        let extent = matrix.extent(self.axis);
        if self.blocks.last().map(|b| b.end) != Some(extent) {
            return Err(invalid_arg(format!(
                "partition covers {} indices but the matrix has {extent} along {:?}",
                self.blocks.last().map_or(0, |b| b.end),
                self.axis
            )));
        }
        let norms = matrix.sq_norms(self.axis);
        let weights = self
            .blocks
            .iter()
            .map(|b| norms[b.clone()].iter().sum())
            .collect();
        Ok(Self::from_weights(self.axis, self.blocks, weights))
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, i: usize) -> Range<usize> {
        self.blocks[i].clone()
    }

    /// Per-block sampling weight (squared Frobenius norm once weighted).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn probability(&self, i: usize) -> f64 {
        if self.total_weight > 0.0 {
            self.weights[i] / self.total_weight
        } else {
            0.0
        }
    }

    pub fn max_block_len(&self) -> usize {
        self.blocks.iter().map(Range::len).max().unwrap_or(0)
    }

    pub fn ensure_samplable(&self) -> Result<()> {
        if self.total_weight > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidState(
                "all blocks have zero weight; no sampling distribution exists".into(),
            ))
        }
    }

    /// Maps a uniform draw `u` in `[0, 1)` to a block index. Caller must have
    /// checked [`Partition::ensure_samplable`].
    #[inline]
    pub fn locate(&self, u: f64) -> usize {
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.blocks.len() - 1)
    }
}

/// Draws a block index with probability proportional to its weight, using
/// exactly one uniform draw from `rng`.
pub fn sample_block<R: Rng + ?Sized>(partition: &Partition, rng: &mut R) -> Result<usize> {
    partition.ensure_samplable()?;
    let u: f64 = rng.random();
    Ok(partition.locate(u))
}
