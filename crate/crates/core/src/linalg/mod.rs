//! Dense matrices, block partitions, Frobenius-weighted block sampling and
//! per-block spectral estimates.

mod matrix;
mod partition;
mod spectral;
pub mod vector;

pub use matrix::{load_vector, save_vector, Axis, DenseMatrix};
pub use partition::{partition_uniform, sample_block, Partition};
pub use spectral::{
    block_sigma_max_sq, block_singular_values, compute_spectral_bounds, numerical_rank,
    singular_values, smallest_nonzero, BlockSpectralBounds, RANK_CUTOFF,
};
pub(crate) use spectral::thin_svd;
