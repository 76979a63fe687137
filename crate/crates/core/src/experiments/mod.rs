//! Problem generators, reference solutions, the benchmark runner and the
//! image-recovery experiment.

mod benchmark;
mod generators;
mod image;
mod instance;

pub use crate::metrics::{psnr, relative_error};
pub use benchmark::{
    median, median_iterations, run_benchmark, BenchmarkReport, CellSummary, LimitDisagreement,
    RunRecord, SuiteConfig, BENCHMARK_CSV_HEADER,
};
pub use generators::{
    generate_gaussian, generate_structured, generate_structured_with_spectrum, nullspace_noise,
    plant_sparse_solution, pseudo_inverse_solution,
};
pub use image::{
    load_mnist_image, parse_idx3_image, recover_image, synthetic_image, to_pgm, GrayImage,
    RecoveryResult, RecoverySetting, IDX3_MAGIC, MNIST_SIDE,
};
pub use instance::{
    minnorm_instance, sparse_instance, InstanceSpec, MatrixSource, DEFAULT_NOISE_Q,
    DEFAULT_SPARSITY,
};
