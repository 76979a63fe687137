//! Seeded random streams.
//!
//! Every consumer derives its generator from the user seed plus a fixed stream
//! id, so changing how many draws one stage makes never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Matrix entries and planted solutions.
pub const STREAM_INSTANCE: u64 = 1;
/// Null-space noise direction.
pub const STREAM_NOISE: u64 = 2;
/// Block selection inside a solver run.
pub const STREAM_SOLVER: u64 = 3;
/// Support and values of planted sparse solutions.
pub const STREAM_PLANT: u64 = 4;
/// Generating vector of minimum-norm right-hand sides.
pub const STREAM_RHS: u64 = 5;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
