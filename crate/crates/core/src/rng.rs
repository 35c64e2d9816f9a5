//! Deterministic stream-splitting RNG.
//!
//! Every randomized routine in this crate draws from a [`ChaCha8Rng`] created
//! by [`replication_stream`]. One master seed plus a stream index fully
//! determine the draw sequence, so results never depend on thread count or
//! scheduling: stream `i` is the same whether replications run serially or on
//! a rayon pool.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids at or above this offset are reserved for one-shot retries of a
/// failed replication, keeping them disjoint from first-attempt streams.
pub const RETRY_STREAM_OFFSET: u64 = 1 << 62;

/// RNG for stream `stream` under `master_seed`.
///
/// Distinct `(master_seed, stream)` pairs give statistically independent
/// sequences; identical pairs give identical sequences.
pub fn replication_stream(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for replication `rep` of grid point `point` in a multi-point
/// study. Packing both into the id keeps every (point, replication) pair on
/// its own stream.
pub fn study_stream_id(point: u32, rep: u32) -> u64 {
    ((point as u64) << 32) | rep as u64
}

/// RNG for replication `rep` of grid point `point` in a multi-point study.
pub fn study_stream(master_seed: u64, point: u32, rep: u32) -> ChaCha8Rng {
    replication_stream(master_seed, study_stream_id(point, rep))
}
