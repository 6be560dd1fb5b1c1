//! Seeded random streams.
//!
//! Every randomized step draws from its own ChaCha stream derived from
//! `(seed, stream)`, so results do not depend on call order or thread
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub const STREAM_BALANCE: u64 = 1;
pub const STREAM_SPLIT: u64 = 2;
pub const STREAM_INDEPENDENT: u64 = 3;
pub const STREAM_SYNTH: u64 = 4;
pub const STREAM_FOLDS: u64 = 5;
pub const STREAM_AL_SEED_SET: u64 = 6;
pub const STREAM_SUBSAMPLE: u64 = 7;
/// Per-tree and per-iteration streams start here and are offset by an index.
pub const STREAM_INDEXED_BASE: u64 = 1 << 32;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream for the `index`-th member of a family (tree, iteration, ...).
pub fn indexed_rng(seed: u64, family: u64, index: u64) -> StreamRng {
    stream_rng(seed, STREAM_INDEXED_BASE + (family << 24) + index)
}
