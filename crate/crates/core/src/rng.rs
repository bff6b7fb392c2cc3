//! Reproducible random streams.
//!
//! Every generator is a ChaCha8 stream keyed by a 64-bit seed and selected by
//! a 64-bit stream id, so trial `t` of sample size index `s` draws the same
//! numbers whichever thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream ids with this bit set are reserved for filter padding samples.
pub const PADDING_STREAM_FLAG: u64 = 1 << 63;

pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id of one Monte Carlo trial: sample-size index in bits 40..63,
/// trial index in bits 0..40.
pub fn trial_stream(size_index: usize, trial: usize) -> u64 {
    debug_assert!((trial as u64) < (1 << 40));
    debug_assert!((size_index as u64) < (1 << 23));
    ((size_index as u64) << 40) | trial as u64
}
