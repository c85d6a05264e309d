//! Seed splitting.
//!
//! Every random choice in the crate is drawn from a `ChaCha8Rng` derived from
//! a `(seed, stream)` pair: the generator is seeded with `seed` and then moved
//! to ChaCha stream `stream`. Distinct stream ids give independent sequences
//! for the same seed, so subsystems sharing one experiment seed never
//! correlate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed, used when a procedure restarts and needs fresh randomness.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    use rand::RngCore;
    let mut rng = stream_rng(seed, stream);
    rng.set_word_pos(u128::from(index) * 2);
    rng.next_u64()
}
