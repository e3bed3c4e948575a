//! Seedable, stream-splittable random number generation.
//!
//! All stochastic components draw from ChaCha12 generators addressed by
//! `(seed, stream)`. Distinct streams are statistically independent, so
//! disorder sampling, circuit sampling, noise trajectories, and shot
//! sampling can be given separate streams that are reproducible regardless
//! of scheduling or worker count.

use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;

/// Logical channels multiplexed onto the stream word of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Disorder = 1,
    Circuit = 2,
    Noise = 3,
    Shots = 4,
    Scratch = 5,
}

/// Generator for `(seed, channel, index)`. Index must fit in 56 bits.
pub fn stream_rng(seed: u64, channel: Channel, index: u64) -> ChaCha12Rng {
    debug_assert!(index < (1 << 56));
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(((channel as u64) << 56) | index);
    rng
}
