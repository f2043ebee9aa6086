//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha`), keyed
//! by a 64-bit seed and a 64-bit stream id. The generator is counter-based,
//! so `(seed, stream)` pins the exact bit sequence on every platform.
//! Independent replicas use distinct stream ids.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream ids reserved for the parts of a single optimizer run.
pub mod streams {
    pub const SAMPLER: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const INIT: u64 = 3;
    pub const GOSSIP: u64 = 4;
    pub const DATA: u64 = 5;
    pub const RESTARTS: u64 = 6;
    pub const PROBE: u64 = 7;
    /// Monte-Carlo replicas use `REPLICA_BASE + index`.
    pub const REPLICA_BASE: u64 = 1 << 32;
}
