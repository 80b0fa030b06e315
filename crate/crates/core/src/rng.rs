//! Seeded random streams.
//!
//! Every independent unit of work (trial, block, session) draws from its own
//! ChaCha stream keyed by `(seed, stream)`, so results do not depend on how
//! the work is scheduled across threads.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as SimRng;

/// Returns the generator for stream `stream` under master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a sweep point index and a unit index into one stream id.
pub fn point_stream(point: u64, unit: u64) -> u64 {
    (point << 40) ^ unit
}
