//! Deterministic stream splitting for parallel Monte Carlo.
//!
//! Every random draw in a sweep gets its own ChaCha stream keyed by
//! (master seed, purpose, snr index, trial/block index), so results are
//! bit-identical regardless of how trials are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream purposes, kept distinct so reusing an index across purposes can
/// never alias streams.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    Channel = 1,
    Signal = 2,
    Noise = 3,
    Aux = 4,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives a child seed from the master seed and a stream coordinate.
pub fn derive_seed(master: u64, stream: Stream, a: u64, b: u64) -> u64 {
    let mut s = splitmix64(master ^ 0xa076_1d64_78bd_642f);
    s = splitmix64(s ^ (stream as u64));
    s = splitmix64(s ^ a);
    splitmix64(s ^ b)
}

/// Seeded ChaCha generator for one stream coordinate.
pub fn stream_rng(master: u64, stream: Stream, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream, a, b))
}
