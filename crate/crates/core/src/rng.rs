//! Deterministic random streams.
//!
//! Every parallel unit of work (a chain, a cascade, a permutation replicate)
//! draws from its own ChaCha stream keyed by `(seed, index)`, so results do not
//! depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Random stream number `stream` of the generator family `seed`.
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed so independent subsystems sharing a user seed do not
/// reuse the same streams.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
