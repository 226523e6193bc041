//! Counter-based random streams.
//!
//! A master seed and a purpose tag fix a ChaCha8 key; the pair of counters
//! `(a, b)` (for example replicate and bin) selects the 64-bit stream. Every
//! stream is therefore addressable without touching any other, which makes
//! parallel replicate evaluation reproducible regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream purpose tags, kept distinct so no two uses share a key.
pub mod purpose {
    pub const PERMUTATION: u64 = 0x7065_726d;
    pub const SAMPLING: u64 = 0x7361_6d70;
    pub const TRIAL_SEED: u64 = 0x7472_6961;
}

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives an independent 64-bit seed from `(seed, purpose, index)`.
pub fn derive_seed(seed: u64, purpose: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(purpose)) ^ index.wrapping_mul(0xD2B7_4407_B1CE_6E93))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    key: [u8; 32],
}

impl StreamFactory {
    pub fn new(seed: u64, purpose: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed ^ splitmix64(purpose);
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        Self { key }
    }

    /// The generator for counter pair `(a, b)`.
    pub fn stream(&self, a: u32, b: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream((u64::from(a) << 32) | u64::from(b));
        rng
    }
}
