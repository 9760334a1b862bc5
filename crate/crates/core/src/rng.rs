//! Reproducible random streams.
//!
//! A master seed is expanded into a 256-bit ChaCha key with SplitMix64; the
//! 64-bit ChaCha stream id then selects an independent substream. Monte Carlo
//! sample `i` always uses stream `i`, so results do not depend on how samples
//! are distributed over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Generator used by every sampler in the crate.
pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// 256-bit key from a seed and a domain-separation salt.
pub fn derive_key(seed: u64, salt: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut x = splitmix64(seed) ^ splitmix64(salt.wrapping_add(0x5851_f42d_4c95_7f2d));
    for chunk in key.chunks_mut(8) {
        x = splitmix64(x);
        chunk.copy_from_slice(&x.to_le_bytes());
    }
    key
}

/// Master seed plus stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngHandle {
    pub seed: u64,
    pub stream: u64,
}

impl RngHandle {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngHandle { seed, stream }
    }

    /// Handle for another stream under the same seed.
    pub fn with_stream(self, stream: u64) -> Self {
        RngHandle { stream, ..self }
    }

    pub fn rng(&self) -> SimRng {
        let mut r = ChaCha8Rng::from_seed(derive_key(self.seed, 0));
        r.set_stream(self.stream);
        r
    }

    /// Generator for a sub-experiment keyed by `salt` (distinct salts give
    /// unrelated keys; the stream id is kept).
    pub fn salted(&self, salt: u64) -> SimRng {
        let mut r = ChaCha8Rng::from_seed(derive_key(self.seed, salt));
        r.set_stream(self.stream);
        r
    }
}
