//! Counter-based random streams keyed by (seed, stream index).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub const fn new(seed: u64, stream_index: u64) -> Self {
        RngStream { seed, stream_index }
    }

    /// Stream `index` inside the family `tag`; families never overlap for
    /// indices below 2^48.
    pub const fn tagged(seed: u64, tag: u16, index: u64) -> Self {
        RngStream { seed, stream_index: ((tag as u64) << 48) | (index & ((1 << 48) - 1)) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// SplitMix64 finalizer, used to derive secondary seeds.
pub const fn mix_seed(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
