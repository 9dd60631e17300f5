//! Keyed, counter-based random streams.
//!
//! Every stream is a ChaCha8 generator whose key is derived from
//! `(seed, replica)` and whose stream id is a caller-chosen counter
//! (sweep and parity for the Ising chain, sample index for walks). Any
//! stream can be reconstructed without replaying the ones before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer, used to spread seeds into key words.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub replica: u64,
}

impl StreamKey {
    pub fn new(seed: u64, replica: u64) -> Self {
        Self { seed, replica }
    }

    fn key_bytes(&self, domain: u64) -> [u8; 32] {
        let words = [
            mix64(self.seed),
            mix64(self.replica ^ 0xA5A5_A5A5_0000_0000),
            mix64(domain),
            mix64(self.seed ^ self.replica.rotate_left(32) ^ domain.rotate_left(17)),
        ];
        let mut out = [0u8; 32];
        for (chunk, w) in out.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        out
    }

    /// Generator for `(domain, counter)`; `domain` separates independent uses
    /// of the same replica key.
    pub fn stream(&self, domain: u64, counter: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key_bytes(domain));
        rng.set_stream(counter);
        rng
    }

    /// Derived 64-bit seed for this replica, recorded in run manifests.
    pub fn replica_seed(&self) -> u64 {
        mix64(self.seed ^ mix64(self.replica))
    }
}

pub mod domain {
    pub const ISING_SWEEP: u64 = 1;
    pub const ISING_INIT: u64 = 2;
    pub const WALK: u64 = 3;
    pub const FS_PATH: u64 = 4;
    pub const BOOTSTRAP: u64 = 5;
}
