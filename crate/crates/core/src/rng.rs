//! Seeded random streams.
//!
//! A run has one 64-bit master seed. Every consumer draws from a ChaCha8
//! stream selected by a purpose tag (and, for sharded work, a shard index),
//! so results do not depend on thread scheduling or on the order in which
//! unrelated components consume randomness.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A ChaCha8 stream that remembers the master seed and stream id it was
/// derived from, so constructions can record their provenance.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SeededRng {
            seed,
            stream,
            inner,
        }
    }

    /// Stream for a named purpose, e.g. `"cov-eps"` or `"random-centers"`.
    pub fn for_purpose(seed: u64, purpose: &str) -> Self {
        Self::with_stream(seed, purpose_tag(purpose))
    }

    /// Independent child stream for shard `index` of the work this stream
    /// drives. Shards of shards stay distinct because the tag mixes both.
    pub fn shard(&self, index: u64) -> SeededRng {
        Self::with_stream(self.seed, mix(self.stream ^ 0x9e37_79b9_7f4a_7c15, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// FNV-1a of the purpose string, finished with a SplitMix64 round.
pub fn purpose_tag(purpose: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in purpose.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    mix(h, 0)
}

fn mix(a: u64, b: u64) -> u64 {
    let mut z = a.wrapping_add(b.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
