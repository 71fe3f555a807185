//! Seeded, addressable random streams.
//!
//! An [`RngStream`] is a ChaCha8 keystream keyed by a 64-bit seed and
//! positioned on one of 2^64 independent streams. The same `(seed, stream_id)`
//! always replays the same sequence; different stream ids never overlap.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
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

/// SplitMix64 finalizer.
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives a child seed from an ordered list of coordinates.
///
/// `h_0 = mix64(GOLDEN)`, `h_{k+1} = mix64(h_k ^ mix64(part_k + GOLDEN·(k+1)))`.
/// Order matters: `[1, 2]` and `[2, 1]` give different seeds.
pub fn derive_seed(parts: &[u64]) -> u64 {
    const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
    parts.iter().enumerate().fold(mix64(GOLDEN), |h, (k, &p)| {
        mix64(h ^ mix64(p.wrapping_add(GOLDEN.wrapping_mul(k as u64 + 1))))
    })
}
