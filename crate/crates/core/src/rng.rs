//! Seeded, splittable random streams.
//!
//! Every sampler in the crate draws from an [`RngStream`]. A stream is fully
//! determined by `(seed, stream id)`, so replaying a stream reproduces its
//! draws bit for bit. Parallel work obtains child streams through
//! [`RngStream::split`] instead of sharing one generator.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha12Rng,
}

// SplitMix64 finalizer, used to derive child seeds.
fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngStream {
            seed,
            stream,
            inner,
        }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new(seed, 0)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Derives an independent child stream. The child depends only on this
    /// stream's `(seed, stream id)` and `id`, never on how many draws the
    /// parent has already made.
    pub fn split(&self, id: u64) -> RngStream {
        let child_seed = mix64(self.seed ^ mix64(self.stream.wrapping_add(0x5851_f42d_4c95_7f2d)));
        RngStream::new(mix64(child_seed ^ mix64(id)), id)
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
