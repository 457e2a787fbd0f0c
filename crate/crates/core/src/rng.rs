//! Keyed random streams for reproducible parallel Monte Carlo.
//!
//! A stream is a ChaCha8 generator keyed by `seed` with the ChaCha stream
//! counter set to `stream_id`. Distinct stream ids address disjoint
//! keystreams, so replicate `i` can run on any thread without coordination.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream for sub-task `index` of this stream.
    ///
    /// The child key is a hash of `(seed, stream_id)`, so children of different
    /// parents do not collide, and deriving a child does not advance `self`.
    pub fn child(&self, index: u64) -> RngStream {
        let key = splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0x5851_f42d_4c95_7f2d)));
        RngStream::new(key, index)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
