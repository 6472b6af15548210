//! Seeded random source.
//!
//! ChaCha8 keyed by the 64-bit seed (little-endian, zero padded to 32 bytes).
//! Stream 0 draws the per-item vectors (first-stage costs, lower bounds,
//! deviations); stream `j + 1` draws scenario `j`. Adding scenarios therefore
//! never changes earlier rows.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub struct Draws(ChaCha8Rng);

impl Draws {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        Draws(rng)
    }

    /// Uniform integer in `lo..=hi` by rejection sampling.
    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi, "empty range {lo}..={hi}");
        let span = (hi - lo) as u64 + 1;
        let zone = u64::MAX - (u64::MAX - span + 1) % span;
        loop {
            let v = self.0.next_u64();
            if v <= zone {
                return lo + (v % span) as i64;
            }
        }
    }

    /// Fair coin.
    pub fn coin(&mut self) -> bool {
        self.int(0, 1) == 1
    }
}
