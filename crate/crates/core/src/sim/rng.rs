//! Replica random streams.
//!
//! Each replica owns a xoshiro256++ generator seeded (via SplitMix64 state
//! expansion) from `stream_seed(master_seed, replica_id)`. Uniforms are the top
//! 53 bits of one 64-bit output scaled by 2⁻⁵³, so they lie in `[0, 1)`.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit mix of `(master_seed, replica_id)`.
pub fn stream_seed(master_seed: u64, replica_id: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(replica_id.wrapping_mul(GOLDEN)))
}

#[derive(Debug, Clone)]
pub struct ReplicaRng(Xoshiro256PlusPlus);

impl ReplicaRng {
    pub fn new(master_seed: u64, replica_id: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(stream_seed(
            master_seed,
            replica_id,
        )))
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
