//! Seeded random streams.
//!
//! Every replica owns a [`ChaCha8Rng`] seeded through
//! [`SeedableRng::seed_from_u64`] with a seed obtained from
//! [`replica_seed`]. Bounded integer draws go through [`bounded`], which
//! implements Lemire's multiply-and-reject method so that no draw is
//! biased and the consumed stream is a documented function of the seed.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Identifier written into output metadata so archived runs can be replayed.
pub const RNG_ALGORITHM: &str =
    "chacha8 (rand_chacha 0.3, seed_from_u64) + lemire-u64-rejection; replica seed = splitmix64 mix";

pub type Rng = ChaCha8Rng;

pub fn from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replica `index` in an ensemble started from `base`:
/// `splitmix64(base ^ splitmix64(index))`.
pub fn replica_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

/// Uniform integer in `[0, range)`.
///
/// `range` must be non-zero.
#[inline]
pub fn bounded<R: RngCore + ?Sized>(rng: &mut R, range: u64) -> u64 {
    debug_assert!(range > 0);
    let mut m = (rng.next_u64() as u128) * (range as u128);
    let mut low = m as u64;
    if low < range {
        // 2^64 mod range
        let threshold = range.wrapping_neg() % range;
        while low < threshold {
            m = (rng.next_u64() as u128) * (range as u128);
            low = m as u64;
        }
    }
    (m >> 64) as u64
}

/// Uniform `f64` in `[0, 1)` built from the top 53 bits of one draw.
#[inline]
pub fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
