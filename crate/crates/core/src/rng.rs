//! Seeded randomness. Every suite draws from a SplitMix64 stream so that runs
//! are bit-reproducible across platforms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
pub use rand_xoshiro::SplitMix64;

pub type SeededRng = SplitMix64;

pub fn seeded(seed: u64) -> SeededRng {
    SplitMix64::seed_from_u64(seed)
}

/// Derives an independent stream seed for a named sub-task (a suite, a
/// trial) from a parent seed.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    // FNV-1a over the tag, then one SplitMix64 finalizer round.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn trial_rng(seed: u64, tag: &str, trial: usize) -> SeededRng {
    seeded(derive_seed(derive_seed(seed, tag), &trial.to_string()))
}

/// Complex number with real and imaginary parts uniform on [-1, 1).
pub fn uniform_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}
