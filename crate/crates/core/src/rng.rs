//! Random stream contract.
//!
//! Every stream is a xoshiro256++ generator whose 256-bit state is filled from
//! a 64-bit seed by SplitMix64 (`rand_xoshiro`'s `seed_from_u64`). Uniform
//! reals are the top 53 bits of one `next_u64` output scaled by 2^-53, so they
//! lie in `[0, 1)`. Both rules are frozen: golden values in the tests depend
//! on them.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type Stream = Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn stream_from_seed(seed: u64) -> Stream {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` with 53 bits of resolution.
pub fn unit_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// SplitMix64 step: advance by the golden gamma, then finalize.
/// A bijection on `u64`.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
