//! Counter-based deterministic random streams.
//!
//! Every random quantity in this crate is a pure function of a
//! `(seed, stream, counter)` triple, so ensemble sweeps can evaluate
//! realizations in any order (or in parallel) and still produce
//! bit-identical results. There is no stateful generator to share.
//!
//! The mixing function is the SplitMix64 finalizer applied to a chain of
//! xor/multiply absorptions of the three key words. The exact constants
//! below are part of the output format: changing them changes every
//! disorder realization.

/// SplitMix64 finalizer (Steele, Lea, Doug; as used in `splitmix64`).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SEED_TWEAK: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_MULT: u64 = 0xD1B5_4A32_D192_ED03;
const COUNTER_MULT: u64 = 0x2545_F491_4F6C_DD1D;

/// The word at position `counter` of stream `stream` under `seed`.
#[inline]
pub fn stream_u64(seed: u64, stream: u64, counter: u64) -> u64 {
    let s = mix64(seed ^ SEED_TWEAK);
    let s = mix64(s ^ stream.wrapping_mul(STREAM_MULT));
    mix64(s ^ counter.wrapping_mul(COUNTER_MULT))
}

/// Uniform deviate in `[0, 1)` with the full 53 bits of an f64 mantissa.
#[inline]
pub fn stream_unit(seed: u64, stream: u64, counter: u64) -> f64 {
    (stream_u64(seed, stream, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
