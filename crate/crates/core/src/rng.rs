//! Portable counter-based random numbers.
//!
//! Everything is built on the SplitMix64 finaliser (Steele, Lea & Flood) with
//! its published constants, so identical seeds reproduce bit-for-bit in any
//! language with wrapping 64-bit integer arithmetic and IEEE doubles.

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_2: u64 = 0x94D0_49BB_1331_11EB;

/// SplitMix64 output function applied to `z`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX_1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_2);
    z ^ (z >> 31)
}

/// Uniform in `[0, 1)` from the top 53 bits.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Independent draw keyed by `(seed, stream, index)`.
///
/// Equivalent to the `index + 1`-th output of a SplitMix64 sequence seeded
/// with `mix64(seed ^ mix64(stream))`, computed without iterating.
#[inline]
pub fn keyed_u64(seed: u64, stream: u64, index: u64) -> u64 {
    let base = mix64(seed ^ mix64(stream));
    mix64(base.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

/// Standard normal keyed by `(seed, stream, index)` via Box–Muller (cosine branch).
///
/// The two uniforms are draws `2·index` and `2·index + 1` of the keyed
/// stream; the first is mapped to `(0, 1]` so the logarithm is finite.
pub fn keyed_normal(seed: u64, stream: u64, index: u64) -> f64 {
    let u1 = 1.0 - unit_f64(keyed_u64(seed, stream, 2 * index));
    let u2 = unit_f64(keyed_u64(seed, stream, 2 * index + 1));
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
