//! Deterministic counter-based random numbers.
//!
//! Every random quantity in this crate is a pure function of a 64-bit stream
//! key and a 64-bit counter, so fills and trial loops produce identical values
//! regardless of evaluation order or thread count. A lattice fill keys the
//! stream by the user seed and uses the cell's linear index as the counter;
//! the Monte Carlo estimator derives one substream per (dims, trial).
//!
//! The generator is random-access SplitMix64: the counter advances the state
//! by the golden-ratio increment and the output is the usual 64-bit finalizer.

/// Golden-ratio increment of SplitMix64.
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer; a full-avalanche 64-bit mixer.
#[inline(always)]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A keyed random stream; `uniform(i)` is the i-th draw, addressable in any order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stream(u64);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(mix64(seed ^ GOLDEN))
    }

    /// Derive an independent substream, e.g. per trial or per grid point.
    /// Derivation chains: `s.substream(a).substream(b)` differs from
    /// `s.substream(b).substream(a)`.
    #[must_use]
    pub fn substream(self, salt: u64) -> Self {
        Stream(mix64(self.0 ^ mix64(salt.wrapping_add(GOLDEN))))
    }

    #[inline(always)]
    pub fn bits(self, counter: u64) -> u64 {
        mix64(self.0.wrapping_add(counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw in [0, 1) with 53 random mantissa bits.
    #[inline(always)]
    pub fn uniform(self, counter: u64) -> f64 {
        (self.bits(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
