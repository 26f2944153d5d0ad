//! Deterministic, keyed random-number streams.
//!
//! All randomness in the crate flows through [`RngStream`], a thin wrapper
//! around the ChaCha12 stream cipher keyed by SplitMix64-expanded 64-bit
//! seeds. Two properties matter here and are guaranteed by construction:
//!
//! - **reproducibility** — the byte stream is a pure function of the seed;
//!   ChaCha is defined purely over 32-bit integer operations, so identical
//!   seeds yield identical draws on every platform;
//! - **keyed derivation** — [`RngStream::derive`] produces a child stream
//!   from `(seed, key)` alone, independent of how much of the parent has
//!   been consumed. Deriving per `(episode, purpose)` means adding policies
//!   or replications never perturbs the draws of existing ones.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 step: the standard 64-bit finalizer used to expand and mix
/// seeds. Passes BigCrush as a generator on its own; here it only whitens
/// key material for ChaCha.
#[inline]
pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combine a seed with a derivation key into a new 64-bit seed.
pub(crate) fn mix(seed: u64, key: u64) -> u64 {
    let mut s = seed ^ key.wrapping_mul(0xa24b_aed4_963e_e407);
    splitmix64(&mut s)
}

/// A seeded, single-owner stream of randomness.
///
/// Instances are cheap to create and must not be shared between concurrent
/// tasks; hand each task its own derived stream instead.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    chacha: ChaCha12Rng,
}

impl RngStream {
    /// Create the root stream for a seed.
    pub fn new(seed: u64) -> Self {
        let mut state = seed;
        let mut bytes = [0u8; 32];
        for chunk in bytes.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        RngStream {
            seed,
            chacha: ChaCha12Rng::from_seed(bytes),
        }
    }

    /// The seed this stream was constructed from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive an independent child stream keyed by `key`.
    ///
    /// The child depends only on `(self.seed(), key)`, never on the parent's
    /// position, so derivations commute with draws.
    pub fn derive(&self, key: u64) -> RngStream {
        RngStream::new(mix(self.seed, key))
    }

    /// Next uniform draw in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        use rand_chacha::rand_core::RngCore;
        // 53 high bits of a u64, scaled; the standard (0,1) construction.
        (self.chacha.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Next integer uniform on `0..n` (rejection-free scaling is fine at the
    /// magnitudes used here; `n` is an arm count).
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        let u = self.next_f64();
        let i = (u * n as f64) as usize;
        i.min(n - 1)
    }
}

// `rand` integration so `rand_distr` distributions can sample from a stream.
impl rand::RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        rand_chacha::rand_core::RngCore::next_u32(&mut self.chacha)
    }

    fn next_u64(&mut self) -> u64 {
        rand_chacha::rand_core::RngCore::next_u64(&mut self.chacha)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        rand_chacha::rand_core::RngCore::fill_bytes(&mut self.chacha, dst)
    }
}
