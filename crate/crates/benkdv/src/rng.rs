//! Deterministic seeded randomness.
//!
//! Reproducibility across runs, platforms, and worker counts is a hard
//! contract here, so random draws come from an explicit splitmix64 stream or
//! from stateless hashes instead of a global RNG.

/// splitmix64 state advance; also usable as a stateless mixer.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic 64-bit hash of (seed, tag); used to give every Fourier mode
/// or trial its own reproducible value independent of evaluation order.
#[inline]
pub fn mix(seed: u64, tag: u64) -> u64 {
    let mut s = seed ^ tag.wrapping_mul(0x9e3779b97f4a7c15);
    splitmix64(&mut s);
    splitmix64(&mut s)
}

/// Minimal sequential generator over a splitmix64 stream.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    /// Derives an independent child stream; children with distinct tags do
    /// not overlap for any practical draw count.
    pub fn child(&self, tag: u64) -> Self {
        Rng { state: mix(self.state, tag) }
    }

    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

/// Uniform phase in [0, 2π) derived statelessly from (seed, tag).
pub fn phase(seed: u64, tag: u64) -> f64 {
    let bits = mix(seed, tag);
    (bits >> 11) as f64 * (std::f64::consts::TAU / (1u64 << 53) as f64)
}
