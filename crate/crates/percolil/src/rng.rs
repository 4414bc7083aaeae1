//! Counter-based splittable random streams.
//!
//! Every random quantity in this crate is a pure function of a 64-bit key and
//! a counter, so results are independent of scheduling and thread count:
//!
//! * a [`Stream`] draws sequentially by hashing `(key, counter)` and bumping
//!   the counter;
//! * [`indexed_u64`] / [`indexed_unit`] give random access into the same
//!   sequence, which is what per-edge bond generation uses;
//! * [`Stream::child`] derives an independent stream from a `(domain, index)`
//!   pair, which is how trials and environment attempts get disjoint
//!   randomness from one master seed.
//!
//! The mixer is the SplitMix64 finalizer applied to a Weyl sequence; draw and
//! derivation paths use different salts so child keys never collide with
//! outputs of the parent stream.

/// SplitMix64 increment (golden-ratio Weyl constant).
const WEYL: u64 = 0x9e37_79b9_7f4a_7c15;
/// Salt for the sequential/indexed draw path.
const DRAW_SALT: u64 = 0xa076_1d64_78bd_642f;
/// Salt for the child-derivation path.
const CHILD_SALT: u64 = 0xe703_7ed1_a0b4_28db;

/// Labels for the fixed derivation slots used across the crate.
///
/// Keeping these in one place guarantees that e.g. trial streams can never
/// alias the stream that drives bond generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Per-edge uniforms of a bond configuration.
    Edges,
    /// Seeds for successive conditioning attempts.
    EnvAttempt,
    /// Per-trial walk randomness.
    Trial,
    /// Shared-environment seeds in batch runs.
    Env,
    /// Miscellaneous draws (site sampling, shuffles).
    Aux,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Edges => 1,
            Domain::EnvAttempt => 2,
            Domain::Trial => 3,
            Domain::Env => 4,
            Domain::Aux => 5,
        }
    }
}

/// SplitMix64 finalizer: a bijective mix of a 64-bit word.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The `index`-th 64-bit word of the stream identified by `key`.
#[inline]
pub fn indexed_u64(key: u64, index: u64) -> u64 {
    mix(key ^ DRAW_SALT ^ mix(index.wrapping_add(1).wrapping_mul(WEYL)))
}

/// The `index`-th uniform in `[0, 1)` (53-bit resolution) of stream `key`.
#[inline]
pub fn indexed_unit(key: u64, index: u64) -> f64 {
    (indexed_u64(key, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A sequential view of a counter-based stream.
#[derive(Debug, Clone)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream {
            key: mix(seed ^ WEYL),
            counter: 0,
        }
    }

    /// Raw key; two streams with equal keys produce equal sequences.
    pub fn key(&self) -> u64 {
        self.key
    }

    /// Derive an independent stream for `(domain, index)`.
    pub fn child(&self, domain: Domain, index: u64) -> Stream {
        let label = mix(domain.tag() ^ index.wrapping_add(1).wrapping_mul(WEYL));
        Stream {
            key: mix(self.key ^ CHILD_SALT ^ label),
            counter: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = indexed_u64(self.key, self.counter);
        self.counter += 1;
        v
    }

    /// Uniform in `[0, 1)` with 53-bit resolution.
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)` via multiply-shift.
    ///
    /// Consumes exactly one draw regardless of `n` (bias is O(n / 2^64),
    /// irrelevant at the n <= 2d sizes used here); the fixed draw count is
    /// what keeps coupled walks reproducible step for step.
    #[inline]
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Exponential with mean 1, by inversion.
    #[inline]
    pub fn next_exp(&mut self) -> f64 {
        -(-self.next_unit()).ln_1p()
    }

    /// Geometric on {1, 2, ...} with success probability `p`, by inversion.
    ///
    /// `p = 1` returns 1 exactly (the degenerate clock at full degree).
    #[inline]
    pub fn next_geometric(&mut self, p: f64) -> u64 {
        debug_assert!(p > 0.0 && p <= 1.0);
        if p >= 1.0 {
            // Still consume a draw so the stream layout does not depend on
            // the local degree.
            let _ = self.next_u64();
            return 1;
        }
        let u = self.next_unit();
        let k = ((-u).ln_1p() / (-p).ln_1p()).ceil();
        (k as u64).max(1)
    }
}
