//! Keyed counter-based pseudorandom function for lazy edge states.
//!
//! Every edge of a replicate gets one 64-bit uniform `U(e)`, a pure function
//! of `(master_seed, replicate, e)`. The edge is open at level `p` iff
//! `U(e) < floor(p * 2^64)`, so thresholding one draw per edge couples all
//! values of `p` monotonically.

use crate::graph::EdgeId;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-replicate key derived from `(master_seed, replicate)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicateKey(u64);

impl ReplicateKey {
    pub fn new(master_seed: u64, replicate: u64) -> Self {
        let k = mix64(master_seed ^ 0x6A09_E667_F3BC_C908);
        ReplicateKey(mix64(k.wrapping_add(mix64(replicate.wrapping_add(GAMMA)))))
    }

    /// The uniform draw attached to edge `e`.
    #[inline]
    pub fn uniform(self, e: EdgeId) -> u64 {
        mix64(self.0.wrapping_add(e.0.wrapping_add(1).wrapping_mul(GAMMA)))
    }

    /// Seed for auxiliary sequential generators tied to this replicate.
    pub fn stream_seed(self, salt: u64) -> u64 {
        mix64(self.0 ^ mix64(salt))
    }
}

/// `floor(p * 2^64)`, with `p = 1` mapping to `2^64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Threshold(u128);

impl Threshold {
    pub fn new(p: f64) -> Self {
        if !(p > 0.0) {
            Threshold(0)
        } else if p >= 1.0 {
            Threshold(1u128 << 64)
        } else {
            // p * 2^64 is exact in binary floating point; the cast truncates.
            Threshold((p * 18_446_744_073_709_551_616.0) as u128)
        }
    }

    #[inline]
    pub fn admits(self, u: u64) -> bool {
        (u as u128) < self.0
    }
}
