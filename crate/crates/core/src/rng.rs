//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the experiment seed. Child
//! streams for a `(run, role)` pair select a distinct ChaCha stream id, so
//! two children of the same parent never share a keystream and the draws of
//! one run do not depend on how many other runs exist or where they execute.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a child stream is used for inside one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Role {
    Init = 1,
    Selection = 2,
    Variation = 3,
    Restart = 4,
}

const ROLE_BITS: u32 = 8;

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream for `(run, role)`.
    ///
    /// Children share the parent's key but use stream id `run << 8 | role`,
    /// which is injective for `run < 2^56` and never the parent's stream 0.
    pub fn derive(&self, run: u64, role: Role) -> Self {
        assert!(run < 1 << (64 - ROLE_BITS), "run index out of range");
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream((run << ROLE_BITS) | role as u64);
        RandomStream {
            seed: self.seed,
            inner,
        }
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

/// Seed for run `run` of a batch started from `base_seed` (SplitMix64 finaliser).
pub fn run_seed(base_seed: u64, run: usize) -> u64 {
    let mut z = base_seed.wrapping_add((run as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
