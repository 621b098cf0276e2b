//! Reproducible random streams.
//!
//! A [`RngStream`] is a 64-bit key. Child streams are derived by hashing the
//! parent key with an index, so replication `r` of an experiment always sees
//! the same generator no matter which worker runs it. Generators are ChaCha8,
//! a counter-based cipher RNG.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags separating the independent random inputs of an experiment.
pub mod domain {
    pub const SIMULATION: u64 = 0x5349_4d55_4c41_5445;
    pub const BOOTSTRAP: u64 = 0x424f_4f54_5354_5250;
    pub const ORACLE: u64 = 0x4f52_4143_4c45_0001;
    pub const CUMULANT: u64 = 0x4355_4d55_4c41_4e54;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    key: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { key: splitmix64(seed) }
    }

    /// Child stream `hash(self, index)`.
    pub fn fork(&self, index: u64) -> Self {
        RngStream {
            key: splitmix64(self.key ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019))),
        }
    }

    pub fn seed(&self) -> u64 {
        self.key
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn forks_are_deterministic_and_distinct() {
        let root = RngStream::new(7);
        assert_eq!(root.fork(3), RngStream::new(7).fork(3));
        assert_ne!(root.fork(3), root.fork(4));
        assert_ne!(root.fork(3).fork(0), root.fork(0).fork(3));
        let a: u64 = root.fork(1).rng().random();
        let b: u64 = root.fork(1).rng().random();
        assert_eq!(a, b);
    }
}
