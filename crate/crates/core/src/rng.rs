//! Seed derivation.
//!
//! Every stochastic operation takes a [`Seed`]. Independent streams are
//! obtained with [`Seed::derive`], which maps `(seed, index)` through the
//! SplitMix64 finalizer, so per-trial seeds can be computed from
//! `(master, point, trial)` without any shared generator state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A 64-bit seed for a reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed(pub u64);

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    /// Child seed for sub-stream `index`.
    pub fn derive(self, index: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(index.wrapping_mul(GOLDEN_GAMMA) ^ 0xD1B5_4A32_D192_ED03)))
    }

    /// Child seed for a path of indices, e.g. `(point, trial)`.
    pub fn derive_path(self, path: &[u64]) -> Seed {
        path.iter().fold(self, |s, &i| s.derive(i))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}
