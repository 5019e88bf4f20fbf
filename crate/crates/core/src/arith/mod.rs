//! Exact arithmetic on power-of-two quantities, the random bit stream and
//! Poisson sampling with power-of-two means.

mod poisson;
mod rng;

use num_bigint::BigUint;

pub use poisson::{poisson_pow2, PoissonPow2, DIRECT_EXPONENT_FLOOR};
pub use rng::RandomSource;

/// Exact non-negative count.
pub type BigCount = BigUint;

/// A sampling probability `2^-k`, stored as the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DyadicProb {
    k: u64,
}

impl DyadicProb {
    /// Probability 1.
    pub const ONE: Self = Self { k: 0 };

    pub fn from_exponent(k: u64) -> Self {
        Self { k }
    }

    pub fn exponent(self) -> u64 {
        self.k
    }

    #[must_use]
    pub fn halved(self) -> Self {
        Self { k: self.k + 1 }
    }

    /// Exponent of the Poisson mean `2^t_exp * p`.
    pub fn scaled_exponent(self, t_exp: i64) -> i64 {
        t_exp - self.k as i64
    }
}

/// Whether `2^(t_exp - k) >= thresh`, compared exactly.
pub fn mean_exceeds(t_exp: i64, k: u64, thresh: u64) -> bool {
    debug_assert!(thresh >= 1);
    let e = t_exp - k as i64;
    if e < 0 {
        return false;
    }
    if e >= 64 {
        return true;
    }
    (1u64 << e) >= thresh
}

/// `size * 2^k` as an exact integer.
pub fn estimate(size: u64, k: u64) -> BigCount {
    BigUint::from(size) << k
}
