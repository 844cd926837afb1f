//! Bernoulli numbers, computed once per process and cached.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

static CACHE: OnceLock<RwLock<Vec<BigRational>>> = OnceLock::new();

/// `B_n` with the `B_1 = -1/2` convention.
///
/// Uses the defining recurrence sum_{j=0}^{m} C(m+1,j) B_j = 0. The cache
/// only ever grows; concurrent readers share it.
pub fn bernoulli(n: usize) -> BigRational {
    let lock = CACHE.get_or_init(|| RwLock::new(vec![BigRational::one()]));
    {
        let cache = lock.read().expect("bernoulli cache poisoned");
        if n < cache.len() {
            return cache[n].clone();
        }
    }
    let mut cache = lock.write().expect("bernoulli cache poisoned");
    while cache.len() <= n {
        let m = cache.len();
        // sum over j < m of C(m+1, j) B_j, with the binomial updated in place
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for (j, b) in cache.iter().enumerate() {
            if !b.is_zero() {
                acc += BigRational::from(binom.clone()) * b;
            }
            // C(m+1, j) -> C(m+1, j+1)
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        let next = -acc / BigRational::from(BigInt::from(m + 1));
        cache.push(next);
    }
    cache[n].clone()
}
