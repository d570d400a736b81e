//! Exact binomials, harmonic numbers and bitmask subset enumeration.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Largest `n` representable by the `u64` subset masks.
pub const MAX_COUPONS: usize = 64;

/// Default cap on enumerated subsets per call.
pub const DEFAULT_MAX_SUBSETS: u64 = 1 << 24;

/// Resource limits for subset-enumerating evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_subsets: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_subsets: DEFAULT_MAX_SUBSETS,
        }
    }
}

impl Limits {
    /// Errors unless the subsets of `{1..n}` with fewer than `c` elements fit
    /// under the cap.
    pub fn check(&self, n: usize, c: usize) -> Result<u128> {
        let required = subsets_below(n, c);
        if required > self.max_subsets as u128 {
            return Err(Error::EnumerationCap {
                required,
                cap: self.max_subsets,
            });
        }
        Ok(required)
    }
}

/// `C(n, k)` in `u128`, `None` on overflow. Zero when `k > n`.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n - k + i) is divisible by i; split via gcd to delay overflow
        let num = n as u128 - k as u128 + i;
        let g = num_integer::gcd(acc, i);
        let (a, d) = (acc / g, i / g);
        acc = a.checked_mul(num / d)?;
    }
    Some(acc)
}

/// `C(n, k)` exactly, widening to `BigInt` when `u128` overflows.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if let Some(v) = binomial_u128(n, k) {
        return BigInt::from(v);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 1..=k {
        acc = acc * BigInt::from(n - k + i) / BigInt::from(i);
    }
    acc
}

/// Number of subsets of an `n`-set with at most `c - 1` elements.
pub fn subsets_below(n: usize, c: usize) -> u128 {
    (0..c.min(n + 1))
        .map(|i| binomial_u128(n as u64, i as u64).unwrap_or(u128::MAX))
        .fold(0u128, |a, b| a.saturating_add(b))
}

/// `(-1)^{c-1-i} C(n-i-1, n-c)`, the weight of the size-`i` layer in the
/// tail formula for collecting `c` of `n`.
pub fn layer_coefficient(n: usize, c: usize, i: usize) -> BigInt {
    debug_assert!(i < c && c <= n);
    let mag = binomial((n - i - 1) as u64, (n - c) as u64);
    if (c - 1 - i).is_multiple_of(2) {
        mag
    } else {
        -mag
    }
}

/// `H_l = 1 + 1/2 + ... + 1/l`, with `H_0 = 0`.
pub fn harmonic(l: u64) -> Rational {
    let mut h = Rational::zero();
    for i in 1..=l {
        h += Rational::new(BigInt::one(), BigInt::from(i));
    }
    h
}

/// Visits every subset `J` of `{0..weights.len()}` with `|J| <= max_size`,
/// passing its mask, size and `base + sum_{j in J} weights[j]`. The running
/// sum is extended by one addition per visited subset.
pub fn for_each_subset<S, F>(weights: &[S], max_size: usize, base: &S, mut visit: F)
where
    S: Scalar,
    F: FnMut(u64, usize, &S),
{
    fn walk<S: Scalar, F: FnMut(u64, usize, &S)>(
        weights: &[S],
        max_size: usize,
        start: usize,
        mask: u64,
        size: usize,
        sum: &S,
        visit: &mut F,
    ) {
        visit(mask, size, sum);
        if size == max_size {
            return;
        }
        for j in start..weights.len() {
            let next = sum.clone() + weights[j].clone();
            walk(weights, max_size, j + 1, mask | (1u64 << j), size + 1, &next, visit);
        }
    }
    walk(weights, max_size, 0, 0, 0, base, &mut visit);
}

/// Iterator over the `k`-element masks of an `n`-set in increasing order
/// (Gosper's hack).
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit: u128 = 1u128 << n;
    let mut next: Option<u128> = (k <= n).then(|| (1u128 << k) - 1);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            let low = cur & cur.wrapping_neg();
            let ripple = cur + low;
            let succ = (((ripple ^ cur) >> 2) / low) | ripple;
            (succ < limit).then_some(succ)
        };
        Some(cur as u64)
    })
}
