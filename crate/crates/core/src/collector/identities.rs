use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{check_target, closed_form_curve};
use crate::combinatorics::{binomial, k_subsets, layer_coefficient, Limits};
use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::scalar::Rational;

/// `tail(k) - 1` for `k = 0..c-1`, exact. Every entry is zero because
/// `T_{c,n} >= c`.
pub fn corollary_identity_residual(p: &DrawDistribution, c: usize) -> Result<Vec<Rational>> {
    check_target(p.len(), c)?;
    let (curve, _) = closed_form_curve::<Rational>(p, c, c - 1, &Limits::default())?;
    Ok(curve.into_iter().map(|t| t - Rational::one()).collect())
}

/// `sum_{i<c} (-1)^{c-1-i} C(n-i-1, n-c) C(n, i) - 1`.
pub fn binomial_identity_residual(n: usize, c: usize) -> Result<BigInt> {
    check_target(n, c)?;
    let sum: BigInt = (0..c)
        .map(|i| layer_coefficient(n, c, i) * binomial(n as u64, i as u64))
        .sum();
    Ok(sum - BigInt::one())
}

/// Difference between the two sides of the subset identity
///
/// `sum_l y_l sum_{J in S_{i-1,n}(l)} (a + y_l + Y_J)^k = sum_{J in S_{i,n}} Y_J (a + Y_J)^k`,
///
/// where `S_{i,n}(l)` ranges over `i`-subsets avoiding `l` and `Y_J` sums `y`
/// over `J`.
pub fn lemma1_residual(y: &[Rational], a: &Rational, i: usize, k: usize) -> Result<Rational> {
    let n = y.len();
    if n == 0 || n > 63 {
        return Err(Error::OutOfRange(format!("need 1 <= n <= 63 values, got {n}")));
    }
    if i == 0 || i > n {
        return Err(Error::OutOfRange(format!("subset size i = {i} must satisfy 1 <= i <= {n}")));
    }
    if y.iter().any(|v| !v.is_positive()) {
        return Err(Error::OutOfRange("all y values must be positive".into()));
    }
    if a.is_negative() {
        return Err(Error::OutOfRange("a must be nonnegative".into()));
    }
    let mass = |mask: u64| -> Rational {
        (0..n).filter(|j| mask >> j & 1 == 1).fold(Rational::zero(), |acc, j| acc + &y[j])
    };

    let mut lhs = Rational::zero();
    for (l, yl) in y.iter().enumerate() {
        // (i-1)-subsets of the other n-1 indices, spread back around l
        let low = (1u64 << l) - 1;
        for m in k_subsets(n - 1, i - 1) {
            let mask = (m & low) | ((m & !low) << 1);
            let base = a + yl + mass(mask);
            lhs += yl * num_traits::pow(base, k);
        }
    }
    let mut rhs = Rational::zero();
    for mask in k_subsets(n, i) {
        let yj = mass(mask);
        rhs += &yj * num_traits::pow(a + &yj, k);
    }
    Ok(lhs - rhs)
}
