//! Seeded random rational distributions for sweeps and scans.

use num_bigint::BigInt;
use rand::seq::index::sample;
use rand::Rng;

use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Uniformly random weights `a_i / d` with integer `a_i >= 1` for the `n`
/// coupons and null numerator `a_0 >= 0`, all summing to `d`.
pub fn random_composition<R: Rng + ?Sized>(rng: &mut R, n: usize, d: u64) -> Result<DrawDistribution> {
    if n == 0 || d < n as u64 || (n == 1 && d < 2) {
        return Err(Error::OutOfRange(format!("denominator {d} too small for {n} coupons")));
    }
    loop {
        // shift a_0 up by one so every part is positive, then cut d + 1
        // into n + 1 positive parts
        let mut cuts: Vec<u64> = sample(rng, d as usize, n).into_iter().map(|c| c as u64 + 1).collect();
        cuts.sort_unstable();
        let mut parts = Vec::with_capacity(n + 1);
        let mut prev = 0;
        for &cut in &cuts {
            parts.push(cut - prev);
            prev = cut;
        }
        parts.push(d + 1 - prev);
        let weights: Vec<Rational> = parts[1..]
            .iter()
            .map(|&a| Rational::new(BigInt::from(a), BigInt::from(d)))
            .collect();
        if let Ok(p) = DrawDistribution::new(weights) {
            return Ok(p);
        }
    }
}

/// Random distribution on `n` coupons with a random common denominator in
/// `[n + 1, max_denominator]`.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize, max_denominator: u64) -> Result<DrawDistribution> {
    let low = n as u64 + 1;
    if max_denominator < low {
        return Err(Error::OutOfRange(format!("max denominator must be at least {low}")));
    }
    let d = rng.random_range(low..=max_denominator);
    random_composition(rng, n, d)
}

/// Every distribution `a_i / d` with `a_1..a_n >= 1`, `a_0 >= 0`, in
/// lexicographic order of `(a_1, ..., a_n)`.
pub fn grid_distributions(n: usize, d: u64) -> Result<Vec<DrawDistribution>> {
    if n == 0 || d < n as u64 {
        return Err(Error::OutOfRange(format!("resolution {d} too small for {n} coupons")));
    }
    let mut out = Vec::new();
    let mut parts = Vec::with_capacity(n);
    fn rec(n: usize, d: u64, left: u64, parts: &mut Vec<u64>, out: &mut Vec<DrawDistribution>) {
        if parts.len() == n {
            let weights = parts.iter().map(|&a| Rational::new(BigInt::from(a), BigInt::from(d))).collect();
            if let Ok(p) = DrawDistribution::new(weights) {
                out.push(p);
            }
            return;
        }
        let reserve = (n - parts.len() - 1) as u64;
        for a in 1..=left.saturating_sub(reserve) {
            parts.push(a);
            rec(n, d, left - a, parts, out);
            parts.pop();
        }
    }
    rec(n, d, d, &mut parts, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::replication_rng;
    use num_traits::One;

    #[test]
    fn compositions_are_valid_and_reproducible() {
        let mut a = replication_rng(1, 0);
        let mut b = replication_rng(1, 0);
        for n in 1..=7 {
            for _ in 0..50 {
                let p = random_distribution(&mut a, n, 40).unwrap();
                assert_eq!(p.len(), n);
                assert!(p.total() <= Rational::one());
                assert_eq!(p, random_distribution(&mut b, n, 40).unwrap());
            }
        }
    }

    #[test]
    fn grid_counts() {
        // a_0 + ... + a_n = d with a_i >= 1 for i >= 1: C(d, n) points
        assert_eq!(grid_distributions(2, 4).unwrap().len(), 6);
        assert_eq!(grid_distributions(4, 10).unwrap().len(), 210);
        // n = 1 drops the point with weight 1
        assert_eq!(grid_distributions(1, 5).unwrap().len(), 4);
    }

    #[test]
    fn grid_covers_uniform() {
        let grid = grid_distributions(3, 6).unwrap();
        assert!(grid.iter().any(|p| p.is_almost_uniform() && p.null_mass() == Rational::new(1.into(), 2.into())));
    }
}
