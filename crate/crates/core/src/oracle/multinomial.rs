use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Cap on the positive compositions `(k_1..k_{n-2})` visited.
pub const MAX_COMPOSITIONS: u64 = 5_000_000;

/// Draw counts `N_0^{(k)}..N_n^{(k)}` after `k` draws.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountVector {
    pub counts: Vec<u64>,
}

impl CountVector {
    pub fn draws(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Multinomial probability `k! / prod k_i! * prod p_i^{k_i}`, coupon 0 first.
    pub fn probability(&self, p: &DrawDistribution) -> Result<Rational> {
        if self.counts.len() != p.len() + 1 {
            return Err(Error::OutOfRange("count vector must have n + 1 entries".into()));
        }
        let table = Pascal::new(self.draws() as usize);
        let mut left = self.draws() as usize;
        let mut prob = Rational::one();
        let probs = std::iter::once(p.null_mass()).chain(p.weights().iter().cloned());
        for (&k, pi) in self.counts.iter().zip(probs) {
            prob *= Rational::from_integer(table.get(left, k as usize).clone()) * num_traits::pow(pi, k as usize);
            left -= k as usize;
        }
        Ok(prob)
    }
}

/// Binomial rows `0..=size` built by additions only.
struct Pascal {
    rows: Vec<Vec<BigInt>>,
}

impl Pascal {
    fn new(size: usize) -> Self {
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(size + 1);
        for m in 0..=size {
            let mut row = vec![BigInt::one(); m + 1];
            for j in 1..m {
                row[j] = &rows[m - 1][j - 1] + &rows[m - 1][j];
            }
            rows.push(row);
        }
        Pascal { rows }
    }

    fn get(&self, m: usize, j: usize) -> &BigInt {
        &self.rows[m][j]
    }
}

fn powers(base: &Rational, k: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(k + 1);
    let mut acc = Rational::one();
    for _ in 0..=k {
        out.push(acc.clone());
        acc *= base;
    }
    out
}

/// `Pr{T_{n,n}(p) <= k}` from the multinomial law of the counts.
///
/// Conditioning on positive counts `k_1..k_{n-2}` of the first `n - 2`
/// coupons (with `s = k - sum k_i` draws left), the last two coupons must
/// both appear among the `s` draws that fall in `{0, n-1, n}`. With the
/// renormalised triple `q_0, q_{n-1}, q_n` that probability is
/// `1 - (q_0 + q_{n-1})^s - (q_0 + q_n)^s + q_0^s`.
pub fn full_collection_cdf_multinomial(p: &DrawDistribution, k: usize) -> Result<Rational> {
    let n = p.len();
    if n < 2 {
        return Err(Error::OutOfRange("the multinomial route needs n >= 2".into()));
    }
    let w = p.weights();
    let p0 = p.null_mass();
    if k < n {
        return Ok(Rational::zero());
    }
    if n == 2 {
        let one = Rational::one();
        return Ok(one - num_traits::pow(&p0 + &w[0], k) - num_traits::pow(&p0 + &w[1], k) + num_traits::pow(p0, k));
    }

    let free = n - 2;
    let compositions = crate::combinatorics::binomial_u128(k as u64, free as u64).unwrap_or(u128::MAX);
    if compositions > MAX_COMPOSITIONS as u128 {
        return Err(Error::InstanceTooLarge(format!(
            "{compositions} count vectors exceed the cap of {MAX_COMPOSITIONS}"
        )));
    }

    let triple = &p0 + &w[n - 2] + &w[n - 1];
    let q0 = &p0 / &triple;
    let q_a = &w[n - 2] / &triple;
    let q_b = &w[n - 1] / &triple;
    let rest = Rational::one() - w[..free].iter().sum::<Rational>();
    let rest_pow = powers(&rest, k);
    let both_seen: Vec<Rational> = {
        let pa = powers(&(&q0 + &q_a), k);
        let pb = powers(&(&q0 + &q_b), k);
        let p0s = powers(&q0, k);
        (0..=k).map(|s| Rational::one() - &pa[s] - &pb[s] + &p0s[s]).collect()
    };
    let weight_pows: Vec<Vec<Rational>> = w[..free].iter().map(|wi| powers(wi, k)).collect();
    let pascal = Pascal::new(k);

    // odometer over positive parts with sum <= k; `used` tracks the sum
    let mut parts = vec![1usize; free];
    let mut used = free;
    let mut total = Rational::zero();
    loop {
        let s = k - used;
        let mut left = k;
        let mut coef = BigInt::one();
        let mut term = Rational::one();
        for (i, &ki) in parts.iter().enumerate() {
            coef *= pascal.get(left, ki);
            left -= ki;
            term *= &weight_pows[i][ki];
        }
        // the remaining s draws fill the last slot, C(s, s) = 1
        term *= Rational::from_integer(coef) * &rest_pow[s] * &both_seen[s];
        total += term;

        let mut idx = free;
        loop {
            if idx == 0 {
                return Ok(total);
            }
            idx -= 1;
            if used < k {
                parts[idx] += 1;
                used += 1;
                break;
            }
            used -= parts[idx] - 1;
            parts[idx] = 1;
        }
    }
}
