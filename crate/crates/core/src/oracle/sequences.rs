use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Upper bound on `(n + 1)^k` enumerated sequences.
pub const MAX_SEQUENCES: u64 = 10_000_000;

/// Sequence weights as integers over a common denominator.
trait Weight: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn times(&self, a: u64) -> Self;
    fn accumulate(&mut self, w: &Self);
    fn into_bigint(self) -> BigInt;
}

impl Weight for u128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn times(&self, a: u64) -> Self {
        self * a as u128
    }
    fn accumulate(&mut self, w: &Self) {
        *self += w;
    }
    fn into_bigint(self) -> BigInt {
        BigInt::from(self)
    }
}

impl Weight for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn times(&self, a: u64) -> Self {
        self * a
    }
    fn accumulate(&mut self, w: &Self) {
        *self += w;
    }
    fn into_bigint(self) -> BigInt {
        BigInt::from(self)
    }
}

/// Writes `p_0..p_n` as `a_i / D` with integer `a_i`.
fn integer_weights(p: &DrawDistribution) -> Result<(Vec<u64>, u64)> {
    let mut denom = BigInt::one();
    for w in p.weights() {
        denom = denom.lcm(w.denom());
    }
    let to_u64 = |x: BigInt| {
        x.to_u64()
            .ok_or_else(|| Error::InstanceTooLarge("common denominator exceeds 64 bits".into()))
    };
    let mut numerators = Vec::with_capacity(p.len() + 1);
    numerators.push(0);
    for w in p.weights() {
        numerators.push(to_u64(w.numer() * (&denom / w.denom()))?);
    }
    let d = to_u64(denom)?;
    let used: u64 = numerators.iter().sum();
    numerators[0] = d.saturating_sub(used);
    let total = numerators.iter().sum();
    Ok((numerators, total))
}

/// Walks every draw sequence up to length `depth`; `buckets[d][s]` collects
/// the weight of length-`d` sequences showing exactly `s` distinct non-null
/// coupons.
fn walk<W: Weight>(a: &[u64], depth: usize) -> Vec<Vec<W>> {
    let n = a.len() - 1;
    let mut buckets = vec![vec![W::zero(); n + 1]; depth + 1];
    fn visit<W: Weight>(a: &[u64], depth: usize, d: usize, seen: u64, w: &W, buckets: &mut [Vec<W>]) {
        buckets[d][seen.count_ones() as usize].accumulate(w);
        if d == depth {
            return;
        }
        for (coupon, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let seen = if coupon == 0 { seen } else { seen | 1 << (coupon - 1) };
            visit(a, depth, d + 1, seen, &w.times(ai), buckets);
        }
    }
    visit(a, depth, 0, 0, &W::one(), &mut buckets);
    buckets
}

/// `Pr{T_{c,n}(p) > k}` for every `c` and `k = 0..=k_max`, by summing the
/// probability of each of the `(n+1)^k` draw sequences that shows fewer than
/// `c` distinct non-null coupons. Result: `curves[c - 1][k]`.
pub fn sequence_enumeration_curves(p: &DrawDistribution, k_max: usize) -> Result<Vec<Vec<Rational>>> {
    let n = p.len();
    let count = (n as u64 + 1).checked_pow(k_max as u32).filter(|&c| c <= MAX_SEQUENCES);
    if count.is_none() || k_max > u32::MAX as usize {
        return Err(Error::InstanceTooLarge(format!(
            "(n+1)^k = {}^{k_max} exceeds {MAX_SEQUENCES} sequences",
            n + 1
        )));
    }
    let (a, denom) = integer_weights(p)?;
    let fits = (denom as u128).checked_pow(k_max as u32).is_some();
    let buckets: Vec<Vec<BigInt>> = if fits {
        walk::<u128>(&a, k_max)
            .into_iter()
            .map(|row| row.into_iter().map(Weight::into_bigint).collect())
            .collect()
    } else {
        walk::<BigUint>(&a, k_max)
            .into_iter()
            .map(|row| row.into_iter().map(Weight::into_bigint).collect())
            .collect()
    };
    let mut curves = vec![Vec::with_capacity(k_max + 1); n];
    let mut scale = BigInt::one();
    for row in buckets {
        let mut below = BigInt::zero();
        for c in 1..=n {
            below += &row[c - 1];
            curves[c - 1].push(Rational::new(below.clone(), scale.clone()));
        }
        scale *= denom;
    }
    Ok(curves)
}

/// `Pr{T_{c,n}(p) > k}` by exhaustive sequence enumeration.
pub fn sequence_enumeration_tail(p: &DrawDistribution, c: usize, k: usize) -> Result<Rational> {
    if c == 0 || c > p.len() {
        return Err(Error::OutOfRange(format!("collection target c = {c} out of range")));
    }
    let mut curves = sequence_enumeration_curves(p, k)?;
    Ok(curves.swap_remove(c - 1).pop().expect("k + 1 entries"))
}
