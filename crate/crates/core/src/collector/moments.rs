use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{check_target, recurrence_curve};
use crate::combinatorics::{binomial, for_each_subset, harmonic, k_subsets, layer_coefficient, Limits};
use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::scalar::{ArithmeticMode, Rational, Scalar, Value};

/// Truncated moments stop searching for a cutoff past this many terms.
const MAX_TRUNCATION_TERMS: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HigherMoment {
    pub r: u32,
    pub value: f64,
    /// Certified upper bound on the neglected tail of the series.
    pub truncation_bound: f64,
    pub terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub c: usize,
    pub mode: ArithmeticMode,
    pub expectation: Value,
    pub second_moment: Value,
    pub variance: Value,
    pub higher: Vec<HigherMoment>,
    pub precision_warning: bool,
}

/// `sum_{i<c} coef_i sum_{|J|=i} f(p_0 + P_J)`.
fn layered_sum<S: Scalar>(
    p: &DrawDistribution,
    c: usize,
    limits: &Limits,
    f: impl Fn(&S) -> S,
) -> Result<(S, bool)> {
    let n = p.len();
    check_target(n, c)?;
    limits.check(n, c)?;
    let weights = p.weights_as::<S>();
    let p0 = S::from_rational(&p.null_mass());
    let mut layers = vec![S::zero(); c];
    for_each_subset(&weights, c - 1, &p0, |_, size, x| {
        layers[size] = layers[size].clone() + f(x);
    });
    let s = S::sum_all(
        layers
            .into_iter()
            .enumerate()
            .map(|(i, l)| S::from_bigint(&layer_coefficient(n, c, i)) * l),
    );
    Ok((s.value.clone(), s.lost_precision()))
}

/// `E(T_{c,n}(p)) = sum_i coef_i sum_{|J|=i} 1 / (1 - (p_0 + P_J))`.
pub fn expectation_as<S: Scalar>(p: &DrawDistribution, c: usize, limits: &Limits) -> Result<(S, bool)> {
    layered_sum(p, c, limits, |x: &S| S::one() / (S::one() - x.clone()))
}

/// `E(T^2_{c,n}(p)) = sum_i coef_i sum_{|J|=i} (1 + x_J) / (1 - x_J)^2`, `x_J = p_0 + P_J`.
pub fn second_moment_as<S: Scalar>(p: &DrawDistribution, c: usize, limits: &Limits) -> Result<(S, bool)> {
    layered_sum(p, c, limits, |x: &S| {
        let gap = S::one() - x.clone();
        (S::one() + x.clone()) / (gap.clone() * gap)
    })
}

pub fn expectation(p: &DrawDistribution, c: usize, mode: ArithmeticMode) -> Result<Value> {
    Ok(match mode {
        ArithmeticMode::Exact => expectation_as::<Rational>(p, c, &Limits::default())?.0.into_value(),
        ArithmeticMode::Float => expectation_as::<f64>(p, c, &Limits::default())?.0.into_value(),
    })
}

pub fn second_moment(p: &DrawDistribution, c: usize, mode: ArithmeticMode) -> Result<Value> {
    Ok(match mode {
        ArithmeticMode::Exact => second_moment_as::<Rational>(p, c, &Limits::default())?.0.into_value(),
        ArithmeticMode::Float => second_moment_as::<f64>(p, c, &Limits::default())?.0.into_value(),
    })
}

/// Expectation through the first-draw recurrence
/// `E_{c,n}(p) = (1 + sum_l p_l E_{c-1,n-1}(p^(l))) / (1 - p_0)`, `E_{1,m}(q) = 1 / (1 - q_0)`.
pub fn expectation_recurrence(p: &DrawDistribution, c: usize) -> Result<Rational> {
    let n = p.len();
    check_target(n, c)?;
    Limits::default().check(n, c)?;
    let p0 = p.null_mass();
    let w = p.weights();
    let null_of = |r: u64| -> Rational {
        (0..n).filter(|j| r >> j & 1 == 1).fold(p0.clone(), |a, j| a + &w[j])
    };
    let mut layer: HashMap<u64, Rational> = k_subsets(n, c - 1)
        .map(|r| (r, Rational::one() / (Rational::one() - null_of(r))))
        .collect();
    for size in (0..c - 1).rev() {
        let mut next = HashMap::new();
        for r in k_subsets(n, size) {
            let mut acc = Rational::one();
            for l in (0..n).filter(|l| r >> l & 1 == 0) {
                acc += &w[l] * &layer[&(r | 1 << l)];
            }
            next.insert(r, acc / (Rational::one() - null_of(r)));
        }
        layer = next;
    }
    Ok(layer.remove(&0).expect("empty collection state"))
}

/// `E(T_{c,n}(u)) = n (H_n - H_{n-c})`.
pub fn expectation_uniform(n: usize, c: usize) -> Result<Rational> {
    check_target(n, c)?;
    let n_r = Rational::from_integer(BigInt::from(n));
    Ok(n_r * (harmonic(n as u64) - harmonic((n - c) as u64)))
}

/// `E(T_{c,n}(v)) = n (H_n - H_{n-c}) / (1 - v0)`.
pub fn expectation_almost_uniform(n: usize, c: usize, v0: &Rational) -> Result<Rational> {
    if *v0 < Rational::zero() || *v0 >= Rational::one() {
        return Err(Error::OutOfRange("null mass v0 must lie in [0, 1)".into()));
    }
    Ok(expectation_uniform(n, c)? / (Rational::one() - v0))
}

/// `E(T_{c,n}(u)) - c`, which decreases to 0 as `n` grows.
pub fn limit_gap_uniform(n: usize, c: usize) -> Result<Rational> {
    Ok(expectation_uniform(n, c)? - Rational::from_integer(BigInt::from(c)))
}

/// Largest `p_0 + P_J` over `|J| <= c - 1`: the null mass plus the `c - 1`
/// heaviest weights. Every tail term decays at most this fast.
fn decay_rate(p: &DrawDistribution, c: usize) -> f64 {
    let mut w = p.weights_f64();
    w.sort_by(|a, b| b.total_cmp(a));
    let p0 = Scalar::to_float(&p.null_mass());
    (p0 + w.iter().take(c - 1).sum::<f64>()).min(1.0)
}

/// `sum_{i<c} C(n-i-1, n-c) C(n, i)`, so that `tail(k) <= A rho^k`.
fn decay_constant(n: usize, c: usize) -> f64 {
    (0..c)
        .map(|i| Scalar::to_float(&Rational::from_integer(binomial((n - i - 1) as u64, (n - c) as u64) * binomial(n as u64, i as u64))))
        .sum()
}

/// Bound on `sum_{k > cutoff} ((k+1)^r - k^r) A rho^k`.
fn remainder_bound(r: u32, a: f64, rho: f64, cutoff: usize) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    let rf = r as f64;
    let k1 = (cutoff + 1) as f64;
    // ((k+1)^r - k^r) <= r (k+1)^(r-1); consecutive ratio of that envelope
    // is at most ((k1+2)/(k1+1))^(r-1) rho for every k >= cutoff + 1
    let first = rf * (k1 + 1.0).powf(rf - 1.0) * a * rho.powf(k1);
    let q = ((k1 + 2.0) / (k1 + 1.0)).powf(rf - 1.0) * rho;
    if q >= 1.0 {
        f64::INFINITY
    } else {
        first / (1.0 - q)
    }
}

/// `E(T^r_{c,n}(p)) = sum_k ((k+1)^r - k^r) Pr{T > k}`, truncated where the
/// geometric remainder bound drops below `epsilon`. Returns the value and
/// the bound.
pub fn moment_r(p: &DrawDistribution, c: usize, r: u32, epsilon: f64) -> Result<HigherMoment> {
    check_target(p.len(), c)?;
    if r < 1 {
        return Err(Error::OutOfRange("moment order r must be >= 1".into()));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::OutOfRange("epsilon must be positive".into()));
    }
    let rho = decay_rate(p, c);
    if rho >= 1.0 {
        return Err(Error::OutOfRange("tail does not decay: p_0 + P_J reaches 1".into()));
    }
    let a = decay_constant(p.len(), c);
    let mut cutoff = c;
    let mut bound = remainder_bound(r, a, rho, cutoff);
    while bound >= epsilon {
        cutoff = (cutoff + 1).max(cutoff * 9 / 8);
        if cutoff > MAX_TRUNCATION_TERMS {
            return Err(Error::InstanceTooLarge(format!(
                "moment of order {r} needs more than {MAX_TRUNCATION_TERMS} terms"
            )));
        }
        bound = remainder_bound(r, a, rho, cutoff);
    }
    let tail = recurrence_curve::<f64>(p, c, cutoff, &Limits::default())?;
    let rf = r as i32;
    let weights = (0..=cutoff).map(|k| ((k + 1) as f64).powi(rf) - (k as f64).powi(rf));
    let value = f64::sum_all(weights.zip(tail).map(|(w, t)| w * t)).value;
    Ok(HigherMoment {
        r,
        value,
        truncation_bound: bound,
        terms: cutoff + 1,
    })
}

/// Expectation, second moment and variance in `mode`, plus truncated moments
/// of orders `3..=max_order`.
pub fn moments(p: &DrawDistribution, c: usize, mode: ArithmeticMode, max_order: u32, epsilon: f64) -> Result<MomentReport> {
    fn core<S: Scalar>(p: &DrawDistribution, c: usize) -> Result<(Value, Value, Value, bool)> {
        let limits = Limits::default();
        let (e, w1) = expectation_as::<S>(p, c, &limits)?;
        let (m2, w2) = second_moment_as::<S>(p, c, &limits)?;
        let mut var = m2.clone() - e.clone() * e.clone();
        if S::MODE == ArithmeticMode::Float && var < S::zero() {
            var = S::zero();
        }
        Ok((e.into_value(), m2.into_value(), var.into_value(), w1 || w2))
    }
    let (expectation, second_moment, variance, precision_warning) = match mode {
        ArithmeticMode::Exact => core::<Rational>(p, c)?,
        ArithmeticMode::Float => core::<f64>(p, c)?,
    };
    let higher = (3..=max_order)
        .map(|r| moment_r(p, c, r, epsilon))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentReport {
        c,
        mode,
        expectation,
        second_moment,
        variance,
        higher,
        precision_warning,
    })
}
