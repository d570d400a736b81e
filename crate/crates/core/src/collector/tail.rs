use std::collections::HashMap;

use super::{check_k, check_target, TailCurve, TailMethod};
use crate::combinatorics::{binomial, for_each_subset, k_subsets, layer_coefficient, Limits};
use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::scalar::{ArithmeticMode, Rational, Scalar, Value};

/// `A_i(k) = sum_{|J| = i} (p_0 + P_J)^k` for every layer `i < c` and
/// `k <= k_max`.
fn layer_power_sums<S: Scalar>(p: &DrawDistribution, c: usize, k_max: u32, limits: &Limits) -> Result<Vec<Vec<S>>> {
    limits.check(p.len(), c)?;
    let weights = p.weights_as::<S>();
    let p0 = S::from_rational(&p.null_mass());
    let mut sums = vec![vec![S::zero(); k_max as usize + 1]; c];
    for_each_subset(&weights, c - 1, &p0, |_, size, x| {
        let row = &mut sums[size];
        let mut power = S::one();
        for slot in row.iter_mut() {
            *slot = slot.clone() + power.clone();
            power = power * x.clone();
        }
    });
    Ok(sums)
}

/// Closed-form tail curve and whether float cancellation was flagged.
pub fn closed_form_curve<S: Scalar>(
    p: &DrawDistribution,
    c: usize,
    k_max: usize,
    limits: &Limits,
) -> Result<(Vec<S>, bool)> {
    let n = p.len();
    check_target(n, c)?;
    let k_max32 = check_k(k_max)?;
    let sums = layer_power_sums::<S>(p, c, k_max32, limits)?;
    let coef: Vec<S> = (0..c).map(|i| S::from_bigint(&layer_coefficient(n, c, i))).collect();
    let mut warn = false;
    let curve = (0..=k_max)
        .map(|k| {
            let s = S::sum_all((0..c).map(|i| coef[i].clone() * sums[i][k].clone()));
            warn |= s.lost_precision();
            s.value.clamp_probability()
        })
        .collect();
    Ok((curve, warn))
}

/// `Pr{T_{c,n}(p) > k}` by the inclusion-exclusion closed form.
pub fn tail_closed_form(p: &DrawDistribution, c: usize, k: usize, mode: ArithmeticMode) -> Result<Value> {
    let curve = tail_curve(p, c, k, mode, TailMethod::ClosedForm, &Limits::default())?;
    Ok(curve.tail.into_iter().last().expect("k_max + 1 entries"))
}

/// Whole tail curve by the closed form or the one-step recurrence.
pub fn tail_curve(
    p: &DrawDistribution,
    c: usize,
    k_max: usize,
    mode: ArithmeticMode,
    method: TailMethod,
    limits: &Limits,
) -> Result<TailCurve> {
    fn build<S: Scalar>(
        p: &DrawDistribution,
        c: usize,
        k_max: usize,
        method: TailMethod,
        limits: &Limits,
    ) -> Result<(Vec<Value>, bool)> {
        let (curve, warn) = match method {
            TailMethod::ClosedForm => closed_form_curve::<S>(p, c, k_max, limits)?,
            TailMethod::Recurrence => (recurrence_curve::<S>(p, c, k_max, limits)?, false),
            other => {
                return Err(Error::OutOfRange(format!(
                    "{other:?} curves are produced by the oracle and montecarlo modules"
                )))
            }
        };
        Ok((curve.into_iter().map(S::into_value).collect(), warn))
    }
    let (tail, precision_warning) = match mode {
        ArithmeticMode::Exact => build::<Rational>(p, c, k_max, method, limits)?,
        ArithmeticMode::Float => build::<f64>(p, c, k_max, method, limits)?,
    };
    Ok(TailCurve {
        c,
        k_max,
        method,
        mode,
        precision_warning,
        tail,
    })
}

/// Tail curve from conditioning on the first draw:
/// `tail_{c,n}(p; k) = p_0 tail_{c,n}(p; k-1) + sum_l p_l tail_{c-1,n-1}(p^(l); k-1)`,
/// with `tail_{1,m}(q; k) = q_0^k`.
///
/// A sub-problem is identified by the set `R` of coupons already collected:
/// it is `T_{c-|R|, n-|R|}` on the weights outside `R`, with null mass
/// `p_0 + P_R`. All terms are nonnegative, so the float path is stable.
pub fn recurrence_curve<S: Scalar>(p: &DrawDistribution, c: usize, k_max: usize, limits: &Limits) -> Result<Vec<S>> {
    let n = p.len();
    check_target(n, c)?;
    check_k(k_max)?;
    limits.check(n, c)?;
    let weights = p.weights_as::<S>();
    let p0 = S::from_rational(&p.null_mass());
    let mass = |mask: u64| {
        (0..n)
            .filter(|j| mask >> j & 1 == 1)
            .fold(p0.clone(), |acc, j| acc + weights[j].clone())
    };

    // deepest layer: one more coupon completes the target
    let mut layer: HashMap<u64, Vec<S>> = k_subsets(n, c - 1)
        .map(|r| {
            let x = mass(r);
            let mut row = Vec::with_capacity(k_max + 1);
            let mut power = S::one();
            for _ in 0..=k_max {
                row.push(power.clone());
                power = power * x.clone();
            }
            (r, row)
        })
        .collect();

    for size in (0..c - 1).rev() {
        let mut next = HashMap::new();
        for r in k_subsets(n, size) {
            let x = mass(r);
            let mut row = Vec::with_capacity(k_max + 1);
            row.push(S::one());
            for k in 1..=k_max {
                let mut v = x.clone() * row[k - 1].clone();
                for l in (0..n).filter(|l| r >> l & 1 == 0) {
                    v = v + weights[l].clone() * layer[&(r | 1 << l)][k - 1].clone();
                }
                row.push(v);
            }
            next.insert(r, row);
        }
        layer = next;
    }
    Ok(layer.remove(&0).expect("empty collection state"))
}

/// `Pr{T_{c,n}(p) > k}` by the first-draw recurrence, exactly.
pub fn tail_recurrence(p: &DrawDistribution, c: usize, k: usize) -> Result<Rational> {
    let curve = recurrence_curve::<Rational>(p, c, k, &Limits::default())?;
    Ok(curve.into_iter().last().expect("k + 1 entries"))
}

/// Tail for the almost-uniform vector with null mass `v0`, using binomial
/// layer weights instead of subset enumeration.
pub fn tail_almost_uniform_curve<S: Scalar>(n: usize, c: usize, v0: &S, k_max: usize) -> Result<(Vec<S>, bool)> {
    check_target(n, c)?;
    check_k(k_max)?;
    if *v0 < S::zero() || *v0 >= S::one() {
        return Err(Error::OutOfRange("null mass v0 must lie in [0, 1)".into()));
    }
    let n_s = S::from_u64(n as u64);
    let layers: Vec<(S, S)> = (0..c)
        .map(|i| {
            let w = S::from_bigint(&(layer_coefficient(n, c, i) * binomial(n as u64, i as u64)));
            let frac = S::from_u64(i as u64) / n_s.clone();
            let base = v0.clone() * (S::one() - frac.clone()) + frac;
            (w, base)
        })
        .collect();
    let mut powers: Vec<S> = vec![S::one(); c];
    let mut warn = false;
    let mut curve = Vec::with_capacity(k_max + 1);
    for _ in 0..=k_max {
        let s = S::sum_all(layers.iter().zip(&powers).map(|((w, _), pw)| w.clone() * pw.clone()));
        warn |= s.lost_precision();
        curve.push(s.value.clamp_probability());
        for (pw, (_, base)) in powers.iter_mut().zip(&layers) {
            *pw = pw.clone() * base.clone();
        }
    }
    Ok((curve, warn))
}

/// `Pr{T_{c,n}(v) > k}` for the almost-uniform `v` with null mass `v0`, exactly.
pub fn tail_almost_uniform(n: usize, c: usize, v0: &Rational, k: usize) -> Result<Rational> {
    let (curve, _) = tail_almost_uniform_curve::<Rational>(n, c, v0, k)?;
    Ok(curve.into_iter().last().expect("k + 1 entries"))
}

/// `Pr{T_{c,n}(p) = k} = tail(k-1) - tail(k)` for `k >= 1`.
pub fn pmf(p: &DrawDistribution, c: usize, k: usize, mode: ArithmeticMode) -> Result<Value> {
    if k == 0 {
        return Err(Error::OutOfRange("pmf is defined for k >= 1".into()));
    }
    let curve = tail_curve(p, c, k, mode, TailMethod::ClosedForm, &Limits::default())?;
    Ok(curve.pmf().into_iter().last().expect("k entries"))
}

/// PMF values for `k = 1..=k_max` from a closed-form curve.
pub fn pmf_curve(p: &DrawDistribution, c: usize, k_max: usize, mode: ArithmeticMode) -> Result<Vec<Value>> {
    Ok(tail_curve(p, c, k_max, mode, TailMethod::ClosedForm, &Limits::default())?.pmf())
}
