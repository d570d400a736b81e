use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::mixing::mix_pair;
use crate::collector::{check_target, closed_form_curve, expectation_almost_uniform, expectation_as, tail_almost_uniform_curve};
use crate::combinatorics::Limits;
use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, rational_serde, Rational};

/// Smallest margin over `k = 0..=k_max` and the first `k` attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMargin {
    #[serde(with = "rational_serde")]
    pub value: Rational,
    pub k: usize,
}

impl MinMargin {
    fn of(diffs: impl IntoIterator<Item = Rational>) -> MinMargin {
        let mut best: Option<MinMargin> = None;
        for (k, value) in diffs.into_iter().enumerate() {
            if best.as_ref().is_none_or(|b| value < b.value) {
                best = Some(MinMargin { value, k });
            }
        }
        best.unwrap_or(MinMargin {
            value: Rational::zero(),
            k: 0,
        })
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative()
    }
}

/// Margins of `tail(p) >= tail(v)` (first) and `tail(v) >= tail(u)` (second).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMargins {
    pub first: MinMargin,
    pub second: MinMargin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationMargins {
    #[serde(with = "rational_serde")]
    pub first: Rational,
    #[serde(with = "rational_serde")]
    pub second: Rational,
}

fn exact_tail(p: &DrawDistribution, c: usize, k_max: usize) -> Result<Vec<Rational>> {
    Ok(closed_form_curve::<Rational>(p, c, k_max, &Limits::default())?.0)
}

/// Minimum over `k <= k_max` of `Pr{T(after) <= k} - Pr{T(before) <= k}`
/// for full collection after mixing `i` and `j` with `lambda`.
pub fn check_theorem3(p: &DrawDistribution, i: usize, j: usize, lambda: &Rational, k_max: usize) -> Result<MinMargin> {
    let step = mix_pair(p, i, j, lambda)?;
    let n = p.len();
    let before = exact_tail(&step.before, n, k_max)?;
    let after = exact_tail(&step.after, n, k_max)?;
    // CDF difference equals the tail difference with roles swapped
    Ok(MinMargin::of(before.into_iter().zip(after).map(|(b, a)| b - a)))
}

/// Tail margins of `p` against `v` (same null mass) and `v` against `u`.
pub fn check_tail_chain(p: &DrawDistribution, c: usize, k_max: usize) -> Result<ChainMargins> {
    check_target(p.len(), c)?;
    let n = p.len();
    let tp = exact_tail(p, c, k_max)?;
    let tv = tail_almost_uniform_curve::<Rational>(n, c, &p.null_mass(), k_max)?.0;
    let tu = tail_almost_uniform_curve::<Rational>(n, c, &Rational::zero(), k_max)?.0;
    Ok(ChainMargins {
        first: MinMargin::of(tp.iter().zip(&tv).map(|(a, b)| a - b)),
        second: MinMargin::of(tv.iter().zip(&tu).map(|(a, b)| a - b)),
    })
}

pub fn check_theorem4(p: &DrawDistribution, k_max: usize) -> Result<ChainMargins> {
    check_tail_chain(p, p.len(), k_max)
}

pub fn check_theorem5(p: &DrawDistribution, k_max: usize) -> Result<ChainMargins> {
    if p.len() < 2 {
        return Err(Error::OutOfRange("two-coupon collection needs n >= 2".into()));
    }
    check_tail_chain(p, 2, k_max)
}

/// `E(p) - E(v)` and `E(v) - E(u)` for collecting `c` coupons.
pub fn check_theorem2(p: &DrawDistribution, c: usize) -> Result<ExpectationMargins> {
    let n = p.len();
    let (ep, _) = expectation_as::<Rational>(p, c, &Limits::default())?;
    let ev = expectation_almost_uniform(n, c, &p.null_mass())?;
    let eu = expectation_almost_uniform(n, c, &Rational::zero())?;
    Ok(ExpectationMargins {
        first: ep - &ev,
        second: ev - eu,
    })
}

/// `sum 1/r_l - n^2` for positive `r` summing to one.
pub fn lemma2_residual(r: &[Rational]) -> Result<Rational> {
    if r.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if let Some((index, bad)) = r.iter().enumerate().find(|(_, x)| !x.is_positive()) {
        return Err(Error::InvalidWeight {
            index,
            value: format_rational(bad),
        });
    }
    let total: Rational = r.iter().sum();
    if !total.is_one() {
        return Err(Error::OutOfRange(format!("entries sum to {}, not 1", format_rational(&total))));
    }
    let n = Rational::from_integer(r.len().into());
    Ok(r.iter().map(|x| x.recip()).sum::<Rational>() - &n * &n)
}

/// Convexity gap `(t-y)f(x) + (z-x)f(t) - (t-y)f(z) - (z-x)f(y)` for
/// `f(x) = x^s`, with `x < y < t` and `x < z < t` in `[0, 1]`.
pub fn lemma3_gap(s: u32, x: &Rational, y: &Rational, z: &Rational, t: &Rational) -> Result<Rational> {
    let unit = Rational::zero()..=Rational::one();
    if ![x, y, z, t].iter().all(|v| unit.contains(v)) {
        return Err(Error::OutOfRange("arguments must lie in [0, 1]".into()));
    }
    if !(x < y && x < z && y < t && z < t) {
        return Err(Error::OutOfRange("need x < y < t and x < z < t".into()));
    }
    let f = |v: &Rational| num_traits::pow(v.clone(), s as usize);
    let a = t - y;
    let b = z - x;
    Ok(&a * f(x) + &b * f(t) - &a * f(z) - &b * f(y))
}

/// `-(n-1) x^k + n (x + (1-x)/n)^k`, the two-coupon tail of `v` at null mass `x`.
pub fn fnk(n: usize, k: usize, x: &Rational) -> Rational {
    let nn = Rational::from_integer(n.into());
    let share = x + (Rational::one() - x) / &nn;
    &nn * num_traits::pow(share, k) - (&nn - Rational::one()) * num_traits::pow(x.clone(), k)
}

/// Smallest forward difference of `fnk` along an ascending grid.
pub fn check_fnk_monotone(n: usize, k: usize, grid: &[Rational]) -> Result<Rational> {
    if n < 2 {
        return Err(Error::OutOfRange("n must be at least 2".into()));
    }
    if grid.len() < 2 {
        return Err(Error::OutOfRange("grid needs at least two points".into()));
    }
    let unit = Rational::zero()..=Rational::one();
    if let Some(bad) = grid.iter().find(|x| !unit.contains(x)) {
        return Err(Error::OutOfRange(format!("grid point {} outside [0, 1]", format_rational(bad))));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::OutOfRange("grid must be strictly increasing".into()));
    }
    let values: Vec<Rational> = grid.iter().map(|x| fnk(n, k, x)).collect();
    Ok(values.windows(2).map(|w| &w[1] - &w[0]).min().expect("two points"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collector::tail_almost_uniform;
    use crate::scalar::rational;

    fn example() -> DrawDistribution {
        DrawDistribution::parse("1/16,1/6,1/4,1/8,7/24").unwrap()
    }

    #[test]
    fn mixing_margins() {
        let p = example();
        assert!(check_theorem3(&p, 0, 1, &Rational::one(), 25).unwrap().value.is_zero());
        // first step of the worked example
        let step_lambda = (rational(7, 24) - rational(43, 240)) / (rational(7, 24) - rational(1, 8));
        let m = check_theorem3(&p, 3, 4, &step_lambda, 25).unwrap();
        assert!(!m.is_negative());
        let q = DrawDistribution::parse("1/10,2/10,3/10,1/5").unwrap();
        assert!(!check_theorem3(&q, 0, 2, &rational(1, 2), 25).unwrap().is_negative());
    }

    #[test]
    fn flat_input_has_zero_first_link() {
        let v = DrawDistribution::almost_uniform(4, &rational(1, 5)).unwrap();
        let m = check_theorem4(&v, 20).unwrap();
        assert!(m.first.value.is_zero());
        assert!(!m.second.is_negative());
        let u = DrawDistribution::uniform(4).unwrap();
        let m = check_theorem5(&u, 20).unwrap();
        assert!(m.first.value.is_zero() && m.second.value.is_zero());
    }

    #[test]
    fn orderings_on_worked_example() {
        let m = check_theorem2(&example(), 3).unwrap();
        assert!(m.first.is_positive());
        assert!(m.second.is_positive());
        let m = check_theorem5(&example(), 30).unwrap();
        assert!(!m.first.is_negative() && !m.second.is_negative());
        for c in 1..=5 {
            let m = check_tail_chain(&example(), c, 30).unwrap();
            assert!(!m.second.is_negative());
        }
    }

    #[test]
    fn single_coupon_chain() {
        // c = 1: p and v share p_0, so the first link vanishes
        let p = example();
        let m = check_tail_chain(&p, 1, 10).unwrap();
        assert!(m.first.value.is_zero());
        assert!(!m.second.is_negative());
    }

    #[test]
    fn reciprocal_sum_examples() {
        assert!(lemma2_residual(&[rational(1, 2), rational(1, 2)]).unwrap().is_zero());
        assert_eq!(lemma2_residual(&[rational(1, 3), rational(2, 3)]).unwrap(), rational(1, 2));
        assert!(lemma2_residual(&[rational(1, 10), rational(2, 10), rational(7, 10)]).unwrap().is_positive());
        assert!(lemma2_residual(&[rational(1, 2), rational(1, 3)]).is_err());
        assert!(lemma2_residual(&[rational(3, 2), rational(-1, 2)]).is_err());
    }

    #[test]
    fn convexity_gap_examples() {
        let (x, y, z, t) = (rational(0, 1), rational(1, 4), rational(1, 2), rational(3, 4));
        assert!(lemma3_gap(1, &x, &y, &z, &t).unwrap().is_zero());
        assert_eq!(lemma3_gap(2, &x, &y, &z, &t).unwrap(), rational(1, 8));
        // t + x = y + z: the gap is (t - y)(f(x) + f(t) - f(y) - f(z))
        let s = 3;
        let direct = num_traits::pow(x.clone(), s) + num_traits::pow(t.clone(), s)
            - num_traits::pow(y.clone(), s)
            - num_traits::pow(z.clone(), s);
        assert_eq!(lemma3_gap(s as u32, &x, &y, &z, &t).unwrap(), (&t - &y) * direct);
        assert!(lemma3_gap(2, &y, &x, &z, &t).is_err());
        assert!(lemma3_gap(2, &x, &y, &z, &rational(3, 2)).is_err());
    }

    #[test]
    fn fnk_matches_two_coupon_tail() {
        for n in 2..=5 {
            for k in 0..8 {
                let x = rational(1, 3);
                assert_eq!(fnk(n, k, &x), tail_almost_uniform(n, 2, &x, k).unwrap());
            }
        }
    }

    #[test]
    fn fnk_monotone() {
        let grid: Vec<Rational> = (0..=100).map(|i| rational(i, 100)).collect();
        assert!(check_fnk_monotone(3, 0, &grid).unwrap().is_zero());
        assert!(check_fnk_monotone(3, 1, &grid).unwrap().is_zero());
        assert!(!check_fnk_monotone(3, 5, &grid).unwrap().is_negative());
        assert!(check_fnk_monotone(1, 5, &grid).is_err());
        assert!(check_fnk_monotone(3, 5, &[rational(1, 2), rational(3, 2)]).is_err());
    }
}
