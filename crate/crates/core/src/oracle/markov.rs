use serde::Serialize;

use crate::collector::{TailCurve, TailMethod};
use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::scalar::{ArithmeticMode, Rational, Scalar};

/// The dense state vector has `2^n` entries.
pub const MAX_DP_COUPONS: usize = 20;

/// One state of the collection chain: the set of coupons collected so far
/// and its probability after the current number of draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetState<S> {
    pub collected: u64,
    pub mass: S,
}

/// `Q_{J,H}`: `p_l` if `H = J + {l}`, `p_0 + P_J` if `H = J`, else 0.
pub fn transition_probability(p: &DrawDistribution, from: u64, to: u64) -> Result<Rational> {
    let full = if p.len() == 64 { u64::MAX } else { (1u64 << p.len()) - 1 };
    if from & !full != 0 || to & !full != 0 {
        return Err(Error::IndexOutOfRange { index: 64, len: p.len() });
    }
    if from == to {
        return Ok(p.null_mass() + p.mask_mass(from)?);
    }
    let added = to & !from;
    if to & from == from && added.count_ones() == 1 {
        return Ok(p.weight(added.trailing_zeros() as usize)?.clone());
    }
    Ok(Rational::from_integer(0.into()))
}

/// Distribution of the collected set `X_m`, started from `X_0 = {}`.
#[derive(Debug, Clone)]
pub struct SubsetChain<S> {
    n: usize,
    weights: Vec<S>,
    stay: Vec<S>,
    mass: Vec<S>,
    steps: usize,
}

impl<S: Scalar> SubsetChain<S> {
    pub fn new(p: &DrawDistribution) -> Result<Self> {
        let n = p.len();
        if n > MAX_DP_COUPONS {
            return Err(Error::InstanceTooLarge(format!(
                "subset chain supports n <= {MAX_DP_COUPONS}, got {n}"
            )));
        }
        let weights = p.weights_as::<S>();
        let states = 1usize << n;
        let mut stay = Vec::with_capacity(states);
        stay.push(S::from_rational(&p.null_mass()));
        for mask in 1..states {
            let low = mask.trailing_zeros() as usize;
            let v = stay[mask & (mask - 1)].clone() + weights[low].clone();
            stay.push(v);
        }
        let mut mass = vec![S::zero(); states];
        mass[0] = S::one();
        Ok(SubsetChain {
            n,
            weights,
            stay,
            mass,
            steps: 0,
        })
    }

    /// Advances one draw.
    pub fn step(&mut self) {
        let mut next = vec![S::zero(); self.mass.len()];
        for (state, m) in self.mass.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            next[state] = next[state].clone() + m.clone() * self.stay[state].clone();
            for l in 0..self.n {
                if state >> l & 1 == 0 {
                    let to = state | 1 << l;
                    next[to] = next[to].clone() + m.clone() * self.weights[l].clone();
                }
            }
        }
        self.mass = next;
        self.steps += 1;
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn total_mass(&self) -> S {
        self.mass.iter().fold(S::zero(), |a, m| a + m.clone())
    }

    /// `Pr{|X_m| < c}`, i.e. `Pr{T_c > m}`.
    pub fn mass_below(&self, c: usize) -> S {
        self.mass
            .iter()
            .enumerate()
            .filter(|(state, _)| (state.count_ones() as usize) < c)
            .fold(S::zero(), |a, (_, m)| a + m.clone())
    }

    /// Mass on the absorbing state `{1..n}`.
    pub fn absorbed_mass(&self) -> S {
        self.mass.last().cloned().unwrap_or_else(S::zero)
    }

    pub fn states(&self) -> impl Iterator<Item = SubsetState<S>> + '_ {
        self.mass.iter().enumerate().map(|(s, m)| SubsetState {
            collected: s as u64,
            mass: m.clone(),
        })
    }
}

/// `Pr{T_{c,n}(p) > k}` for `k = 0..=k_max` and every `c = 1..=n`:
/// `curves[c - 1][k]`.
pub fn markov_tail_curves<S: Scalar>(p: &DrawDistribution, k_max: usize) -> Result<Vec<Vec<S>>> {
    let n = p.len();
    let mut chain = SubsetChain::<S>::new(p)?;
    let mut curves = vec![Vec::with_capacity(k_max + 1); n];
    for k in 0..=k_max {
        if k > 0 {
            chain.step();
        }
        let mut by_size = vec![S::zero(); n + 1];
        for (state, m) in chain.mass.iter().enumerate() {
            let size = state.count_ones() as usize;
            by_size[size] = by_size[size].clone() + m.clone();
        }
        let mut below = S::zero();
        for c in 1..=n {
            below = below + by_size[c - 1].clone();
            curves[c - 1].push(below.clone());
        }
    }
    Ok(curves)
}

/// Tail curve for one target as a [`TailCurve`].
pub fn markov_tail_curve(p: &DrawDistribution, c: usize, k_max: usize, mode: ArithmeticMode) -> Result<TailCurve> {
    if c == 0 || c > p.len() {
        return Err(Error::OutOfRange(format!("collection target c = {c} out of range")));
    }
    let tail = match mode {
        ArithmeticMode::Exact => markov_tail_curves::<Rational>(p, k_max)?.swap_remove(c - 1).into_iter().map(Scalar::into_value).collect(),
        ArithmeticMode::Float => markov_tail_curves::<f64>(p, k_max)?.swap_remove(c - 1).into_iter().map(Scalar::into_value).collect(),
    };
    Ok(TailCurve {
        c,
        k_max,
        method: TailMethod::OracleDp,
        mode,
        precision_warning: false,
        tail,
    })
}

/// `Pr{T_{c,n}(p) > k}` by propagating the subset chain `k` steps, exactly.
pub fn markov_tail_dp(p: &DrawDistribution, c: usize, k: usize) -> Result<Rational> {
    if c == 0 || c > p.len() {
        return Err(Error::OutOfRange(format!("collection target c = {c} out of range")));
    }
    let mut chain = SubsetChain::<Rational>::new(p)?;
    for _ in 0..k {
        chain.step();
    }
    Ok(chain.mass_below(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use num_traits::{One, Zero};

    fn p(s: &str) -> DrawDistribution {
        DrawDistribution::parse(s).unwrap()
    }

    #[test]
    fn dp_examples() {
        assert_eq!(markov_tail_dp(&p("0.3,0.5"), 2, 2).unwrap(), rational(7, 10));
        assert_eq!(markov_tail_dp(&p("0.3,0.5"), 1, 0).unwrap(), rational(1, 1));
        // 3! surjective sequences out of 27
        assert_eq!(markov_tail_dp(&p("1/3,1/3,1/3"), 3, 3).unwrap(), rational(7, 9));
    }

    #[test]
    fn mass_is_conserved_exactly() {
        let mut chain = SubsetChain::<Rational>::new(&p("1/16,1/6,1/4,1/8,7/24")).unwrap();
        for _ in 0..12 {
            chain.step();
            assert!(chain.total_mass().is_one());
        }
        assert_eq!(chain.steps(), 12);
        assert_eq!(chain.states().count(), 32);
    }

    #[test]
    fn transition_rows_sum_to_one() {
        let q = p("1/5,1/7,1/3");
        for from in 0..8u64 {
            let row: Rational = (0..8u64).map(|to| transition_probability(&q, from, to).unwrap()).sum();
            assert!(row.is_one(), "row {from}");
            for to in 0..8u64 {
                let t = transition_probability(&q, from, to).unwrap();
                if to & from != from {
                    assert!(t.is_zero(), "chain only grows");
                }
            }
        }
        assert!(transition_probability(&q, 0, 8).is_err());
    }

    #[test]
    fn absorbs_with_positive_weights() {
        for q in ["0.2,0.3", "1/16,1/6,1/4,1/8,7/24", "0.05,0.1,0.15,0.2"] {
            let mut chain = SubsetChain::<f64>::new(&p(q)).unwrap();
            for _ in 0..400 {
                chain.step();
            }
            assert!((chain.absorbed_mass() - 1.0).abs() < 1e-6, "{q}");
        }
    }

    #[test]
    fn rejects_large_instances() {
        let q = DrawDistribution::uniform(21).unwrap();
        assert!(matches!(SubsetChain::<f64>::new(&q), Err(Error::InstanceTooLarge(_))));
        assert!(markov_tail_dp(&p("0.5"), 2, 1).is_err());
    }
}
