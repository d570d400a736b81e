use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, rational_serde, Rational};

/// One mix of entries `i` and `j` (0-based):
/// `p'_i = lambda p_i + (1 - lambda) p_j`, `p'_j = (1 - lambda) p_i + lambda p_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingStep {
    pub i: usize,
    pub j: usize,
    #[serde(with = "rational_serde")]
    pub lambda: Rational,
    pub before: DrawDistribution,
    pub after: DrawDistribution,
}

pub fn mix_pair(p: &DrawDistribution, i: usize, j: usize, lambda: &Rational) -> Result<MixingStep> {
    let pi = p.weight(i)?.clone();
    let pj = p.weight(j)?.clone();
    if i == j {
        return Err(Error::OutOfRange(format!("cannot mix entry {i} with itself")));
    }
    if *lambda < Rational::zero() || *lambda > Rational::one() {
        return Err(Error::OutOfRange(format!("lambda = {} outside [0, 1]", format_rational(lambda))));
    }
    let rest = Rational::one() - lambda;
    let new_i = lambda * &pi + &rest * &pj;
    let new_j = &rest * &pi + lambda * &pj;
    let after = p.with_pair(i, new_i, j, new_j)?;
    Ok(MixingStep {
        i,
        j,
        lambda: lambda.clone(),
        before: p.clone(),
        after,
    })
}

/// Mixing steps from `start` to the almost-uniform vector with the same null
/// mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlattenTrace {
    pub start: DrawDistribution,
    /// `(1 - p_0) / n`.
    #[serde(with = "rational_serde")]
    pub target: Rational,
    pub steps: Vec<MixingStep>,
}

impl FlattenTrace {
    pub fn end(&self) -> &DrawDistribution {
        self.steps.last().map_or(&self.start, |s| &s.after)
    }

    /// `start`, then every intermediate vector.
    pub fn vectors(&self) -> impl Iterator<Item = &DrawDistribution> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.after))
    }
}

/// Mixes `(i, j)` so that whichever entry lies below `target` lands on it.
fn straddle_step(p: &DrawDistribution, i: usize, j: usize, target: &Rational, step: usize) -> Result<MixingStep> {
    let pi = p.weight(i)?;
    let pj = p.weight(j)?;
    let (low, high) = if pi < pj { (pi, pj) } else { (pj, pi) };
    if !(low < target && target < high) {
        return Err(Error::ScheduleViolation {
            step: step + 1,
            i: i + 1,
            j: j + 1,
            target: format_rational(target),
        });
    }
    let lambda = (high - target) / (high - low);
    mix_pair(p, i, j, &lambda)
}

/// Flattens `p` to `v = ((1 - p_0)/n, ...)` by at most `n - 1` mixes.
///
/// Without a schedule, each step pairs the lowest index below the target
/// with the lowest index above it. An explicit schedule of 0-based pairs is
/// replayed as given; every pair must straddle the target and the schedule
/// must end exactly at `v`.
pub fn flatten_to_v(p: &DrawDistribution, schedule: Option<&[(usize, usize)]>) -> Result<FlattenTrace> {
    let target = p.flat_share();
    let mut current = p.clone();
    let mut steps = Vec::new();
    match schedule {
        Some(pairs) => {
            for (step, &(i, j)) in pairs.iter().enumerate() {
                let s = straddle_step(&current, i, j, &target, step)?;
                current = s.after.clone();
                steps.push(s);
            }
            if !current.is_almost_uniform() {
                return Err(Error::IncompleteSchedule { steps: steps.len() });
            }
        }
        None => loop {
            let w = current.weights();
            let below = w.iter().position(|x| *x < target);
            let above = w.iter().position(|x| *x > target);
            let (Some(i), Some(j)) = (below, above) else { break };
            let s = straddle_step(&current, i, j, &target, steps.len())?;
            current = s.after.clone();
            steps.push(s);
        },
    }
    debug_assert!(steps.len() < p.len().max(1));
    Ok(FlattenTrace {
        start: p.clone(),
        target,
        steps,
    })
}
