//! Exact evaluation of the tail, PMF and moments of `T_{c,n}(p)`.

mod identities;
mod moments;
mod tail;

use serde::{Deserialize, Serialize};

pub use identities::{binomial_identity_residual, corollary_identity_residual, lemma1_residual};
pub use moments::{
    expectation, expectation_almost_uniform, expectation_as, expectation_recurrence, expectation_uniform,
    limit_gap_uniform, moment_r, moments, second_moment, second_moment_as, HigherMoment, MomentReport,
};
pub use tail::{
    closed_form_curve, pmf, pmf_curve, recurrence_curve, tail_almost_uniform, tail_almost_uniform_curve,
    tail_closed_form, tail_curve, tail_recurrence,
};

pub use crate::combinatorics::harmonic;

use crate::error::{Error, Result};
use crate::scalar::{ArithmeticMode, Value};

/// How a tail curve was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMethod {
    ClosedForm,
    Recurrence,
    OracleDp,
    MonteCarlo,
}

impl std::str::FromStr for TailMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" => Ok(TailMethod::ClosedForm),
            "recurrence" => Ok(TailMethod::Recurrence),
            "oracle-dp" => Ok(TailMethod::OracleDp),
            "monte-carlo" => Ok(TailMethod::MonteCarlo),
            other => Err(Error::Parse {
                input: other.into(),
                position: 0,
                reason: "expected closed-form, recurrence, oracle-dp or monte-carlo".into(),
            }),
        }
    }
}

/// `Pr{T_{c,n}(p) > k}` for `k = 0..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub c: usize,
    pub k_max: usize,
    pub method: TailMethod,
    pub mode: ArithmeticMode,
    /// Set when a float evaluation summed terms more than `1e12` times
    /// larger than its result.
    pub precision_warning: bool,
    pub tail: Vec<Value>,
}

impl TailCurve {
    /// `Pr{T = k} = tail(k - 1) - tail(k)` for `k = 1..=k_max`.
    pub fn pmf(&self) -> Vec<Value> {
        self.tail
            .windows(2)
            .map(|w| match (&w[0], &w[1]) {
                (Value::Exact(a), Value::Exact(b)) => Value::Exact(a - b),
                (a, b) => Value::Float((a.to_f64() - b.to_f64()).max(0.0)),
            })
            .collect()
    }
}

pub(crate) fn check_target(n: usize, c: usize) -> Result<()> {
    if c == 0 || c > n {
        return Err(Error::OutOfRange(format!("collection target c = {c} must satisfy 1 <= c <= n = {n}")));
    }
    Ok(())
}

pub(crate) fn check_k(k: usize) -> Result<u32> {
    u32::try_from(k).map_err(|_| Error::OutOfRange(format!("k = {k} too large")))
}
