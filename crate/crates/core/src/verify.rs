//! Named verification sweeps over seeded random rational distributions.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collector::{
    binomial_identity_residual, closed_form_curve, corollary_identity_residual, lemma1_residual, recurrence_curve,
};
use crate::combinatorics::Limits;
use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::majorization::{check_theorem2, check_theorem3, check_theorem4, check_theorem5, flatten_to_v};
use crate::montecarlo::replication_rng;
use crate::oracle::{full_collection_cdf_multinomial, markov_tail_curves, sequence_enumeration_curves, MAX_DP_COUPONS, MAX_SEQUENCES};
use crate::sampling::random_distribution;
use crate::scalar::{format_rational, Rational};

/// Denominator bound for sampled weights.
pub const SAMPLE_DENOMINATOR: u64 = 40;
const MAX_REPORTED_FAILURES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Closed-form tail against the first-draw recurrence and the subset chain.
    Theorem1,
    /// The subset power-sum identity behind the closed form.
    Lemma1,
    /// `Pr{T > k} = 1` for `k < c`, and the binomial coefficient identity.
    Corollary1,
    /// Expectation ordering `E(p) >= E(v) >= E(u)`.
    Theorem2,
    /// Full-collection CDF never decreases under a pairwise mix.
    Theorem3,
    /// Full-collection tail ordering, and flattening ends at `v`.
    Theorem4,
    /// Two-coupon tail ordering.
    Theorem5,
    /// Every brute-force oracle against the closed form.
    Oracles,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Theorem1,
        Suite::Lemma1,
        Suite::Corollary1,
        Suite::Theorem2,
        Suite::Theorem3,
        Suite::Theorem4,
        Suite::Theorem5,
        Suite::Oracles,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Lemma1 => "lemma1",
            Suite::Corollary1 => "corollary1",
            Suite::Theorem2 => "theorem2",
            Suite::Theorem3 => "theorem3",
            Suite::Theorem4 => "theorem4",
            Suite::Theorem5 => "theorem5",
            Suite::Oracles => "oracles",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.as_str() == s)
            .ok_or_else(|| Error::OutOfRange(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyParams {
    pub nmax: usize,
    pub kmax: usize,
    pub seed: u64,
    /// Random distributions per coupon count.
    pub samples: usize,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            nmax: 6,
            kmax: 20,
            seed: 0,
            samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: u64,
    pub failed: u64,
    /// The first few failures, for diagnosis.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

/// Accumulates outcomes of one sample.
#[derive(Default)]
struct Tally {
    checks: u64,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(detail());
        }
    }
}

fn sample(params: &VerifyParams, n: usize, s: usize) -> (DrawDistribution, rand_chacha::ChaCha20Rng) {
    let mut rng = replication_rng(params.seed, ((n as u64) << 32) | s as u64);
    let p = random_distribution(&mut rng, n, SAMPLE_DENOMINATOR.max(n as u64 + 1)).expect("denominator exceeds n");
    (p, rng)
}

fn random_unit<R: Rng>(rng: &mut R) -> Rational {
    let d: i64 = rng.random_range(1..=12);
    Rational::new(rng.random_range(0..=d).into(), d.into())
}

fn sample_suite(params: &VerifyParams, min_n: usize, run: impl Fn(&DrawDistribution, &mut rand_chacha::ChaCha20Rng, &mut Tally) -> Result<()> + Sync) -> Result<Tally> {
    let jobs: Vec<(usize, usize)> = (min_n..=params.nmax).flat_map(|n| (0..params.samples).map(move |s| (n, s))).collect();
    let tallies: Vec<Tally> = jobs
        .into_par_iter()
        .map(|(n, s)| {
            let (p, mut rng) = sample(params, n, s);
            let mut tally = Tally::default();
            run(&p, &mut rng, &mut tally).map(|_| tally)
        })
        .collect::<Result<_>>()?;
    let mut total = Tally::default();
    for t in tallies {
        total.checks += t.checks;
        total.failures.extend(t.failures);
    }
    Ok(total)
}

fn at(p: &DrawDistribution) -> String {
    format!("p = ({})", p.to_list_string())
}

pub fn run_suite(suite: Suite, params: &VerifyParams) -> Result<SuiteReport> {
    if params.nmax == 0 {
        return Err(Error::OutOfRange("nmax must be >= 1".into()));
    }
    if matches!(suite, Suite::Theorem1 | Suite::Oracles) && params.nmax > MAX_DP_COUPONS {
        return Err(Error::InstanceTooLarge(format!(
            "suite {suite} runs the subset chain, limited to n <= {MAX_DP_COUPONS}"
        )));
    }
    let limits = Limits::default();
    let kmax = params.kmax;
    let tally = match suite {
        Suite::Theorem1 => sample_suite(params, 1, |p, _, t| {
            let chain = markov_tail_curves::<Rational>(p, kmax)?;
            for c in 1..=p.len() {
                let closed = closed_form_curve::<Rational>(p, c, kmax, &limits)?.0;
                let rec = recurrence_curve::<Rational>(p, c, kmax, &limits)?;
                for k in 0..=kmax {
                    t.check(closed[k] == rec[k] && rec[k] == chain[c - 1][k], || {
                        format!("{}, c = {c}, k = {k}: closed form, recurrence and chain disagree", at(p))
                    });
                }
            }
            Ok(())
        })?,
        Suite::Lemma1 => sample_suite(params, 1, |p, rng, t| {
            let a = p.null_mass();
            let i = rng.random_range(1..=p.len());
            for k in 0..=kmax.min(8) {
                let r = lemma1_residual(p.weights(), &a, i, k)?;
                t.check(r.is_zero(), || format!("{}, i = {i}, k = {k}: residual {}", at(p), format_rational(&r)));
            }
            Ok(())
        })?,
        Suite::Corollary1 => {
            let mut tally = sample_suite(params, 1, |p, _, t| {
                for c in 1..=p.len() {
                    let r = corollary_identity_residual(p, c)?;
                    t.check(r.iter().all(Zero::is_zero), || format!("{}, c = {c}: tail below c is not 1", at(p)));
                }
                Ok(())
            })?;
            for n in 1..=params.nmax {
                for c in 1..=n {
                    let r = binomial_identity_residual(n, c)?;
                    tally.check(r == BigInt::zero(), || format!("n = {n}, c = {c}: binomial identity residual {r}"));
                }
            }
            tally
        }
        Suite::Theorem2 => sample_suite(params, 1, |p, _, t| {
            for c in 1..=p.len() {
                let m = check_theorem2(p, c)?;
                t.check(!m.first.is_negative() && !m.second.is_negative(), || {
                    format!(
                        "{}, c = {c}: margins {} and {}",
                        at(p),
                        format_rational(&m.first),
                        format_rational(&m.second)
                    )
                });
            }
            Ok(())
        })?,
        Suite::Theorem3 => sample_suite(params, 2, |p, rng, t| {
            let n = p.len();
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            let lambda = random_unit(rng);
            let m = check_theorem3(p, i, j, &lambda, kmax)?;
            t.check(!m.is_negative(), || {
                format!("{}, mix ({i}, {j}) by {}: margin {} at k = {}", at(p), format_rational(&lambda), format_rational(&m.value), m.k)
            });
            for step in flatten_to_v(p, None)?.steps {
                let m = check_theorem3(&step.before, step.i, step.j, &step.lambda, kmax)?;
                t.check(!m.is_negative(), || format!("{}: flatten step margin {}", at(&step.before), format_rational(&m.value)));
            }
            Ok(())
        })?,
        Suite::Theorem4 => sample_suite(params, 1, |p, _, t| {
            let m = check_theorem4(p, kmax)?;
            t.check(!m.first.is_negative() && !m.second.is_negative(), || {
                format!("{}: margins {} and {}", at(p), format_rational(&m.first.value), format_rational(&m.second.value))
            });
            let trace = flatten_to_v(p, None)?;
            t.check(*trace.end() == p.flattened() && trace.steps.len() < p.len().max(2), || {
                format!("{}: flattening did not end at v", at(p))
            });
            Ok(())
        })?,
        Suite::Theorem5 => sample_suite(params, 2, |p, _, t| {
            let m = check_theorem5(p, kmax)?;
            t.check(!m.first.is_negative() && !m.second.is_negative(), || {
                format!("{}: margins {} and {}", at(p), format_rational(&m.first.value), format_rational(&m.second.value))
            });
            Ok(())
        })?,
        Suite::Oracles => sample_suite(params, 1, |p, _, t| {
            let n = p.len();
            let chain = markov_tail_curves::<Rational>(p, kmax)?;
            // longest prefix small enough to enumerate
            let mut k_seq = 0;
            while k_seq < kmax && ((n as u64 + 1) as f64).powi(k_seq as i32 + 1) <= MAX_SEQUENCES as f64 {
                k_seq += 1;
            }
            let seq = sequence_enumeration_curves(p, k_seq)?;
            for c in 1..=n {
                let closed = closed_form_curve::<Rational>(p, c, kmax, &limits)?.0;
                for k in 0..=kmax {
                    t.check(closed[k] == chain[c - 1][k], || format!("{}, c = {c}, k = {k}: chain disagrees", at(p)));
                    if k <= k_seq {
                        t.check(closed[k] == seq[c - 1][k], || {
                            format!("{}, c = {c}, k = {k}: sequence enumeration disagrees", at(p))
                        });
                    }
                }
            }
            if n >= 2 {
                let full = closed_form_curve::<Rational>(p, n, kmax.min(14), &limits)?.0;
                for (k, tail) in full.iter().enumerate() {
                    let cdf = full_collection_cdf_multinomial(p, k)?;
                    t.check(Rational::one() - tail == cdf, || format!("{}, k = {k}: multinomial CDF disagrees", at(p)));
                }
            }
            Ok(())
        })?,
    };
    let failed = tally.failures.len() as u64;
    let mut failures = tally.failures;
    failures.truncate(MAX_REPORTED_FAILURES);
    Ok(SuiteReport {
        suite,
        checks: tally.checks,
        failed,
        failures,
    })
}
