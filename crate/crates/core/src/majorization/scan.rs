use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{check_tail_chain, ChainMargins, MinMargin};
use crate::collector::{check_target, tail_almost_uniform, tail_closed_form};
use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::montecarlo::replication_rng;
use crate::sampling::{grid_distributions, random_distribution};
use crate::scalar::{rational_serde, ArithmeticMode, Rational, Value};

pub const DEFAULT_SCAN_MAX_N: usize = 6;
pub const MAX_SCAN_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum SamplingScheme {
    /// Every point `a_i / resolution` of the simplex.
    Grid { resolution: u64 },
    /// Seeded compositions with a random denominator up to `max_denominator`.
    Random { samples: usize, max_denominator: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub n: usize,
    pub c: usize,
    pub k_max: usize,
    pub scheme: SamplingScheme,
    pub max_n: usize,
}

impl ScanConfig {
    pub fn new(n: usize, c: usize, k_max: usize, scheme: SamplingScheme) -> ScanConfig {
        ScanConfig {
            n,
            c,
            k_max,
            scheme,
            max_n: DEFAULT_SCAN_MAX_N,
        }
    }

    fn samples(&self) -> Result<Vec<DrawDistribution>> {
        check_target(self.n, self.c)?;
        if self.n > self.max_n {
            return Err(Error::InstanceTooLarge(format!(
                "scan limited to n <= {} (got {})",
                self.max_n, self.n
            )));
        }
        match self.scheme {
            SamplingScheme::Grid { resolution } => {
                let count = crate::combinatorics::binomial_u128(resolution, self.n as u64).unwrap_or(u128::MAX);
                if count > MAX_SCAN_SAMPLES as u128 {
                    return Err(Error::InstanceTooLarge(format!(
                        "grid has {count} points, limit {MAX_SCAN_SAMPLES}"
                    )));
                }
                grid_distributions(self.n, resolution)
            }
            SamplingScheme::Random {
                samples,
                max_denominator,
                seed,
            } => {
                if samples == 0 {
                    return Err(Error::OutOfRange("at least one sample required".into()));
                }
                if samples > MAX_SCAN_SAMPLES {
                    return Err(Error::InstanceTooLarge(format!("{samples} samples, limit {MAX_SCAN_SAMPLES}")));
                }
                (0..samples as u64)
                    .into_par_iter()
                    .map(|i| random_distribution(&mut replication_rng(seed, i), self.n, max_denominator))
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMargins {
    pub p: DrawDistribution,
    pub margins: ChainMargins,
}

/// A distribution where an exact tail margin is negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub p: DrawDistribution,
    pub c: usize,
    pub k: usize,
    #[serde(with = "rational_serde")]
    pub first_margin: Rational,
    #[serde(with = "rational_serde")]
    pub second_margin: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalMin {
    pub sample: usize,
    pub margin: MinMargin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub config: ScanConfig,
    pub samples: usize,
    pub min_first: GlobalMin,
    pub min_second: GlobalMin,
    pub counterexample: Option<Certificate>,
    pub per_sample: Vec<SampleMargins>,
}

fn margins_at(p: &DrawDistribution, c: usize, k: usize) -> Result<(Rational, Rational)> {
    let n = p.len();
    let tp = tail_closed_form(p, c, k, ArithmeticMode::Exact)?;
    let Value::Exact(tp) = tp else { unreachable!("exact mode") };
    let tv = tail_almost_uniform(n, c, &p.null_mass(), k)?;
    let tu = tail_almost_uniform(n, c, &Rational::from_integer(0.into()), k)?;
    Ok((tp - &tv, tv - tu))
}

/// Evaluates both links of the tail chain `p >= v >= u` exactly at every
/// sample and reports the smallest margins.
pub fn scan_conjecture(config: &ScanConfig) -> Result<ScanReport> {
    let points = config.samples()?;
    let per_sample: Vec<SampleMargins> = points
        .into_par_iter()
        .map(|p| {
            check_tail_chain(&p, config.c, config.k_max).map(|margins| SampleMargins { p, margins })
        })
        .collect::<Result<_>>()?;

    let global = |pick: fn(&ChainMargins) -> &MinMargin| {
        let (sample, m) = per_sample
            .iter()
            .enumerate()
            .min_by(|(ia, a), (ib, b)| pick(&a.margins).value.cmp(&pick(&b.margins).value).then(ia.cmp(ib)))
            .expect("at least one sample");
        GlobalMin {
            sample,
            margin: pick(&m.margins).clone(),
        }
    };
    let min_first = global(|m| &m.first);
    let min_second = global(|m| &m.second);

    let counterexample = match per_sample
        .iter()
        .find(|s| s.margins.first.is_negative() || s.margins.second.is_negative())
    {
        Some(s) => {
            let k = if s.margins.first.is_negative() {
                s.margins.first.k
            } else {
                s.margins.second.k
            };
            let (first_margin, second_margin) = margins_at(&s.p, config.c, k)?;
            Some(Certificate {
                p: s.p.clone(),
                c: config.c,
                k,
                first_margin,
                second_margin,
            })
        }
        None => None,
    };

    Ok(ScanReport {
        config: config.clone(),
        samples: per_sample.len(),
        min_first,
        min_second,
        counterexample,
        per_sample,
    })
}

/// Recomputes a certificate from its recorded distribution; true when the
/// recorded margins are reproduced and one of them is negative.
pub fn verify_certificate(cert: &Certificate) -> Result<bool> {
    let (first, second) = margins_at(&cert.p, cert.c, cert.k)?;
    let negative = first < Rational::from_integer(0.into()) || second < Rational::from_integer(0.into());
    Ok(negative && first == cert.first_margin && second == cert.second_margin)
}
