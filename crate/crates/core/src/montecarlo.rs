//! Seeded simulation of `T_{c,n}(p)`.
//!
//! Replication `i` draws from its own ChaCha20 stream: the generator is keyed
//! by the 64-bit seed and the stream id is `i`. Replications can therefore
//! run in any order or thread and the report is identical for a given
//! config.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collector::{TailCurve, TailMethod};
use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::scalar::{ArithmeticMode, Value};

/// Name and version of the replication stream scheme, recorded in reports.
pub const RNG_SCHEME: &str = "chacha20-stream/v1";

/// A replication that has not finished after this many draws is aborted.
pub const DEFAULT_DRAW_GUARD: u64 = 1_000_000_000;

/// Generator for replication `index` under `seed`.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Inverse-CDF coupon sampler over `{0, 1, ..., n}`.
#[derive(Debug, Clone)]
pub struct CouponSampler {
    /// `cumulative[j] = p_0 + p_1 + ... + p_j`.
    cumulative: Vec<f64>,
}

impl CouponSampler {
    pub fn new(p: &DrawDistribution) -> Self {
        let mut cumulative = Vec::with_capacity(p.len() + 1);
        let mut acc = crate::scalar::Scalar::to_float(&p.null_mass());
        cumulative.push(acc);
        for w in p.weights_f64() {
            acc += w;
            cumulative.push(acc);
        }
        CouponSampler { cumulative }
    }

    pub fn coupons(&self) -> usize {
        self.cumulative.len() - 1
    }

    /// One draw; 0 is the null coupon.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative.partition_point(|&c| c <= u).min(self.coupons())
    }

    /// Draws until `c` distinct non-null coupons have appeared. `None` if
    /// `guard` draws were not enough.
    pub fn waiting_time<R: Rng + ?Sized>(&self, c: usize, rng: &mut R, guard: u64) -> Option<u64> {
        let mut seen = 0u64;
        let mut distinct = 0usize;
        let mut draws = 0u64;
        while distinct < c {
            if draws == guard {
                return None;
            }
            draws += 1;
            let coupon = self.draw(rng);
            if coupon != 0 {
                let bit = 1u64 << (coupon - 1);
                if seen & bit == 0 {
                    seen |= bit;
                    distinct += 1;
                }
            }
        }
        Some(draws)
    }
}

/// Draws coupons from `p` until `c` distinct ones are collected and returns
/// the number of draws.
pub fn sample_waiting_time<R: Rng + ?Sized>(p: &DrawDistribution, c: usize, rng: &mut R) -> Result<u64> {
    crate::collector::check_target(p.len(), c)?;
    CouponSampler::new(p)
        .waiting_time(c, rng, DEFAULT_DRAW_GUARD)
        .ok_or_else(|| Error::InstanceTooLarge(format!("replication exceeded {DEFAULT_DRAW_GUARD} draws")))
}

/// Waiting times of `replications` independent replications, in replication
/// order.
pub fn sample_many(p: &DrawDistribution, c: usize, replications: u64, seed: u64, guard: u64) -> Result<Vec<Option<u64>>> {
    crate::collector::check_target(p.len(), c)?;
    let sampler = CouponSampler::new(p);
    Ok((0..replications)
        .into_par_iter()
        .map(|i| sampler.waiting_time(c, &mut replication_rng(seed, i), guard))
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub p: DrawDistribution,
    pub c: usize,
    pub replications: u64,
    pub seed: u64,
    pub k_max: usize,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::OutOfRange("replications must be >= 1".into()));
        }
        crate::collector::check_target(self.p.len(), self.c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub k: usize,
    pub estimate: f64,
    pub std_error: f64,
}

/// Raw estimates; no monotone correction is applied across `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub rng: String,
    pub seed: u64,
    pub replications: u64,
    pub c: usize,
    pub k_max: usize,
    pub aborted: u64,
    pub mean: f64,
    pub variance: f64,
    pub mean_std_error: f64,
    pub tail: Vec<TailEstimate>,
}

impl EstimateReport {
    pub fn to_tail_curve(&self) -> TailCurve {
        TailCurve {
            c: self.c,
            k_max: self.k_max,
            method: TailMethod::MonteCarlo,
            mode: ArithmeticMode::Float,
            precision_warning: false,
            tail: self.tail.iter().map(|t| Value::Float(t.estimate)).collect(),
        }
    }
}

/// Sample mean, unbiased variance and standard error of the mean.
pub(crate) fn summarize(samples: impl Iterator<Item = u64>) -> (u64, f64, f64, f64) {
    let (mut count, mut mean, mut m2) = (0u64, 0.0f64, 0.0f64);
    for x in samples {
        count += 1;
        let x = x as f64;
        let delta = x - mean;
        mean += delta / count as f64;
        m2 += delta * (x - mean);
    }
    let variance = if count > 1 { m2 / (count - 1) as f64 } else { 0.0 };
    let se = if count > 0 { (variance / count as f64).sqrt() } else { 0.0 };
    (count, mean, variance, se)
}

/// Tail estimate `#{T > k} / N` with binomial standard errors, plus moments
/// of `T`.
pub fn estimate_tail(config: &SimulationConfig) -> Result<EstimateReport> {
    config.validate()?;
    let times = sample_many(&config.p, config.c, config.replications, config.seed, DEFAULT_DRAW_GUARD)?;
    let aborted = times.iter().filter(|t| t.is_none()).count() as u64;

    // exceed[k] = #{T > k}; aborted runs exceed every k
    let mut hist = vec![0u64; config.k_max + 2];
    for t in &times {
        let bucket = t.map_or(config.k_max + 1, |t| (t as usize).min(config.k_max + 1));
        hist[bucket] += 1;
    }
    let n = config.replications as f64;
    let mut at_most = 0u64;
    let tail = (0..=config.k_max)
        .map(|k| {
            at_most += hist[k];
            let estimate = (config.replications - at_most) as f64 / n;
            TailEstimate {
                k,
                estimate,
                std_error: (estimate * (1.0 - estimate) / n).sqrt(),
            }
        })
        .collect();

    let (_, mean, variance, mean_std_error) = summarize(times.iter().flatten().copied());
    Ok(EstimateReport {
        rng: RNG_SCHEME.to_string(),
        seed: config.seed,
        replications: config.replications,
        c: config.c,
        k_max: config.k_max,
        aborted,
        mean,
        variance,
        mean_std_error,
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(p: &str, c: usize, replications: u64, seed: u64, k_max: usize) -> SimulationConfig {
        SimulationConfig {
            p: DrawDistribution::parse(p).unwrap(),
            c,
            replications,
            seed,
            k_max,
        }
    }

    #[test]
    fn waiting_time_is_at_least_target() {
        let p = DrawDistribution::parse("1/16,1/6,1/4,1/8,7/24").unwrap();
        let mut rng = replication_rng(3, 0);
        for c in 1..=5 {
            for _ in 0..200 {
                assert!(sample_waiting_time(&p, c, &mut rng).unwrap() >= c as u64);
            }
        }
        assert!(sample_waiting_time(&p, 6, &mut rng).is_err());
    }

    #[test]
    fn single_target_is_geometric() {
        let report = estimate_tail(&config("0.3,0.4", 1, 200_000, 11, 5)).unwrap();
        // success 1 - p0 = 0.7
        assert!((report.mean - 1.0 / 0.7).abs() < 3.0 * report.mean_std_error + 1e-3);
        let exact = 0.3f64.powi(3);
        let t3 = &report.tail[3];
        assert!((t3.estimate - exact).abs() < 3.0 * t3.std_error.max(1e-4));
    }

    #[test]
    fn tail_estimate_near_exact() {
        let report = estimate_tail(&config("0.3,0.5", 2, 100_000, 5, 6)).unwrap();
        let t2 = &report.tail[2];
        assert!((t2.estimate - 0.7).abs() < 3.0 * t2.std_error);
        assert_eq!(report.tail[0].estimate, 1.0);
        assert_eq!(report.tail[1].estimate, 1.0);
        assert!(report.tail.iter().all(|t| (0.0..=1.0).contains(&t.estimate) && t.std_error >= 0.0));
    }

    #[test]
    fn reports_are_deterministic() {
        let a = estimate_tail(&config("1/16,1/6,1/4,1/8,7/24", 4, 5_000, 99, 20)).unwrap();
        let b = estimate_tail(&config("1/16,1/6,1/4,1/8,7/24", 4, 5_000, 99, 20)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = estimate_tail(&config("1/16,1/6,1/4,1/8,7/24", 4, 5_000, 100, 20)).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn streams_are_independent_of_order() {
        let p = DrawDistribution::parse("0.2,0.2,0.2").unwrap();
        let all = sample_many(&p, 3, 64, 7, DEFAULT_DRAW_GUARD).unwrap();
        let sampler = CouponSampler::new(&p);
        let t40 = sampler.waiting_time(3, &mut replication_rng(7, 40), DEFAULT_DRAW_GUARD);
        assert_eq!(all[40], t40);
    }

    #[test]
    fn guard_aborts_long_replications() {
        let p = DrawDistribution::parse("1/1000").unwrap();
        let times = sample_many(&p, 1, 50, 1, 3).unwrap();
        assert!(times.iter().any(|t| t.is_none()));
    }

    #[test]
    fn rejects_invalid_config() {
        assert!(estimate_tail(&config("0.5", 1, 0, 1, 3)).is_err());
        assert!(estimate_tail(&config("0.5", 2, 10, 1, 3)).is_err());
    }
}
