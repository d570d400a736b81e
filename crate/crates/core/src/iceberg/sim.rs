use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::config::RouterConfig;
use crate::collector::{expectation_almost_uniform, expectation_as};
use crate::combinatorics::Limits;
use crate::distribution::DrawDistribution;
use crate::error::{Error, Result};
use crate::montecarlo::{replication_rng, sample_many, summarize, RNG_SCHEME};
use crate::scalar::{format_rational, rational_serde, Rational, Scalar};

/// Nearest-rank quantiles of the completed epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: u64,
    pub q25: u64,
    pub median: u64,
    pub q75: u64,
    pub q90: u64,
    pub q99: u64,
    pub max: u64,
}

impl Quantiles {
    fn of(mut times: Vec<u64>) -> Option<Quantiles> {
        if times.is_empty() {
            return None;
        }
        times.sort_unstable();
        let rank = |q: f64| times[((q * times.len() as f64).ceil() as usize).clamp(1, times.len()) - 1];
        Some(Quantiles {
            min: times[0],
            q25: rank(0.25),
            median: rank(0.5),
            q75: rank(0.75),
            q90: rank(0.9),
            q99: rank(0.99),
            max: *times.last().unwrap(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouterReport {
    pub name: String,
    pub p: DrawDistribution,
    pub n: usize,
    pub c: usize,
    pub seed: u64,
    pub rounds: u64,
    /// Epochs that hit the stream cap; excluded from the statistics below.
    pub aborted: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub quantiles: Option<Quantiles>,
    #[serde(with = "rational_serde")]
    pub exact_expectation: Rational,
    pub exact_expectation_f64: f64,
    /// `n (H_n - H_{n-c}) / (1 - p_0)`, the expectation for the flat vector
    /// with the same discarded mass.
    #[serde(with = "rational_serde")]
    pub uniform_baseline: Rational,
    pub uniform_baseline_f64: f64,
    /// `(mean - exact) / std_error`.
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledStats {
    pub epochs: u64,
    pub mean: f64,
    pub std_error: f64,
    /// Epoch-weighted average of the exact expectations.
    pub exact_mean: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub rng: String,
    pub seed: u64,
    pub rounds: u64,
    pub routers: Vec<RouterReport>,
    pub pooled: PooledStats,
}

fn z(mean: f64, exact: f64, se: f64) -> f64 {
    if se > 0.0 {
        (mean - exact) / se
    } else if mean == exact {
        0.0
    } else {
        f64::INFINITY.copysign(mean - exact)
    }
}

/// Runs `rounds` independent collection epochs on every router. Router `r`
/// draws from its own seed, derived from `seed` and `r`, so adding a router
/// never changes the others' streams.
pub fn run_simulation(routers: &[RouterConfig], rounds: u64, seed: u64) -> Result<AggregateReport> {
    if routers.is_empty() {
        return Err(Error::Config("at least one router required".into()));
    }
    if rounds == 0 {
        return Err(Error::Config("rounds must be >= 1".into()));
    }
    let limits = Limits::default();
    let mut reports = Vec::with_capacity(routers.len());
    for (index, router) in routers.iter().enumerate() {
        let router_seed = replication_rng(seed, index as u64).next_u64();
        let times = sample_many(&router.p, router.c, rounds, router_seed, router.stream_cap)?;
        let completed: Vec<u64> = times.iter().flatten().copied().collect();
        let aborted = rounds - completed.len() as u64;
        let (_, mean, variance, std_error) = summarize(completed.iter().copied());
        let (exact, _) = expectation_as::<Rational>(&router.p, router.c, &limits)?;
        let n = router.p.len();
        let flat = expectation_almost_uniform(n, router.c, &router.p.null_mass())?;
        let exact_f64 = exact.to_float();
        reports.push(RouterReport {
            name: router.name.clone(),
            p: router.p.clone(),
            n,
            c: router.c,
            seed: router_seed,
            rounds,
            aborted,
            mean,
            variance,
            std_error,
            quantiles: Quantiles::of(completed),
            exact_expectation_f64: exact_f64,
            exact_expectation: exact,
            uniform_baseline_f64: flat.to_float(),
            uniform_baseline: flat,
            z_score: z(mean, exact_f64, std_error),
        });
    }

    // pooled over all completed epochs: the mean of means weighted by
    // epochs, with variance from the per-router sample variances
    let epochs: u64 = reports.iter().map(|r| r.rounds - r.aborted).sum();
    let weight = |r: &RouterReport| (r.rounds - r.aborted) as f64 / epochs.max(1) as f64;
    let mean: f64 = reports.iter().map(|r| weight(r) * r.mean).sum();
    let exact_mean: f64 = reports.iter().map(|r| weight(r) * r.exact_expectation_f64).sum();
    let var_of_mean: f64 = reports.iter().map(|r| weight(r).powi(2) * r.std_error.powi(2)).sum();
    let std_error = var_of_mean.sqrt();
    Ok(AggregateReport {
        rng: RNG_SCHEME.to_string(),
        seed,
        rounds,
        routers: reports,
        pooled: PooledStats {
            epochs,
            mean,
            std_error,
            exact_mean,
            z_score: z(mean, exact_mean, std_error),
        },
    })
}

impl AggregateReport {
    /// One row per router. Columns are stable:
    /// `name,n,c,null_mass,rounds,aborted,mean,std_error,median,q90,q99,exact_expectation,exact_expectation_f64,uniform_baseline,z_score`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record([
            "name",
            "n",
            "c",
            "null_mass",
            "rounds",
            "aborted",
            "mean",
            "std_error",
            "median",
            "q90",
            "q99",
            "exact_expectation",
            "exact_expectation_f64",
            "uniform_baseline",
            "z_score",
        ])
        .map_err(io)?;
        for r in &self.routers {
            let q = |f: fn(&Quantiles) -> u64| r.quantiles.as_ref().map_or(String::new(), |q| f(q).to_string());
            w.write_record([
                r.name.clone(),
                r.n.to_string(),
                r.c.to_string(),
                format_rational(&r.p.null_mass()),
                r.rounds.to_string(),
                r.aborted.to_string(),
                r.mean.to_string(),
                r.std_error.to_string(),
                q(|q| q.median),
                q(|q| q.q90),
                q(|q| q.q99),
                format_rational(&r.exact_expectation),
                r.exact_expectation_f64.to_string(),
                format_rational(&r.uniform_baseline),
                r.z_score.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    #[serde(with = "rational_serde")]
    pub exact_expectation: Rational,
    pub empirical_mean: f64,
    pub std_error: f64,
    pub almost_uniform: bool,
    pub minimizer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityTable {
    pub n: usize,
    pub c: usize,
    #[serde(with = "rational_serde")]
    pub null_mass: Rational,
    /// The flat-vector expectation every router is bounded below by.
    #[serde(with = "rational_serde")]
    pub optimum: Rational,
    pub rows: Vec<ComparisonRow>,
}

impl OptimalityTable {
    pub fn minimizers(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(|r| r.minimizer)
    }
}

/// Orders routers sharing `(n, c, p_0)` by exact expectation and marks the
/// ones attaining the minimum.
pub fn compare_to_optimal(report: &AggregateReport) -> Result<OptimalityTable> {
    let [first, rest @ ..] = report.routers.as_slice() else {
        return Err(Error::Incomparable("no routers".into()));
    };
    if rest.is_empty() {
        return Err(Error::Incomparable("need at least two routers".into()));
    }
    let p0 = first.p.null_mass();
    if let Some(other) = rest.iter().find(|r| r.n != first.n || r.c != first.c || r.p.null_mass() != p0) {
        return Err(Error::Incomparable(format!(
            "router {:?} has (n, c, p0) = ({}, {}, {}), router {:?} has ({}, {}, {})",
            first.name,
            first.n,
            first.c,
            format_rational(&p0),
            other.name,
            other.n,
            other.c,
            format_rational(&other.p.null_mass()),
        )));
    }
    let best = report.routers.iter().map(|r| &r.exact_expectation).min().expect("non-empty").clone();
    let rows = report
        .routers
        .iter()
        .map(|r| ComparisonRow {
            name: r.name.clone(),
            exact_expectation: r.exact_expectation.clone(),
            empirical_mean: r.mean,
            std_error: r.std_error,
            almost_uniform: r.p.is_almost_uniform(),
            minimizer: r.exact_expectation == best,
        })
        .collect();
    Ok(OptimalityTable {
        n: first.n,
        c: first.c,
        optimum: first.uniform_baseline.clone(),
        null_mass: p0,
        rows,
    })
}
