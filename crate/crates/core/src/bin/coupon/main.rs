//! `coupon`: exact tails, moments, verification sweeps, flattening traces,
//! conjecture scans and simulations from the command line.
//!
//! Exit codes: 0 success, 1 invalid input, 2 an internal size cap was hit,
//! 3 a `scan` certified a counterexample or a `verify` suite failed.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coupon_core::collector::{
    moments, tail_almost_uniform_curve, tail_curve, MomentReport, TailCurve, TailMethod,
};
use coupon_core::combinatorics::Limits;
use coupon_core::iceberg::{compare_to_optimal, run_simulation, AggregateReport, IcebergConfig, OptimalityTable};
use coupon_core::majorization::{flatten_to_v, scan_conjecture, verify_certificate, SamplingScheme, ScanConfig, ScanReport};
use coupon_core::montecarlo::{estimate_tail, EstimateReport, SimulationConfig};
use coupon_core::oracle::markov_tail_curve;
use coupon_core::scalar::{format_rational, rational_serde};
use coupon_core::verify::{run_suite, Suite, SuiteReport, VerifyParams};
use coupon_core::{parse_rational, ArithmeticMode, DrawDistribution, Error, Rational, Result, Value};
use serde::Serialize;

use output::{csv_table, input_hash, Format, OutputRecord, Sink};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CAP: u8 = 2;
const EXIT_FINDING: u8 = 3;

#[derive(Parser)]
#[command(name = "coupon", version, about = "Coupon collector with a null coupon: exact tails, moments and simulations")]
struct Cli {
    /// Arithmetic for tail, pmf and moments.
    #[arg(long, global = true, env = "COUPON_MODE", default_value = "exact")]
    mode: ArithmeticMode,
    /// Output format; tail and pmf default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pr{T > k} for k = 0..=kmax (or a single k).
    Tail(CurveArgs),
    /// Pr{T = k} alongside the tail, for k >= 1.
    Pmf(CurveArgs),
    /// Expectation, second moment, variance and higher moments.
    Moments(MomentArgs),
    /// Run verification suites on seeded random distributions.
    Verify(VerifyArgs),
    /// Flatten p to the almost-uniform vector by pairwise mixing.
    Flatten(FlattenArgs),
    /// Scan the simplex for violations of the tail ordering p >= v >= u.
    Scan(ScanArgs),
    /// Monte Carlo estimate of the mean and tail.
    Simulate(SimulateArgs),
    /// Router collection-time experiment from a TOML config.
    Iceberg(IcebergArgs),
}

#[derive(Args, Serialize)]
struct DistArgs {
    /// Coupon weights p_1..p_n, comma separated: "1/16,1/6,0.25".
    #[arg(long)]
    p: Option<String>,
    /// Almost-uniform input with this many coupons instead of --p.
    #[arg(long, conflicts_with = "p")]
    n: Option<usize>,
    /// Null mass of the almost-uniform input.
    #[arg(long, requires = "n")]
    v0: Option<String>,
}

enum Input {
    General(DrawDistribution),
    Flat { n: usize, v0: Rational },
}

impl DistArgs {
    fn input(&self) -> Result<Input> {
        match (&self.p, self.n) {
            (Some(p), _) => Ok(Input::General(DrawDistribution::parse(p)?)),
            (None, Some(n)) => {
                let v0 = match &self.v0 {
                    Some(s) => parse_rational(s)?,
                    None => Rational::from_integer(0.into()),
                };
                // validates n and v0
                if n <= 64 {
                    DrawDistribution::almost_uniform(n, &v0)?;
                } else if v0 < Rational::from_integer(0.into()) || v0 >= Rational::from_integer(1.into()) {
                    return Err(Error::OutOfRange("v0 must lie in [0, 1)".into()));
                }
                Ok(Input::Flat { n, v0 })
            }
            (None, None) => Err(Error::Config("either --p or --n is required".into())),
        }
    }

    fn distribution(&self) -> Result<DrawDistribution> {
        match self.input()? {
            Input::General(p) => Ok(p),
            Input::Flat { n, v0 } => DrawDistribution::almost_uniform(n, &v0),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CurveMethod {
    ClosedForm,
    Recurrence,
    OracleDp,
}

#[derive(Args, Serialize)]
struct CurveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    dist: DistArgs,
    /// Number of distinct coupons to collect.
    #[arg(long)]
    c: usize,
    /// Largest k of the curve.
    #[arg(long, default_value_t = 20)]
    kmax: usize,
    /// Report only this k.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "closed-form")]
    method: CurveMethod,
}

#[derive(Args, Serialize)]
struct MomentArgs {
    #[command(flatten)]
    #[serde(flatten)]
    dist: DistArgs,
    #[arg(long)]
    c: usize,
    /// Highest moment order; orders above 2 are truncated series.
    #[arg(long, default_value_t = 2)]
    r: u32,
    /// Bound on the neglected part of truncated series.
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    /// Suite to run; all suites when omitted.
    #[arg(long)]
    suite: Option<Suite>,
    #[arg(long, default_value_t = 6)]
    nmax: usize,
    #[arg(long, default_value_t = 20)]
    kmax: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random distributions per coupon count.
    #[arg(long, default_value_t = 20)]
    samples: usize,
}

#[derive(Args, Serialize)]
struct FlattenArgs {
    #[command(flatten)]
    #[serde(flatten)]
    dist: DistArgs,
    /// Pairs to mix, 1-based: "4:5,2:5,1:3".
    #[arg(long)]
    schedule: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SchemeKind {
    Grid,
    Random,
}

#[derive(Args, Serialize)]
struct ScanArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    c: usize,
    #[arg(long, default_value_t = 20)]
    kmax: usize,
    #[arg(long, value_enum, default_value = "grid")]
    scheme: SchemeKind,
    /// Grid denominator.
    #[arg(long, default_value_t = 10)]
    resolution: u64,
    /// Random samples.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Largest denominator of random samples.
    #[arg(long, default_value_t = 40)]
    max_denominator: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refuse larger n.
    #[arg(long, default_value_t = 6)]
    max_n: usize,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    dist: DistArgs,
    #[arg(long)]
    c: usize,
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest k of the estimated tail.
    #[arg(long, default_value_t = 50)]
    kmax: usize,
}

#[derive(Args, Serialize)]
struct IcebergArgs {
    /// TOML experiment file.
    #[arg(long)]
    #[serde(skip)]
    config: PathBuf,
    /// Override the config's rounds.
    #[arg(long)]
    rounds: Option<u64>,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn exit_for(e: &Error) -> u8 {
    if e.is_cap() {
        EXIT_CAP
    } else {
        EXIT_VALIDATION
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

struct Ctx {
    mode: ArithmeticMode,
    sink: Sink,
}

impl Ctx {
    fn emit<T: Serialize>(&self, command: &str, args: &impl Serialize, mode: ArithmeticMode, extra: &[u8], result: T, csv: impl FnOnce(&T) -> Result<String>) -> Result<()> {
        match self.sink.format {
            Format::Csv => self.sink.write(&csv(&result)?),
            Format::Json => {
                let mut args = serde_json::to_value(args).map_err(|e| Error::Io(std::io::Error::other(e)))?;
                if let serde_json::Value::Object(map) = &mut args {
                    map.retain(|_, v| !v.is_null());
                }
                let record = OutputRecord {
                    tool: "coupon",
                    version: env!("CARGO_PKG_VERSION"),
                    command,
                    input_sha256: input_hash(command, &args, extra),
                    args: &args,
                    mode,
                    result,
                };
                self.sink.json(&record)
            }
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let default_format = match cli.command {
        Command::Tail(_) | Command::Pmf(_) => Format::Csv,
        _ => Format::Json,
    };
    let ctx = Ctx {
        mode: cli.mode,
        sink: Sink {
            format: cli.format.unwrap_or(default_format),
            out: cli.out,
        },
    };
    match &cli.command {
        Command::Tail(a) => curve(&ctx, "tail", a, false),
        Command::Pmf(a) => curve(&ctx, "pmf", a, true),
        Command::Moments(a) => moments_cmd(&ctx, a),
        Command::Verify(a) => verify_cmd(&ctx, a),
        Command::Flatten(a) => flatten_cmd(&ctx, a),
        Command::Scan(a) => scan_cmd(&ctx, a),
        Command::Simulate(a) => simulate_cmd(&ctx, a),
        Command::Iceberg(a) => iceberg_cmd(&ctx, a),
    }
}

#[derive(Serialize)]
struct CurvePoint {
    k: usize,
    tail: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pmf: Option<Value>,
}

#[derive(Serialize)]
struct CurvePayload {
    c: usize,
    method: TailMethod,
    precision_warning: bool,
    points: Vec<CurvePoint>,
}

fn warn_precision() {
    eprintln!("warning: float evaluation cancelled more than 12 digits; rerun with --mode exact");
}

fn curve(ctx: &Ctx, command: &str, a: &CurveArgs, with_pmf: bool) -> Result<u8> {
    let k_max = a.k.unwrap_or(a.kmax);
    let method = match a.method {
        CurveMethod::ClosedForm => TailMethod::ClosedForm,
        CurveMethod::Recurrence => TailMethod::Recurrence,
        CurveMethod::OracleDp => TailMethod::OracleDp,
    };
    let limits = Limits::default();
    let curve: TailCurve = match (a.dist.input()?, method) {
        (Input::Flat { n, v0 }, TailMethod::ClosedForm) => {
            let (tail, precision_warning) = match ctx.mode {
                ArithmeticMode::Exact => {
                    let (t, w) = tail_almost_uniform_curve::<Rational>(n, a.c, &v0, k_max)?;
                    (t.into_iter().map(Value::Exact).collect(), w)
                }
                ArithmeticMode::Float => {
                    let v0 = Value::Exact(v0).to_f64();
                    let (t, w) = tail_almost_uniform_curve::<f64>(n, a.c, &v0, k_max)?;
                    (t.into_iter().map(Value::Float).collect(), w)
                }
            };
            TailCurve {
                c: a.c,
                k_max,
                method,
                mode: ctx.mode,
                precision_warning,
                tail,
            }
        }
        (input, method) => {
            let p = match input {
                Input::General(p) => p,
                Input::Flat { n, v0 } => DrawDistribution::almost_uniform(n, &v0)?,
            };
            if method == TailMethod::OracleDp {
                markov_tail_curve(&p, a.c, k_max, ctx.mode)?
            } else {
                tail_curve(&p, a.c, k_max, ctx.mode, method, &limits)?
            }
        }
    };
    if curve.precision_warning {
        warn_precision();
    }
    let pmf = curve.pmf();
    let first = match (a.k, with_pmf) {
        (Some(k), _) => k,
        (None, true) => 1,
        (None, false) => 0,
    };
    if with_pmf && first == 0 {
        return Err(Error::OutOfRange("pmf is defined for k >= 1".into()));
    }
    let points: Vec<CurvePoint> = (first..=k_max)
        .map(|k| CurvePoint {
            k,
            tail: curve.tail[k].clone(),
            pmf: with_pmf.then(|| pmf[k - 1].clone()),
        })
        .collect();
    let payload = CurvePayload {
        c: a.c,
        method,
        precision_warning: curve.precision_warning,
        points,
    };
    ctx.emit(command, a, ctx.mode, &[], payload, |p| {
        let header: &[&str] = if with_pmf { &["k", "tail", "pmf"] } else { &["k", "tail"] };
        csv_table(
            header,
            p.points.iter().map(|pt| {
                let mut row = vec![pt.k.to_string(), pt.tail.to_string()];
                if let Some(m) = &pt.pmf {
                    row.push(m.to_string());
                }
                row
            }),
        )
    })?;
    Ok(0)
}

fn moments_cmd(ctx: &Ctx, a: &MomentArgs) -> Result<u8> {
    let p = a.dist.distribution()?;
    let report: MomentReport = moments(&p, a.c, ctx.mode, a.r, a.epsilon)?;
    if report.precision_warning {
        warn_precision();
    }
    ctx.emit("moments", a, ctx.mode, &[], report, |r| {
        let mut rows = vec![
            vec!["expectation".to_string(), r.expectation.to_string(), String::new()],
            vec!["second_moment".to_string(), r.second_moment.to_string(), String::new()],
            vec!["variance".to_string(), r.variance.to_string(), String::new()],
        ];
        for h in &r.higher {
            rows.push(vec![format!("moment_{}", h.r), h.value.to_string(), h.truncation_bound.to_string()]);
        }
        csv_table(&["quantity", "value", "truncation_bound"], rows)
    })?;
    Ok(0)
}

fn verify_cmd(ctx: &Ctx, a: &VerifyArgs) -> Result<u8> {
    let params = VerifyParams {
        nmax: a.nmax,
        kmax: a.kmax,
        seed: a.seed,
        samples: a.samples,
    };
    let suites: Vec<Suite> = match a.suite {
        Some(s) => vec![s],
        None => Suite::ALL.to_vec(),
    };
    let reports = suites
        .into_iter()
        .map(|s| run_suite(s, &params))
        .collect::<Result<Vec<SuiteReport>>>()?;
    let failed = reports.iter().any(|r| !r.passed());
    for r in reports.iter().filter(|r| !r.passed()) {
        eprintln!("suite {} failed {} of {} checks", r.suite, r.failed, r.checks);
    }
    ctx.emit("verify", a, ArithmeticMode::Exact, &[], &reports, |rs| {
        csv_table(
            &["suite", "checks", "failed"],
            rs.iter().map(|r| vec![r.suite.to_string(), r.checks.to_string(), r.failed.to_string()]),
        )
    })?;
    Ok(if failed { EXIT_FINDING } else { 0 })
}

/// `"4:5,2:5"` to 0-based pairs.
fn parse_schedule(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    let mut offset = 0;
    for item in text.split(',') {
        let bad = |reason: &str| Error::Parse {
            input: text.to_string(),
            position: offset,
            reason: reason.to_string(),
        };
        let (i, j) = item.trim().split_once(':').ok_or_else(|| bad("expected i:j"))?;
        let index = |s: &str| -> Result<usize> {
            match s.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(bad("indices are positive integers (1-based)")),
            }
        };
        pairs.push((index(i)?, index(j)?));
        offset += item.len() + 1;
    }
    Ok(pairs)
}

#[derive(Serialize)]
struct FlattenStepOut {
    /// 1-based.
    i: usize,
    j: usize,
    #[serde(with = "rational_serde")]
    lambda: Rational,
    after: DrawDistribution,
}

#[derive(Serialize)]
struct FlattenPayload {
    start: DrawDistribution,
    #[serde(with = "rational_serde")]
    target: Rational,
    steps: Vec<FlattenStepOut>,
}

fn flatten_cmd(ctx: &Ctx, a: &FlattenArgs) -> Result<u8> {
    let p = a.dist.distribution()?;
    let schedule = a.schedule.as_deref().map(parse_schedule).transpose()?;
    let trace = flatten_to_v(&p, schedule.as_deref())?;
    let payload = FlattenPayload {
        start: trace.start.clone(),
        target: trace.target.clone(),
        steps: trace
            .steps
            .iter()
            .map(|s| FlattenStepOut {
                i: s.i + 1,
                j: s.j + 1,
                lambda: s.lambda.clone(),
                after: s.after.clone(),
            })
            .collect(),
    };
    ctx.emit("flatten", a, ArithmeticMode::Exact, &[], payload, |t| {
        let start = vec![
            "0".to_string(),
            String::new(),
            String::new(),
            String::new(),
            t.start.to_list_string(),
        ];
        let steps = t.steps.iter().enumerate().map(|(n, s)| {
            vec![
                (n + 1).to_string(),
                s.i.to_string(),
                s.j.to_string(),
                format_rational(&s.lambda),
                s.after.to_list_string(),
            ]
        });
        csv_table(&["step", "i", "j", "lambda", "p"], std::iter::once(start).chain(steps))
    })?;
    Ok(0)
}

fn scan_cmd(ctx: &Ctx, a: &ScanArgs) -> Result<u8> {
    let scheme = match a.scheme {
        SchemeKind::Grid => SamplingScheme::Grid {
            resolution: a.resolution,
        },
        SchemeKind::Random => SamplingScheme::Random {
            samples: a.samples,
            max_denominator: a.max_denominator,
            seed: a.seed,
        },
    };
    let mut config = ScanConfig::new(a.n, a.c, a.kmax, scheme);
    config.max_n = a.max_n;
    let report: ScanReport = scan_conjecture(&config)?;
    let certified = match &report.counterexample {
        Some(cert) => verify_certificate(cert)?,
        None => false,
    };
    if let Some(cert) = report.counterexample.as_ref().filter(|_| certified) {
        eprintln!(
            "counterexample: p = ({}), c = {}, k = {}, margins {} and {}",
            cert.p.to_list_string(),
            cert.c,
            cert.k,
            format_rational(&cert.first_margin),
            format_rational(&cert.second_margin)
        );
    }
    ctx.emit("scan", a, ArithmeticMode::Exact, &[], report, |r| {
        csv_table(
            &["sample", "p", "first_margin", "first_k", "second_margin", "second_k"],
            r.per_sample.iter().enumerate().map(|(i, s)| {
                vec![
                    i.to_string(),
                    s.p.to_list_string(),
                    format_rational(&s.margins.first.value),
                    s.margins.first.k.to_string(),
                    format_rational(&s.margins.second.value),
                    s.margins.second.k.to_string(),
                ]
            }),
        )
    })?;
    Ok(if certified { EXIT_FINDING } else { 0 })
}

fn simulate_cmd(ctx: &Ctx, a: &SimulateArgs) -> Result<u8> {
    let config = SimulationConfig {
        p: a.dist.distribution()?,
        c: a.c,
        replications: a.reps,
        seed: a.seed,
        k_max: a.kmax,
    };
    let report: EstimateReport = estimate_tail(&config)?;
    if report.aborted > 0 {
        eprintln!("warning: {} replications hit the draw guard", report.aborted);
    }
    ctx.emit("simulate", a, ArithmeticMode::Float, &[], report, |r| {
        csv_table(
            &["k", "estimate", "std_error"],
            r.tail.iter().map(|t| vec![t.k.to_string(), t.estimate.to_string(), t.std_error.to_string()]),
        )
    })?;
    Ok(0)
}

#[derive(Serialize)]
struct IcebergPayload {
    report: AggregateReport,
    comparison: Option<OptimalityTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison_skipped: Option<String>,
}

fn iceberg_cmd(ctx: &Ctx, a: &IcebergArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&a.config)?;
    let config = IcebergConfig::from_toml_str(&text)?;
    let rounds = a.rounds.unwrap_or(config.rounds);
    let seed = a.seed.unwrap_or(config.seed);
    let report = run_simulation(&config.routers, rounds, seed)?;
    let (comparison, comparison_skipped) = match compare_to_optimal(&report) {
        Ok(t) => (Some(t), None),
        Err(Error::Incomparable(why)) => (None, Some(why)),
        Err(e) => return Err(e),
    };
    let payload = IcebergPayload {
        report,
        comparison,
        comparison_skipped,
    };
    ctx.emit("iceberg", a, ArithmeticMode::Float, text.as_bytes(), payload, |p| p.report.to_csv())?;
    Ok(0)
}
