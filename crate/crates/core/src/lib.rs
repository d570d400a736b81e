//! Exact and simulated analysis of the coupon collector time `T_{c,n}(p)`:
//! the number of draws, with replacement, from coupons `{0, 1, ..., n}` until
//! `c` distinct non-null coupons have been seen. Coupon `0` is the null
//! coupon; it is drawn with probability `p_0 = 1 - (p_1 + ... + p_n)` and
//! never counts towards the collection.
//!
//! The crate is organised as
//!
//! - [`collector`]: closed-form tail, recurrence, PMF and moments, in exact
//!   rational or `f64` arithmetic;
//! - [`oracle`]: brute-force verifiers (subset Markov chain, sequence
//!   enumeration, multinomial full-collection formula) that share no code
//!   with [`collector`];
//! - [`montecarlo`]: seeded simulation with confidence intervals;
//! - [`majorization`]: pairwise mixing, flattening to the almost-uniform
//!   vector, inequality verifiers and the conjecture scanner;
//! - [`iceberg`]: the router/server collection-time simulation;
//! - [`verify`]: the named verification suites exposed by the CLI.

pub mod collector;
pub mod combinatorics;
pub mod distribution;
pub mod error;
pub mod iceberg;
pub mod majorization;
pub mod montecarlo;
pub mod oracle;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use distribution::DrawDistribution;
pub use error::{Error, Result};
pub use scalar::{parse_rational, ArithmeticMode, Rational, Scalar, Value};
