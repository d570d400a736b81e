//! Collection-time monitoring across routers.
//!
//! Each router sees a stream of items. Items from the `n` frequent ones are
//! drawn with probabilities `p`; everything else is discarded and plays the
//! role of the null coupon. A router measures how many items it reads before
//! holding `c` distinct frequent ones; the server pools those measurements
//! and compares them with the exact expectation.

mod config;
mod sim;

pub use config::{IcebergConfig, RouterConfig, CONFIG_VERSION};
pub use sim::{compare_to_optimal, run_simulation, AggregateReport, ComparisonRow, OptimalityTable, PooledStats, Quantiles, RouterReport};
