//! Brute-force verifiers for the collector formulas.
//!
//! Nothing here calls into [`crate::collector`]: the subset Markov chain
//! propagates probability mass forward, sequence enumeration walks every
//! draw sequence, and the multinomial route sums over coupon counts.

mod markov;
mod multinomial;
mod sequences;

pub use markov::{markov_tail_curve, markov_tail_curves, markov_tail_dp, transition_probability, SubsetChain, SubsetState, MAX_DP_COUPONS};
pub use multinomial::{full_collection_cdf_multinomial, CountVector, MAX_COMPOSITIONS};
pub use sequences::{sequence_enumeration_curves, sequence_enumeration_tail, MAX_SEQUENCES};
