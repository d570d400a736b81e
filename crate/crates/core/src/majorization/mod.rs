//! Pairwise mixing towards the almost-uniform vector, verifiers for the
//! optimality inequalities, and the tail-conjecture scanner.

mod checks;
mod mixing;
mod scan;

pub use checks::{
    check_fnk_monotone, check_tail_chain, check_theorem2, check_theorem3, check_theorem4, check_theorem5, fnk,
    lemma2_residual, lemma3_gap, ChainMargins, ExpectationMargins, MinMargin,
};
pub use mixing::{flatten_to_v, mix_pair, FlattenTrace, MixingStep};
pub use scan::{scan_conjecture, verify_certificate, Certificate, SampleMargins, SamplingScheme, ScanConfig, ScanReport};
