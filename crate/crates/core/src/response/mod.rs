//! Stimulus-locked phase response and the group statistics applied to ESP
//! indices.

mod phase;
mod stats;

use thiserror::Error;

pub use phase::{phase_response, PhaseResponse, PHASE_POINTS};
pub use stats::{one_way_anova, pairwise_tests, AnovaResult, PairwiseResult, DEFAULT_PERMUTATIONS};

#[derive(Debug, Error, PartialEq)]
pub enum ResponseError {
    #[error("need at least two onsets, got {0}")]
    TooFewOnsets(usize),
    #[error("onset at {onset_s} s lies outside the series ({duration_s} s)")]
    OnsetOutOfRange { onset_s: f64, duration_s: f64 },
    #[error("need at least two groups with two samples each")]
    TooFewSamples,
    #[error("within-group variance is zero")]
    DegenerateGroups,
}
