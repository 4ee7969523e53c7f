//! Echo state networks, physical reservoir readouts and the hybrid of the
//! two, with temporal multiplexing of sensor histories, horizon prediction
//! and a fixed-footprint 32-bit inference path.

mod compact;
mod esn;
mod model;
mod mux;
mod readout;
mod targets;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compact::{export_compact, CompactEvaluator, BLOB_MAGIC, HEADER_LEN};
pub use esn::{spectral_radius, Esn};
pub use model::{cross_predict, CrossPrediction, Predictions, ReservoirModel};
pub use mux::{build_mux, build_mux_with_scale, mux_lags, MuxedInput};
pub use readout::{feature_matrix, r2, r2_channel, train_readout, Readout, DEFAULT_RIDGE};
pub use targets::{dead_reckoned_targets, pulse_onsets_from_radius, velocity_targets, TargetSeries};

/// Washout for training on aggregated data sets, in samples.
pub const WASHOUT_AGGREGATE: usize = 10_000;
/// Washout for training on single pulsatile data sets, in samples.
pub const WASHOUT_PULSATILE: usize = 1_000;

#[derive(Debug, Error, PartialEq)]
pub enum ReservoirError {
    #[error("mux horizon {horizon_s} s at {fs} Hz is not a multiple of the {stride}-sample stride")]
    InvalidMux { horizon_s: f64, fs: f64, stride: usize },
    #[error("series too short ({len} samples, need {min})")]
    TooShort { len: usize, min: usize },
    #[error("input width {got} does not match the reservoir ({expected})")]
    WidthMismatch { expected: usize, got: usize },
    #[error("recurrent weights have vanishing spectral radius")]
    SeedCollapse,
    #[error("normal equations are singular")]
    RankDeficient,
    #[error("{samples} training samples for {features} features (need 3x)")]
    InsufficientSamples { samples: usize, features: usize },
    #[error("horizon {0} s was not trained")]
    UntrainedHorizon(f64),
    #[error("target channel {0} is constant")]
    ConstantTarget(usize),
    #[error("sensor or mux configuration differs from the trained model")]
    ConfigMismatch,
    #[error("model blob is corrupt: {0}")]
    BlobCorrupt(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Architecture {
    Esn,
    Prc,
    Hybrid,
}

impl Architecture {
    pub fn uses_states(self) -> bool {
        !matches!(self, Architecture::Prc)
    }

    pub fn uses_inputs(self) -> bool {
        !matches!(self, Architecture::Esn)
    }
}

/// Where the leaky integrator acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeakMode {
    /// `Ũ(T) = λŨ(T−1) + (1−λ)U(T)` before the reservoir.
    Input,
    /// `X(T+1) = λX(T) + (1−λ)tanh(·)`.
    State,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirConfig {
    pub n_nodes: usize,
    pub spectral_radius: f64,
    pub input_scale: f64,
    pub mux_horizon_s: f64,
    pub mux_stride: usize,
    pub leak: f64,
    pub leak_mode: LeakMode,
    pub architecture: Architecture,
    pub seed: u64,
    pub ridge: f64,
}

impl Default for ReservoirConfig {
    fn default() -> Self {
        Self {
            n_nodes: 100,
            spectral_radius: 0.35,
            input_scale: 1.0,
            mux_horizon_s: 0.0,
            mux_stride: 6,
            leak: 0.0,
            leak_mode: LeakMode::Input,
            architecture: Architecture::Hybrid,
            seed: 0,
            ridge: DEFAULT_RIDGE,
        }
    }
}
