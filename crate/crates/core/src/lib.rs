//! Analysis of pulsatile swimmer motion: marker ingest and body-frame
//! kinematics, criticality statistics, stimulus response, echo-state
//! indices, reservoir-computing motion prediction and sensor selection,
//! plus synthetic data with known ground truth.
//!
//! Numerical code is generic over [`scalar::Real`]; the aliases below fix
//! it to `f64` (or `f32` for the reservoir) for everyday use.

pub mod criticality;
pub mod esp;
pub mod geometry;
pub mod ingest;
pub mod kinematics;
pub mod linalg;
pub mod reservoir;
pub mod response;
pub mod scalar;
pub mod sensorsearch;
pub mod synthgen;

use thiserror::Error;

pub use scalar::Real;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Vec3f64 = geometry::Vec3<f64>;
pub type Rotation64 = geometry::Rotation3<f64>;
pub type Homography64 = ingest::Homography<f64>;
pub type Trial64 = ingest::TrialRecording<f64>;
pub type BodyFrame64 = kinematics::BodyFrameSeries<f64>;
pub type Esn64 = reservoir::Esn<f64>;
pub type Esn32 = reservoir::Esn<f32>;
pub type ReservoirModel64 = reservoir::ReservoirModel<f64>;
pub type ReservoirModel32 = reservoir::ReservoirModel<f32>;
pub type SensorPool64 = sensorsearch::SensorPool<f64>;

/// Any error from the library, for callers that run whole pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Kinematics(#[from] kinematics::KinematicsError),
    #[error(transparent)]
    Criticality(#[from] criticality::CriticalityError),
    #[error(transparent)]
    Response(#[from] response::ResponseError),
    #[error(transparent)]
    Esp(#[from] esp::EspError),
    #[error(transparent)]
    Reservoir(#[from] reservoir::ReservoirError),
    #[error(transparent)]
    Search(#[from] sensorsearch::SearchError),
    #[error(transparent)]
    Synth(#[from] synthgen::SynthError),
}
