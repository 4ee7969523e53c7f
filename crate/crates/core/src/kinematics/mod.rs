//! Body kinematics from the eight markers: pairwise lengths, the body
//! frame (centre of mass, ring radii, z-y-z orientation), local-frame
//! velocities, zero-phase low-pass filtering and standardization.

mod filter;
mod frame;
mod lengths;
mod velocity;

use std::io::Write;

use thiserror::Error;

use crate::ingest::TrialRecording;
use crate::scalar::Real;

pub use filter::{lowpass, lowpass_3hz, standardize, standardize_in_place, Butterworth2, LOWPASS_CUTOFF_HZ};
pub use frame::{body_frame, BodyPoseSeries};
pub use lengths::{pair_name, pairwise_lengths, LengthSeries, CORONAL, RADIAL};
pub use velocity::{forward_difference, local_velocities, moving_average, MOVING_AVERAGE_WINDOW};

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("{ring} ring markers are collinear at frame {frame}")]
    DegenerateRing { ring: &'static str, frame: usize },
    #[error("series too short for the filter ({len} < {min} samples)")]
    TooShort { len: usize, min: usize },
    #[error("sampling rate {fs} Hz unsuitable for a {cutoff} Hz cutoff")]
    InvalidSampling { fs: f64, cutoff: f64 },
    #[error("series has zero variance")]
    ZeroVariance,
}

/// Pose plus local-frame velocities for one trial.
#[derive(Debug, Clone)]
pub struct BodyFrameSeries<T> {
    pub pose: BodyPoseSeries<T>,
    pub v_local: Vec<crate::geometry::Vec3<T>>,
}

/// Runs the body-frame and velocity stages together.
pub fn analyze_body<T: Real>(trial: &TrialRecording<T>) -> Result<BodyFrameSeries<T>, KinematicsError> {
    let pose = body_frame(trial)?;
    let v_local = local_velocities(trial, &pose);
    Ok(BodyFrameSeries { pose, v_local })
}

/// Writes the per-trial analysis table: `t`, the 28 lengths, both radii,
/// the Euler angles and the local velocities.
pub fn write_analysis_csv<W: Write>(
    mut w: W,
    frame_rate: f64,
    lengths: &LengthSeries<f64>,
    body: &BodyFrameSeries<f64>,
) -> std::io::Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend(lengths.names.iter().cloned());
    header.extend(
        [
            "inner_radius",
            "outer_radius",
            "alpha",
            "beta",
            "gamma",
            "v_x",
            "v_y",
            "v_z",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    writeln!(w, "{}", header.join(","))?;
    for f in 0..lengths.len() {
        let mut row = vec![format!("{}", f as f64 / frame_rate)];
        row.extend(lengths.data.iter().map(|c| format!("{}", c[f])));
        let (a, b, g) = body.pose.euler[f];
        let v = body.v_local[f];
        for x in [
            body.pose.inner_radius[f],
            body.pose.outer_radius[f],
            a,
            b,
            g,
            v.x,
            v.y,
            v.z,
        ] {
            row.push(format!("{x}"));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
