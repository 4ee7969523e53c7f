//! Marker-tracking ingestion: rectification of the three camera views,
//! approximate 3D assembly, gap handling and stimulus alignment.

mod assemble;
mod homography;
pub mod io;
mod stimulus;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point2, Vec3};
use crate::scalar::Real;

pub use assemble::{assemble_3d, interpolate_gaps, AssembleOptions};
pub use homography::{rectify_homography, Homography};
pub use stimulus::{align_stimulus, StimulusAlignment};

/// Frame rate used when a recording does not state one.
pub const DEFAULT_FRAME_RATE: f64 = 60.0;
/// Edge length of the cubic tank, in millimetres.
pub const TANK_SIZE_MM: f64 = 150.0;
/// Minimum tracker confidence for a 2D estimate to be used.
pub const CONFIDENCE_THRESHOLD: f64 = 0.6;
/// Longest run of missing frames that is filled by interpolation.
pub const DEFAULT_MAX_GAP_FRAMES: usize = 5;
/// Stimulus periods of the reference protocol.
pub const PROTOCOL_PERIODS_S: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("tank corners are degenerate (three or more collinear)")]
    DegenerateCorners,
    #[error("no confident estimate for corner {corner} in the {view} view")]
    MissingCorner { view: View, corner: usize },
    #[error("neither mirror view yields a confident depth reading")]
    NoConfidentView,
    #[error("stimulus indicator never crosses the threshold")]
    NoOnsetsFound,
    #[error("views disagree on frame count ({0} vs {1})")]
    FrameCountMismatch(usize, usize),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// The eight tracked body markers. Index 1 is the outer ring, index 2 the
/// inner ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MarkerId {
    R1,
    R2,
    Y1,
    Y2,
    O1,
    O2,
    B1,
    B2,
}

impl MarkerId {
    pub const ALL: [MarkerId; 8] = [
        MarkerId::R1,
        MarkerId::R2,
        MarkerId::Y1,
        MarkerId::Y2,
        MarkerId::O1,
        MarkerId::O2,
        MarkerId::B1,
        MarkerId::B2,
    ];
    pub const OUTER: [MarkerId; 4] = [MarkerId::R1, MarkerId::Y1, MarkerId::O1, MarkerId::B1];
    pub const INNER: [MarkerId; 4] = [MarkerId::R2, MarkerId::Y2, MarkerId::O2, MarkerId::B2];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            MarkerId::R1 => "R1",
            MarkerId::R2 => "R2",
            MarkerId::Y1 => "Y1",
            MarkerId::Y2 => "Y2",
            MarkerId::O1 => "O1",
            MarkerId::O2 => "O2",
            MarkerId::B1 => "B1",
            MarkerId::B2 => "B2",
        }
    }

    pub fn is_outer(self) -> bool {
        self.index() % 2 == 0
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl fmt::Display for MarkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Camera view. The mirrors show the tank from behind and from the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum View {
    Top,
    Behind,
    Right,
}

impl View {
    /// Column prefix used by the tracker export.
    pub fn prefix(self) -> &'static str {
        match self {
            View::Top => "c",
            View::Behind => "u",
            View::Right => "r",
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            View::Top => "top",
            View::Behind => "behind",
            View::Right => "right",
        })
    }
}

/// One tracked 2D point with its tracker confidence.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Observation<T> {
    pub pos: Point2<T>,
    pub confidence: T,
}

impl<T: Real> Observation<T> {
    pub fn new(x: T, y: T, confidence: T) -> Self {
        Self {
            pos: Point2::new(x, y),
            confidence,
        }
    }
}

/// Indicator LEDs, in export column order.
pub const LED_CHANNELS: [&str; 4] = ["led_on_left", "led_off_left", "led_on_right", "led_off_right"];

/// Per-frame 2D tracks from one view.
#[derive(Debug, Clone)]
pub struct RawViewSeries<T> {
    pub view: View,
    pub frame_rate: f64,
    pub corners: Vec<[Observation<T>; 4]>,
    pub markers: Vec<[Observation<T>; 8]>,
    /// Indicator intensities per frame, when the export carries them.
    pub leds: Option<Vec<[T; 4]>>,
}

impl<T: Real> RawViewSeries<T> {
    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    /// Intensity of the "stimulus on" indicator: the brighter of the two
    /// ON LEDs.
    pub fn on_led_intensity(&self) -> Option<Vec<T>> {
        self.leds.as_ref().map(|l| l.iter().map(|f| f[0].max(f[2])).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Condition {
    Spontaneous,
    ControlNoStim,
    Stimulated { period_s: f64 },
}

impl Condition {
    pub fn period(&self) -> Option<f64> {
        match self {
            Condition::Stimulated { period_s } => Some(*period_s),
            _ => None,
        }
    }

    /// Short label used in reports (`spontaneous`, `control`, `tau1.5`).
    pub fn label(&self) -> String {
        match self {
            Condition::Spontaneous => "spontaneous".into(),
            Condition::ControlNoStim => "control".into(),
            Condition::Stimulated { period_s } => format!("tau{period_s}"),
        }
    }
}

/// Sidecar metadata describing one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetadata {
    pub animal_id: String,
    pub condition: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_s: Option<f64>,
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
}

fn default_frame_rate() -> f64 {
    DEFAULT_FRAME_RATE
}

impl TrialMetadata {
    pub fn parse_condition(&self) -> Result<Condition, IngestError> {
        match (self.condition.as_str(), self.period_s) {
            ("spontaneous", _) => Ok(Condition::Spontaneous),
            ("control_no_stim", _) => Ok(Condition::ControlNoStim),
            ("stimulated", Some(p)) if p > 0.0 => Ok(Condition::Stimulated { period_s: p }),
            ("stimulated", _) => Err(IngestError::Format("stimulated trial needs a positive period_s".into())),
            (other, _) => Err(IngestError::Format(format!("unknown condition `{other}`"))),
        }
    }

    pub fn from_condition(animal_id: &str, condition: Condition, frame_rate: f64) -> Self {
        let (name, period_s) = match condition {
            Condition::Spontaneous => ("spontaneous", None),
            Condition::ControlNoStim => ("control_no_stim", None),
            Condition::Stimulated { period_s } => ("stimulated", Some(period_s)),
        };
        Self {
            animal_id: animal_id.to_string(),
            condition: name.to_string(),
            period_s,
            frame_rate,
        }
    }
}

/// One experiment: time-ordered 3D marker positions (mm) on a uniform
/// frame clock, the stimulus channel and a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecording<T> {
    pub animal_id: String,
    pub condition: Condition,
    pub frame_rate: f64,
    pub frames: Vec<[Vec3<T>; 8]>,
    pub stimulus: Vec<bool>,
    pub valid: Vec<bool>,
}

impl<T: Real> TrialRecording<T> {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.frame_rate
    }

    pub fn time(&self, frame: usize) -> f64 {
        frame as f64 / self.frame_rate
    }

    pub fn marker(&self, frame: usize, id: MarkerId) -> Vec3<T> {
        self.frames[frame][id.index()]
    }

    /// True when the stimulus period is outside the reference protocol.
    pub fn has_nonprotocol_period(&self) -> bool {
        self.condition
            .period()
            .is_some_and(|p| !PROTOCOL_PERIODS_S.iter().any(|&q| (q - p).abs() < 1e-9))
    }

    /// Stimulus onset frames (rising edges of the stimulus channel).
    pub fn stimulus_onsets(&self) -> Vec<usize> {
        rising_edges(&self.stimulus)
    }

    pub fn metadata(&self) -> TrialMetadata {
        TrialMetadata::from_condition(&self.animal_id, self.condition, self.frame_rate)
    }
}

pub(crate) fn rising_edges(active: &[bool]) -> Vec<usize> {
    active
        .iter()
        .enumerate()
        .filter(|&(i, &a)| a && (i == 0 || !active[i - 1]))
        .map(|(i, _)| i)
        .collect()
}
