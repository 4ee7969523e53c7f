use crate::scalar::Real;

use super::{rising_edges, IngestError};

/// Burst-active mask and onset frames recovered from an indicator trace.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusAlignment {
    pub active: Vec<bool>,
    pub onsets: Vec<usize>,
}

impl StimulusAlignment {
    pub fn onset_times(&self, frame_rate: f64) -> Vec<f64> {
        self.onsets.iter().map(|&f| f as f64 / frame_rate).collect()
    }
}

/// Thresholds the ON-indicator intensity: a burst is active while the
/// intensity is above `threshold`, and each upward crossing is an onset.
pub fn align_stimulus<T: Real>(led: &[T], threshold: T) -> Result<StimulusAlignment, IngestError> {
    let active: Vec<bool> = led.iter().map(|&v| v > threshold).collect();
    let onsets = rising_edges(&active);
    if onsets.is_empty() {
        return Err(IngestError::NoOnsetsFound);
    }
    Ok(StimulusAlignment { active, onsets })
}
