use serde::Serialize;

use super::SynthError;

pub const BURST_DURATION_S: f64 = 0.1;
pub const CARRIER_HZ: f64 = 50.0;
pub const DUTY: f64 = 0.5;
pub const AMPLITUDE_V: f64 = 3.3;

/// PWM bursts at a fixed period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StimulusSchedule {
    pub period_s: f64,
    pub burst_duration_s: f64,
    pub carrier_hz: f64,
    pub duty: f64,
    pub amplitude_v: f64,
    pub window_s: f64,
    pub onsets_s: Vec<f64>,
}

pub fn pwm_schedule(period_s: f64, window_s: f64) -> Result<StimulusSchedule, SynthError> {
    if !(period_s > BURST_DURATION_S) {
        return Err(SynthError::PeriodTooShort(period_s));
    }
    let onsets_s = (0..)
        .map(|k| k as f64 * period_s)
        .take_while(|&t| t < window_s - 1e-9)
        .collect();
    Ok(StimulusSchedule {
        period_s,
        burst_duration_s: BURST_DURATION_S,
        carrier_hz: CARRIER_HZ,
        duty: DUTY,
        amplitude_v: AMPLITUDE_V,
        window_s,
        onsets_s,
    })
}

impl StimulusSchedule {
    /// Whether a burst envelope is active at `t`.
    pub fn burst_active(&self, t: f64) -> bool {
        self.onsets_s.iter().any(|&o| t >= o && t < o + self.burst_duration_s)
    }

    /// PWM output level at `t`: high during the first `duty` of each
    /// carrier cycle inside a burst.
    pub fn pwm_high(&self, t: f64) -> bool {
        self.onsets_s.iter().any(|&o| {
            let s = t - o;
            s >= 0.0 && s < self.burst_duration_s && (s * self.carrier_hz).fract() < self.duty
        })
    }

    /// Per-frame burst indicator, as an LED trace would record it.
    pub fn frame_mask(&self, fs: f64, n: usize) -> Vec<bool> {
        (0..n).map(|k| self.burst_active(k as f64 / fs)).collect()
    }
}
