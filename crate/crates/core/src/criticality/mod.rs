//! Self-organized-criticality statistics: Welch spectra, power-law fits
//! and threshold-crossing pulse events.

mod fit;
mod psd;
mod pulses;

use thiserror::Error;

pub use fit::{
    fit_power_law_events, fit_power_law_mle, fit_power_law_psd, fit_power_law_psd_range, log_binned_density,
    EventField, PowerLawFit, BINS_PER_DECADE, MIN_EVENTS, MIN_FIT_POINTS,
};
pub use psd::{psd, psd_with_segment, PsdEstimate, MIN_PSD_LEN, PEAK_FLOOR_HZ, WELCH_SEGMENT};
pub use pulses::{default_threshold, extract_pulses, PulseEvent};

#[derive(Debug, Error, PartialEq)]
pub enum CriticalityError {
    #[error("series too short ({len} < {min} samples)")]
    TooShort { len: usize, min: usize },
    #[error("only {found} usable bins for the fit (need {MIN_FIT_POINTS})")]
    InsufficientBins { found: usize },
    #[error("only {found} events (need {MIN_EVENTS})")]
    InsufficientEvents { found: usize },
    #[error("no spectral bin above the peak floor")]
    NoPeak,
}
