//! Stimulus schedules and synthetic oracles: a marker-level jellyfish model
//! with known kinematics, and avalanche pulse trains with known exponents.

mod avalanche;
mod jellyfish;
mod schedule;

use thiserror::Error;

pub use avalanche::{bounded_power_law, gen_avalanche, AvalancheParams, AvalancheTrain, PulseKernel};
pub use jellyfish::{
    contraction_kernel, gen_independent_control, gen_jellyfish, SyntheticJellyfishParams, SyntheticTrial,
    MARKER_ANGLES_DEG,
};
pub use schedule::{pwm_schedule, StimulusSchedule, BURST_DURATION_S, CARRIER_HZ, DUTY};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("period {0} s does not exceed the 0.1 s burst")]
    PeriodTooShort(f64),
    #[error("duration {0} s is below the 10 s minimum")]
    DurationTooShort(f64),
    #[error("exponent {0} must be below -1")]
    InvalidExponent(f64),
}
