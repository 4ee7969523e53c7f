use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::criticality::PulseEvent;

use super::SynthError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKernel {
    Box,
    RaisedCosine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AvalancheParams {
    /// Density exponent shared by sizes and inter-onset durations.
    pub alpha: f64,
    pub n_events: usize,
    pub kernel: PulseKernel,
    pub size_range: (f64, f64),
    pub duration_range_s: (f64, f64),
    pub pulse_width_s: f64,
    /// Height of a pulse's pedestal; also the natural extraction threshold.
    pub level: f64,
    pub fs: f64,
    pub noise_sd: f64,
}

impl Default for AvalancheParams {
    fn default() -> Self {
        Self {
            alpha: -1.5,
            n_events: 5000,
            kernel: PulseKernel::RaisedCosine,
            size_range: (1.0, 100.0),
            duration_range_s: (0.5, 50.0),
            pulse_width_s: 0.2,
            level: 1.0,
            fs: 60.0,
            noise_sd: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AvalancheTrain {
    pub series: Vec<f64>,
    pub events: Vec<PulseEvent<f64>>,
    pub level: f64,
    pub fs: f64,
}

/// Inverse-CDF draw from a density ∝ x^alpha on `[lo, hi]`.
pub fn bounded_power_law<R: Rng>(rng: &mut R, alpha: f64, lo: f64, hi: f64) -> f64 {
    let a = alpha + 1.0;
    let u: f64 = rng.random();
    if a.abs() < 1e-12 {
        return lo * (hi / lo).powf(u);
    }
    (lo.powf(a) + u * (hi.powf(a) - lo.powf(a))).powf(1.0 / a)
}

/// Pulse train with power-law sizes and inter-onset intervals.
///
/// Each pulse sits on a pedestal of height `level` above a zero baseline, so
/// thresholding at `level` returns the drawn size exactly as the area.
pub fn gen_avalanche(params: &AvalancheParams, seed: u64) -> Result<AvalancheTrain, SynthError> {
    if !(params.alpha < -1.0) {
        return Err(SynthError::InvalidExponent(params.alpha));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = params.fs;
    let width = ((params.pulse_width_s * fs).round() as usize).max(1);
    let shape: Vec<f64> = (0..width)
        .map(|j| match params.kernel {
            PulseKernel::Box => 1.0,
            PulseKernel::RaisedCosine => {
                let u = (j as f64 + 0.5) / width as f64;
                0.5 - 0.5 * (2.0 * std::f64::consts::PI * u).cos()
            }
        })
        .collect();
    let shape_area: f64 = shape.iter().sum::<f64>() / fs;

    let lead = fs as usize;
    let n = params.n_events;
    // Onsets snap to the sample grid so the true events are what an ideal
    // detector could see; durations follow from the snapped onsets.
    let mut onsets = Vec::with_capacity(n + 1);
    let mut sizes = Vec::with_capacity(n + 1);
    let mut t = lead as f64 / fs;
    for _ in 0..n {
        sizes.push(bounded_power_law(
            &mut rng,
            params.alpha,
            params.size_range.0,
            params.size_range.1,
        ));
        onsets.push((t * fs).round() / fs);
        t += bounded_power_law(
            &mut rng,
            params.alpha,
            params.duration_range_s.0,
            params.duration_range_s.1,
        );
    }
    if n > 0 {
        // A closing pulse bounds the last duration.
        sizes.push(params.size_range.0);
        onsets.push((t * fs).round() / fs);
    }
    let events: Vec<PulseEvent<f64>> = (0..n)
        .map(|i| PulseEvent {
            onset_s: onsets[i],
            duration_s: onsets[i + 1] - onsets[i],
            size: sizes[i],
        })
        .collect();
    let len = ((t + params.pulse_width_s) * fs).ceil() as usize + lead;
    let mut series = vec![0.0; len];
    for (&onset, &size) in onsets.iter().zip(&sizes) {
        let k0 = (onset * fs).round() as usize;
        for (j, &s) in shape.iter().enumerate() {
            series[k0 + j] = params.level + size * s / shape_area;
        }
    }
    if params.noise_sd > 0.0 {
        let noise = Normal::new(0.0, params.noise_sd).expect("finite noise sd");
        for v in &mut series {
            *v += noise.sample(&mut rng);
        }
    }
    Ok(AvalancheTrain {
        series,
        events,
        level: params.level,
        fs,
    })
}
