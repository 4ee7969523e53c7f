use serde::Serialize;

use crate::scalar::Real;

use super::psd::{PsdEstimate, PEAK_FLOOR_HZ};
use super::pulses::PulseEvent;
use super::CriticalityError;

pub const BINS_PER_DECADE: f64 = 8.0;
pub const MIN_FIT_POINTS: usize = 5;
pub const MIN_EVENTS: usize = 30;

/// Straight line in log10–log10 space: `log P = intercept + alpha·log x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit<T> {
    pub alpha: T,
    pub intercept: T,
    pub fit_range: (T, T),
    pub r2_loglog: T,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventField {
    Duration,
    Size,
}

impl EventField {
    pub fn name(self) -> &'static str {
        match self {
            EventField::Duration => "duration",
            EventField::Size => "size",
        }
    }
}

fn loglog_ols<T: Real>(points: &[(T, T)]) -> Result<PowerLawFit<T>, CriticalityError> {
    let pts: Vec<(T, T)> = points
        .iter()
        .filter(|(x, y)| *x > T::zero() && *y > T::zero() && x.is_finite() && y.is_finite())
        .map(|&(x, y)| (x.log10(), y.log10()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(CriticalityError::InsufficientBins { found: pts.len() });
    }
    let n = T::from_count(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: T = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let sse: T = pts.iter().map(|p| (p.1 - intercept - alpha * p.0).powi(2)).sum();
    let r2 = if syy > T::zero() {
        T::one() - sse / syy
    } else {
        T::one()
    };
    let lo = pts.iter().map(|p| p.0).fold(T::infinity(), T::min);
    let hi = pts.iter().map(|p| p.0).fold(T::neg_infinity(), T::max);
    let ten = T::lit(10.0);
    Ok(PowerLawFit {
        alpha,
        intercept,
        fit_range: (ten.powf(lo), ten.powf(hi)),
        r2_loglog: r2,
        n_points: pts.len(),
    })
}

/// OLS over spectral bins from the peak floor up to the peak.
pub fn fit_power_law_psd<T: Real>(psd: &PsdEstimate<T>) -> Result<PowerLawFit<T>, CriticalityError> {
    fit_power_law_psd_range(psd, T::lit(PEAK_FLOOR_HZ), psd.peak_freq)
}

pub fn fit_power_law_psd_range<T: Real>(
    psd: &PsdEstimate<T>,
    lo: T,
    hi: T,
) -> Result<PowerLawFit<T>, CriticalityError> {
    let pts: Vec<(T, T)> = psd
        .freqs
        .iter()
        .zip(&psd.power)
        .filter(|(&f, _)| f >= lo && f <= hi)
        .map(|(&f, &p)| (f, p))
        .collect();
    loglog_ols(&pts)
}

/// Logarithmic histogram with about eight bins per decade spanning exactly
/// `[min, max]` of the data. Returns `(geometric centre, density)` for the
/// occupied bins, density = count / (n · width).
pub fn log_binned_density<T: Real>(values: &[T]) -> Vec<(T, T)> {
    let v: Vec<T> = values
        .iter()
        .copied()
        .filter(|x| *x > T::zero() && x.is_finite())
        .collect();
    if v.is_empty() {
        return Vec::new();
    }
    let lmin = v.iter().copied().fold(T::infinity(), T::min).log10();
    let lmax = v.iter().copied().fold(T::neg_infinity(), T::max).log10();
    let span = lmax - lmin;
    let nbins = (span * T::lit(BINS_PER_DECADE)).ceil().to_usize().unwrap_or(0).max(1);
    let w = if span > T::zero() {
        span / T::from_count(nbins)
    } else {
        T::one()
    };
    let mut counts = vec![0usize; nbins];
    for &x in &v {
        let i = ((x.log10() - lmin) / w).floor().to_usize().unwrap_or(0).min(nbins - 1);
        counts[i] += 1;
    }
    let n = T::from_count(v.len());
    let ten = T::lit(10.0);
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| {
            let a = lmin + w * T::from_count(i);
            let (lo, hi) = (ten.powf(a), ten.powf(a + w));
            let centre = ten.powf(a + w / T::lit(2.0));
            (centre, T::from_count(c) / (n * (hi - lo)))
        })
        .collect()
}

/// Log-binned OLS fit of the duration or size distribution.
pub fn fit_power_law_events<T: Real>(
    events: &[PulseEvent<T>],
    field: EventField,
) -> Result<PowerLawFit<T>, CriticalityError> {
    if events.len() < MIN_EVENTS {
        return Err(CriticalityError::InsufficientEvents { found: events.len() });
    }
    let values: Vec<T> = events
        .iter()
        .map(|e| match field {
            EventField::Duration => e.duration_s,
            EventField::Size => e.size,
        })
        .collect();
    loglog_ols(&log_binned_density(&values))
}

/// Continuous maximum-likelihood exponent for `x ≥ xmin`, reported with the
/// same sign convention as the binned fits (negative for decaying tails).
/// Offered as a cross-check only.
pub fn fit_power_law_mle<T: Real>(values: &[T], xmin: T) -> Result<T, CriticalityError> {
    let tail: Vec<T> = values.iter().copied().filter(|&x| x >= xmin && x.is_finite()).collect();
    if tail.len() < MIN_EVENTS {
        return Err(CriticalityError::InsufficientEvents { found: tail.len() });
    }
    let s: T = tail.iter().map(|&x| (x / xmin).ln()).sum();
    Ok(-(T::one() + T::from_count(tail.len()) / s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bounded_power_law(rng: &mut ChaCha8Rng, alpha: f64, lo: f64, hi: f64) -> f64 {
        let a = alpha + 1.0;
        let u: f64 = rng.random();
        (lo.powf(a) + u * (hi.powf(a) - lo.powf(a))).powf(1.0 / a)
    }

    #[test]
    fn exact_spectrum_slope() {
        let freqs: Vec<f64> = (1..200).map(|k| k as f64 * 0.01).collect();
        let power: Vec<f64> = freqs.iter().map(|f| 3.0 * f.powf(-1.5)).collect();
        let est = PsdEstimate {
            freqs,
            power,
            peak_freq: 1.0,
            peak_power: 3.0,
        };
        let fit = fit_power_law_psd(&est).unwrap();
        assert!((fit.alpha + 1.5).abs() < 1e-9);
        assert!((fit.intercept - 3f64.log10()).abs() < 1e-9);
        assert!((fit.r2_loglog - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_bins() {
        let est = PsdEstimate {
            freqs: vec![0.1, 0.2, 0.3],
            power: vec![1.0; 3],
            peak_freq: 0.3,
            peak_power: 1.0,
        };
        assert_eq!(
            fit_power_law_psd(&est).unwrap_err(),
            CriticalityError::InsufficientBins { found: 3 }
        );
    }

    #[test]
    fn recovers_duration_exponent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let events: Vec<PulseEvent<f64>> = (0..5000)
            .map(|_| PulseEvent {
                onset_s: 0.0,
                duration_s: bounded_power_law(&mut rng, -2.0, 0.5, 50.0),
                size: 1.0,
            })
            .collect();
        let fit = fit_power_law_events(&events, EventField::Duration).unwrap();
        assert!((fit.alpha + 2.0).abs() < 0.15, "{}", fit.alpha);
        let mle = fit_power_law_mle(&events.iter().map(|e| e.duration_s).collect::<Vec<_>>(), 0.5).unwrap();
        // Unbounded MLE underestimates a truncated tail's steepness only slightly here.
        assert!((mle + 2.0).abs() < 0.2, "{mle}");
    }

    #[test]
    fn equal_values_refused() {
        let events = vec![
            PulseEvent {
                onset_s: 0.0,
                duration_s: 1.0,
                size: 1.0
            };
            40
        ];
        assert_eq!(
            fit_power_law_events(&events, EventField::Duration).unwrap_err(),
            CriticalityError::InsufficientBins { found: 1 }
        );
        assert_eq!(
            fit_power_law_events(&events[..10], EventField::Size).unwrap_err(),
            CriticalityError::InsufficientEvents { found: 10 }
        );
    }

    #[test]
    fn scale_changes_intercept_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sizes: Vec<f64> = (0..2000)
            .map(|_| bounded_power_law(&mut rng, -1.5, 1.0, 100.0))
            .collect();
        let ev = |c: f64| -> Vec<PulseEvent<f64>> {
            sizes
                .iter()
                .map(|&s| PulseEvent {
                    onset_s: 0.0,
                    duration_s: 1.0,
                    size: c * s,
                })
                .collect()
        };
        let a = fit_power_law_events(&ev(1.0), EventField::Size).unwrap();
        let b = fit_power_law_events(&ev(4.0), EventField::Size).unwrap();
        assert!((a.alpha - b.alpha).abs() < 1e-9);
        assert!((a.intercept - b.intercept).abs() > 0.1);
    }
}
