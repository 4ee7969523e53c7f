use serde::Serialize;

use crate::scalar::Real;

use super::ResponseError;

pub const PHASE_POINTS: usize = 64;

/// Segments cut at consecutive onsets, each resampled to one cycle of
/// [`PHASE_POINTS`] samples.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseResponse<T> {
    /// Mean onset-to-onset interval.
    pub period_s: T,
    pub n_segments: usize,
    pub segments: Vec<Vec<T>>,
    pub mean: Vec<T>,
    /// Sample SD per phase point; zero for a single segment.
    pub sd: Vec<T>,
}

fn sample_at<T: Real>(x: &[T], fs: f64, t: f64) -> T {
    let pos = t * fs;
    let i = (pos.floor() as usize).min(x.len() - 1);
    if i + 1 >= x.len() {
        return x[x.len() - 1];
    }
    let frac = T::lit(pos - i as f64);
    x[i] + (x[i + 1] - x[i]) * frac
}

pub fn phase_response<T: Real>(x: &[T], fs: f64, onsets_s: &[f64]) -> Result<PhaseResponse<T>, ResponseError> {
    if onsets_s.len() < 2 {
        return Err(ResponseError::TooFewOnsets(onsets_s.len()));
    }
    let duration_s = x.len().saturating_sub(1) as f64 / fs;
    if let Some(&bad) = onsets_s.iter().find(|&&t| t < 0.0 || t > duration_s + 1e-9) {
        return Err(ResponseError::OnsetOutOfRange {
            onset_s: bad,
            duration_s,
        });
    }
    let segments: Vec<Vec<T>> = onsets_s
        .windows(2)
        .map(|w| {
            let span = w[1] - w[0];
            (0..PHASE_POINTS)
                .map(|j| sample_at(x, fs, w[0] + span * j as f64 / PHASE_POINTS as f64))
                .collect()
        })
        .collect();
    let n = segments.len();
    let nt = T::from_count(n);
    let mean: Vec<T> = (0..PHASE_POINTS)
        .map(|j| segments.iter().map(|s| s[j]).sum::<T>() / nt)
        .collect();
    let sd = (0..PHASE_POINTS)
        .map(|j| {
            if n < 2 {
                return T::zero();
            }
            let ss: T = segments.iter().map(|s| (s[j] - mean[j]).powi(2)).sum();
            (ss / T::from_count(n - 1)).sqrt()
        })
        .collect();
    let period_s = T::lit((onsets_s[n] - onsets_s[0]) / n as f64);
    Ok(PhaseResponse {
        period_s,
        n_segments: n,
        segments,
        mean,
        sd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn periodic_signal_has_zero_spread() {
        let fs = 60.0;
        let tau = 2.0;
        let x: Vec<f64> = (0..1800)
            .map(|k| (2.0 * std::f64::consts::PI * k as f64 / fs / tau).sin())
            .collect();
        let onsets: Vec<f64> = (0..14).map(|k| k as f64 * tau).collect();
        let r = phase_response(&x, fs, &onsets).unwrap();
        assert_eq!(r.n_segments, 13);
        assert_eq!(r.mean.len(), PHASE_POINTS);
        assert!(r.sd.iter().all(|&s| s < 1e-9));
        assert!((r.period_s - tau).abs() < 1e-12);
        assert!((r.mean[16] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn white_noise_mean_stays_in_clt_envelope() {
        let fs = 60.0;
        let mut outside = 0;
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..101 * 60 + 1).map(|_| StandardNormal.sample(&mut rng)).collect();
            let onsets: Vec<f64> = (0..=100).map(|k| k as f64).collect();
            let r = phase_response(&x, fs, &onsets).unwrap();
            outside += r.mean.iter().filter(|m| m.abs() > 3.0 / 10.0).count();
        }
        // Expected 0.27% of 640 points, about 2.
        assert!(outside <= 8, "{outside}");
    }

    #[test]
    fn mean_ignores_segment_order() {
        let x: Vec<f64> = (0..600).map(|k| ((k * 37) % 19) as f64).collect();
        let a = phase_response(&x, 60.0, &[0.0, 1.0, 2.5, 4.0, 6.0]).unwrap();
        let mut shuffled = a.segments.clone();
        shuffled.reverse();
        for j in 0..PHASE_POINTS {
            let m = shuffled.iter().map(|s| s[j]).sum::<f64>() / shuffled.len() as f64;
            assert!((m - a.mean[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(
            phase_response(&[0.0f64; 10], 60.0, &[0.0]).unwrap_err(),
            ResponseError::TooFewOnsets(1)
        );
        assert!(matches!(
            phase_response(&[0.0f64; 10], 60.0, &[0.0, 5.0]),
            Err(ResponseError::OnsetOutOfRange { .. })
        ));
    }
}
