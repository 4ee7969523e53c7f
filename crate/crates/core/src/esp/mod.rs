//! Echo State Property index: how closely repeated trials under the same
//! stimulus schedule track each other after the transient.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ingest::TrialRecording;
use crate::kinematics::{
    analyze_body, lowpass_3hz, pairwise_lengths, standardize_in_place, KinematicsError, CORONAL, RADIAL,
};
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum EspError {
    #[error("need at least two trials")]
    TooFewTrials,
    #[error("trial {0} has a different stimulus schedule or channel count")]
    MisalignedTrials(usize),
    #[error("trial {trial} has {len} samples, the horizon needs {min}")]
    TooShort { trial: usize, len: usize, min: usize },
    #[error("invalid window: transient {transient_s} s, horizon {horizon_s} s")]
    InvalidWindow { transient_s: f64, horizon_s: f64 },
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChannelSet {
    /// Four radial plus four coronal lengths.
    Lengths,
    /// One body-frame velocity axis (0 = x, 1 = y, 2 = z).
    Velocity(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EspParams {
    pub transient_s: f64,
    pub horizon_s: f64,
}

impl Default for EspParams {
    fn default() -> Self {
        Self {
            transient_s: 2.0,
            horizon_s: 30.0,
        }
    }
}

/// One trial's channels, channel-major, with its stimulus onsets.
#[derive(Debug, Clone)]
pub struct EspTrial<T> {
    pub channels: Vec<Vec<T>>,
    pub onsets_s: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EspIndexResult<T> {
    pub value: T,
    /// Comparison trials per reference.
    pub p: usize,
    /// `(reference, other, Δ)` for each unordered pair.
    pub pairs: Vec<(usize, usize, T)>,
    /// Mean Δ for each choice of reference.
    pub per_reference: Vec<T>,
}

/// Mean over samples `k` with `T < k/fs ≤ L` of the Euclidean distance
/// between two trials across channels.
fn mean_distance<T: Real>(a: &[Vec<T>], b: &[Vec<T>], range: std::ops::Range<usize>) -> T {
    let len = range.len();
    let sum: T = range
        .map(|k| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x[k] - y[k]) * (x[k] - y[k]))
                .sum::<T>()
                .sqrt()
        })
        .sum();
    sum / T::from_count(len)
}

pub fn esp_index<T: Real>(trials: &[EspTrial<T>], fs: f64, params: EspParams) -> Result<EspIndexResult<T>, EspError> {
    if trials.len() < 2 {
        return Err(EspError::TooFewTrials);
    }
    if !(params.transient_s >= 0.0 && params.transient_s < params.horizon_s) {
        return Err(EspError::InvalidWindow {
            transient_s: params.transient_s,
            horizon_s: params.horizon_s,
        });
    }
    let first = &trials[0];
    for (i, t) in trials.iter().enumerate().skip(1) {
        let same = t.channels.len() == first.channels.len()
            && t.onsets_s.len() == first.onsets_s.len()
            && t.onsets_s
                .iter()
                .zip(&first.onsets_s)
                .all(|(a, b)| (a - b).abs() < 1e-9);
        if !same {
            return Err(EspError::MisalignedTrials(i));
        }
    }
    // Sample k is in the window when T < k/fs <= L.
    let lo = (params.transient_s * fs + 1e-9).floor() as usize + 1;
    let hi = (params.horizon_s * fs + 1e-9).floor() as usize + 1;
    for (i, t) in trials.iter().enumerate() {
        if let Some(len) = t.channels.iter().map(Vec::len).find(|&l| l < hi) {
            return Err(EspError::TooShort { trial: i, len, min: hi });
        }
    }
    let n = trials.len();
    let index_pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let pairs: Vec<(usize, usize, T)> = index_pairs
        .par_iter()
        .map(|&(i, j)| (i, j, mean_distance(&trials[i].channels, &trials[j].channels, lo..hi)))
        .collect();
    let p = n - 1;
    let per_reference: Vec<T> = (0..n)
        .map(|r| {
            pairs
                .iter()
                .filter(|(i, j, _)| *i == r || *j == r)
                .map(|x| x.2)
                .sum::<T>()
                / T::from_count(p)
        })
        .collect();
    let value = per_reference.iter().copied().sum::<T>() / T::from_count(n);
    Ok(EspIndexResult {
        value,
        p,
        pairs,
        per_reference,
    })
}

/// Builds the ESP channels of a trial: low-passed at 3 Hz and standardized
/// per trial.
pub fn esp_channels(trial: &TrialRecording<f64>, set: ChannelSet) -> Result<EspTrial<f64>, EspError> {
    let fs = trial.frame_rate;
    let raw: Vec<Vec<f64>> = match set {
        ChannelSet::Lengths => {
            let l = pairwise_lengths(trial);
            RADIAL
                .iter()
                .chain(CORONAL.iter())
                .map(|&(a, b)| l.channel(a, b).to_vec())
                .collect()
        }
        ChannelSet::Velocity(axis) => {
            let body = analyze_body(trial)?;
            vec![body.v_local.iter().map(|v| v.to_array()[axis.min(2)]).collect()]
        }
    };
    let channels = raw
        .iter()
        .map(|c| {
            let mut y = lowpass_3hz(c, fs)?;
            standardize_in_place(&mut y)?;
            Ok(y)
        })
        .collect::<Result<Vec<_>, KinematicsError>>()?;
    let onsets_s = trial.stimulus_onsets().iter().map(|&k| k as f64 / fs).collect();
    Ok(EspTrial { channels, onsets_s })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(x: Vec<f64>) -> EspTrial<f64> {
        EspTrial {
            channels: vec![x],
            onsets_s: vec![0.0],
        }
    }

    #[test]
    fn identical_trials_score_zero() {
        let x: Vec<f64> = (0..2000).map(|k| (k as f64 * 0.1).sin()).collect();
        let r = esp_index(
            &[single(x.clone()), single(x.clone()), single(x)],
            60.0,
            Default::default(),
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.p, 2);
        assert_eq!(r.pairs.len(), 3);
    }

    #[test]
    fn constant_offset_after_transient() {
        let a: Vec<f64> = (0..1801).map(|k| (k as f64 * 0.05).cos()).collect();
        // Differs wildly during the transient only.
        let b: Vec<f64> = a
            .iter()
            .enumerate()
            .map(|(k, v)| if k <= 120 { v + 50.0 } else { v + 0.7 })
            .collect();
        let r = esp_index(&[single(a), single(b)], 60.0, Default::default()).unwrap();
        assert!((r.value - 0.7).abs() < 1e-12);
    }

    #[test]
    fn order_and_common_signal_do_not_matter() {
        let mk = |s: f64| -> Vec<f64> { (0..1900).map(|k| (k as f64 * 0.01 * s).sin() * s).collect() };
        let trials = vec![single(mk(1.0)), single(mk(2.0)), single(mk(3.0)), single(mk(4.0))];
        let a = esp_index(&trials, 60.0, Default::default()).unwrap();
        let mut rev = trials.clone();
        rev.reverse();
        let b = esp_index(&rev, 60.0, Default::default()).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
        let common: Vec<f64> = (0..1900).map(|k| (k as f64 * 0.37).cos() * 5.0).collect();
        let shifted: Vec<EspTrial<f64>> = trials
            .iter()
            .map(|t| single(t.channels[0].iter().zip(&common).map(|(x, c)| x + c).collect()))
            .collect();
        let c = esp_index(&shifted, 60.0, Default::default()).unwrap();
        assert!((a.value - c.value).abs() < 1e-12);
        let scaled: Vec<EspTrial<f64>> = trials
            .iter()
            .map(|t| single(t.channels[0].iter().map(|x| 3.0 * x).collect()))
            .collect();
        let d = esp_index(&scaled, 60.0, Default::default()).unwrap();
        assert!((d.value - 3.0 * a.value).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let a = single(vec![0.0; 1801]);
        let mut b = a.clone();
        b.onsets_s = vec![0.5];
        assert_eq!(
            esp_index(&[a.clone(), b], 60.0, Default::default()).unwrap_err(),
            EspError::MisalignedTrials(1)
        );
        let short = single(vec![0.0; 1800]);
        assert!(matches!(
            esp_index(&[a.clone(), short], 60.0, Default::default()),
            Err(EspError::TooShort { .. })
        ));
        assert_eq!(
            esp_index(&[a], 60.0, Default::default()).unwrap_err(),
            EspError::TooFewTrials
        );
    }
}
