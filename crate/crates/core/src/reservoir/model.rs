use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::Matrix;
use crate::scalar::Real;

use super::esn::Esn;
use super::mux::{build_mux, build_mux_with_scale, mux_lags};
use super::readout::{feature_matrix, r2, train_readout, Readout};
use super::targets::TargetSeries;
use super::{ReservoirConfig, ReservoirError};

/// A trained reservoir: the fixed random part, the mux scale it was
/// trained with and the readout over all horizons.
#[derive(Debug, Clone)]
pub struct ReservoirModel<T> {
    pub config: ReservoirConfig,
    pub fs: f64,
    pub sensor_names: Vec<String>,
    pub target_names: Vec<String>,
    pub horizons_s: Vec<f64>,
    pub lags: usize,
    pub mux_scale: T,
    pub esn: Option<Esn<T>>,
    pub readout: Readout<T>,
    pub train_rows: Range<usize>,
    pub condition: String,
}

/// Row `T` of `data` holds the outputs at time `T`; output column
/// `h·n_channels + c` estimates channel `c` at `T + horizon h`.
#[derive(Debug, Clone)]
pub struct Predictions<T> {
    pub horizons_s: Vec<f64>,
    pub horizons: Vec<usize>,
    pub channels: Vec<String>,
    pub data: Matrix<T>,
}

impl<T: Real> Predictions<T> {
    pub fn series(&self, horizon: usize, channel: usize) -> Vec<T> {
        self.data.column(horizon * self.channels.len() + channel)
    }
}

fn horizon_samples(horizons_s: &[f64], fs: f64) -> Vec<usize> {
    horizons_s.iter().map(|h| (h * fs).round() as usize).collect()
}

impl<T: Real> ReservoirModel<T> {
    /// Paper-mode training: every sample after the washout is used.
    pub fn fit(
        config: &ReservoirConfig,
        fs: f64,
        sensor_names: &[String],
        sensors: &[Vec<T>],
        targets: &TargetSeries<T>,
        horizons_s: &[f64],
        washout: usize,
    ) -> Result<Self, ReservoirError> {
        let n = sensors.first().map_or(0, Vec::len);
        Self::fit_rows(config, fs, sensor_names, sensors, targets, horizons_s, washout..n)
    }

    /// Trains on the given rows only, e.g. a leading block for held-out
    /// evaluation.
    pub fn fit_rows(
        config: &ReservoirConfig,
        fs: f64,
        sensor_names: &[String],
        sensors: &[Vec<T>],
        targets: &TargetSeries<T>,
        horizons_s: &[f64],
        rows: Range<usize>,
    ) -> Result<Self, ReservoirError> {
        let lags = mux_lags(config.mux_horizon_s, fs, config.mux_stride)?;
        let mux = build_mux(sensors, fs, config.mux_horizon_s, config.mux_stride)?;
        let esn = if config.architecture.uses_states() {
            Some(Esn::new(config, sensors.len(), lags)?)
        } else {
            None
        };
        let states = esn.as_ref().map(|e| e.run(&mux.data, None)).transpose()?;
        let features = feature_matrix(config.architecture, states.as_ref(), &mux);
        let horizons = horizon_samples(horizons_s, fs);
        let readout = train_readout(&features, &targets.data, &horizons, rows.clone(), config.ridge)?;
        Ok(Self {
            config: config.clone(),
            fs,
            sensor_names: sensor_names.to_vec(),
            target_names: targets.names.clone(),
            horizons_s: horizons_s.to_vec(),
            lags,
            mux_scale: mux.scale,
            esn,
            readout,
            train_rows: rows,
            condition: String::new(),
        })
    }

    pub fn with_condition(mut self, condition: impl Into<String>) -> Self {
        self.condition = condition.into();
        self
    }

    /// Features for new data with the trained mux scale and a reservoir
    /// started from rest.
    pub fn features(&self, sensors: &[Vec<T>]) -> Result<Matrix<T>, ReservoirError> {
        if sensors.len() != self.sensor_names.len() {
            return Err(ReservoirError::ConfigMismatch);
        }
        let mux = build_mux_with_scale(
            sensors,
            self.fs,
            self.config.mux_horizon_s,
            self.config.mux_stride,
            self.mux_scale,
        )?;
        let states = self.esn.as_ref().map(|e| e.run(&mux.data, None)).transpose()?;
        Ok(feature_matrix(self.config.architecture, states.as_ref(), &mux))
    }

    pub fn predict(&self, sensors: &[Vec<T>]) -> Result<Predictions<T>, ReservoirError> {
        let f = self.features(sensors)?;
        Ok(Predictions {
            horizons_s: self.horizons_s.clone(),
            horizons: self.readout.horizons.clone(),
            channels: self.target_names.clone(),
            data: self.readout.predict(&f),
        })
    }

    pub fn horizon_index(&self, horizon_s: f64) -> Result<usize, ReservoirError> {
        self.horizons_s
            .iter()
            .position(|h| (h - horizon_s).abs() < 1e-9)
            .ok_or(ReservoirError::UntrainedHorizon(horizon_s))
    }

    /// R² per trained horizon over rows `T ≥ start` with `T + h` in range.
    pub fn evaluate(
        &self,
        sensors: &[Vec<T>],
        targets: &TargetSeries<T>,
        start: usize,
    ) -> Result<Vec<T>, ReservoirError> {
        if targets.data.len() != self.target_names.len() {
            return Err(ReservoirError::ConfigMismatch);
        }
        let pred = self.predict(sensors)?;
        let n = targets.len().min(pred.data.rows());
        pred.horizons
            .iter()
            .enumerate()
            .map(|(hi, &h)| {
                let end = n.saturating_sub(h);
                let s = start.min(end);
                let p: Vec<Vec<T>> = (0..targets.data.len())
                    .map(|c| pred.series(hi, c)[s..end].to_vec())
                    .collect();
                let a: Vec<Vec<T>> = targets.data.iter().map(|t| t[s + h..end + h].to_vec()).collect();
                r2(&p, &a)
            })
            .collect()
    }
}

/// Scores of every model on every data set at one horizon.
#[derive(Debug, Clone, Serialize)]
pub struct CrossPrediction<T> {
    pub horizon_s: f64,
    pub train_labels: Vec<String>,
    pub eval_labels: Vec<String>,
    /// `r2[i][j]`: model `i` on data set `j`.
    pub r2: Vec<Vec<T>>,
}

/// Swaps training and evaluation sets: each model runs on each data set
/// (sensors, targets) after `washout` samples.
pub fn cross_predict<T: Real>(
    models: &[(String, &ReservoirModel<T>)],
    datasets: &[(String, &[Vec<T>], &TargetSeries<T>)],
    horizon_s: f64,
    washout: usize,
) -> Result<CrossPrediction<T>, ReservoirError> {
    if let Some((_, first)) = models.first() {
        for (_, m) in models {
            if m.sensor_names != first.sensor_names
                || m.config.mux_horizon_s != first.config.mux_horizon_s
                || m.config.mux_stride != first.config.mux_stride
            {
                return Err(ReservoirError::ConfigMismatch);
            }
        }
        for (_, s, t) in datasets {
            if s.len() != first.sensor_names.len() || t.names != first.target_names {
                return Err(ReservoirError::ConfigMismatch);
            }
        }
    }
    let r2 = models
        .par_iter()
        .map(|(_, m)| {
            let hi = m.horizon_index(horizon_s)?;
            datasets
                .iter()
                .map(|(_, s, t)| Ok(m.evaluate(s, t, washout)?[hi]))
                .collect::<Result<Vec<T>, _>>()
        })
        .collect::<Result<Vec<_>, ReservoirError>>()?;
    Ok(CrossPrediction {
        horizon_s,
        train_labels: models.iter().map(|m| m.0.clone()).collect(),
        eval_labels: datasets.iter().map(|d| d.0.clone()).collect(),
        r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::Architecture;

    fn sine_data(period: f64, n: usize) -> (Vec<Vec<f64>>, TargetSeries<f64>) {
        let w = 2.0 * std::f64::consts::PI / (period * 60.0);
        let s = vec![(0..n).map(|t| (w * t as f64).sin()).collect::<Vec<f64>>()];
        let y = TargetSeries {
            names: vec!["y".into()],
            data: vec![(0..n).map(|t| (w * t as f64).cos()).collect()],
        };
        (s, y)
    }

    #[test]
    fn horizons_and_self_evaluation() {
        let (s, y) = sine_data(2.0, 3000);
        let cfg = ReservoirConfig {
            mux_horizon_s: 0.5,
            architecture: Architecture::Hybrid,
            n_nodes: 30,
            ..Default::default()
        };
        let names = vec!["s".to_string()];
        let m = ReservoirModel::fit(&cfg, 60.0, &names, &s, &y, &[0.0, 1.0, 2.0], 500).unwrap();
        let scores = m.evaluate(&s, &y, 500).unwrap();
        assert!(scores.iter().all(|&r| r > 0.99), "{scores:?}");
        // One full period ahead is as easy as no horizon at all.
        assert!((scores[2] - scores[0]).abs() < 0.1);
        assert_eq!(m.horizon_index(3.0).unwrap_err(), ReservoirError::UntrainedHorizon(3.0));
        let x = cross_predict(&[("a".into(), &m)], &[("a".into(), &s, &y)], 0.0, 500).unwrap();
        assert!((x.r2[0][0] - scores[0]).abs() < 1e-12);
    }

    #[test]
    fn deterministic_weights() {
        let (s, y) = sine_data(1.5, 2000);
        let cfg = ReservoirConfig {
            n_nodes: 20,
            seed: 5,
            ..Default::default()
        };
        let names = vec!["s".to_string()];
        let a = ReservoirModel::fit(&cfg, 60.0, &names, &s, &y, &[0.0], 200).unwrap();
        let b = ReservoirModel::fit(&cfg, 60.0, &names, &s, &y, &[0.0], 200).unwrap();
        assert_eq!(a.readout.w, b.readout.w);
    }

    #[test]
    fn mismatched_sensors_rejected() {
        let (s, y) = sine_data(2.0, 2000);
        let cfg = ReservoirConfig {
            n_nodes: 10,
            ..Default::default()
        };
        let m = ReservoirModel::fit(&cfg, 60.0, &["s".to_string()], &s, &y, &[0.0], 200).unwrap();
        let two = vec![s[0].clone(), s[0].clone()];
        assert_eq!(m.evaluate(&two, &y, 200).unwrap_err(), ReservoirError::ConfigMismatch);
    }
}
