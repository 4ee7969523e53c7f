use crate::linalg::Matrix;
use crate::scalar::Real;

use super::ReservoirError;

/// Temporally multiplexed input, one row per time step.
///
/// Columns are sensor-major: sensor `s`, lag `j` sits in column
/// `s·lags + j` and holds `S_s(T − j·stride)`, zero before the series
/// starts. Every entry is multiplied by `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuxedInput<T> {
    pub data: Matrix<T>,
    pub n_sensors: usize,
    pub lags: usize,
    pub stride: usize,
    pub scale: T,
}

impl<T: Real> MuxedInput<T> {
    pub fn width(&self) -> usize {
        self.n_sensors * self.lags
    }

    pub fn len(&self) -> usize {
        self.data.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.rows() == 0
    }
}

/// Number of lags per sensor, `τ_m·fs/stride + 1`.
pub fn mux_lags(horizon_s: f64, fs: f64, stride: usize) -> Result<usize, ReservoirError> {
    let span = horizon_s * fs;
    let bad = ReservoirError::InvalidMux { horizon_s, fs, stride };
    if stride == 0 || !(horizon_s >= 0.0) {
        return Err(bad);
    }
    let steps = span / stride as f64;
    if (steps - steps.round()).abs() > 1e-9 {
        return Err(bad);
    }
    Ok(steps.round() as usize + 1)
}

/// Builds the mux and picks `scale = 1/(width·max|S|)`, which bounds the
/// magnitude of the summed input by one at every step.
pub fn build_mux<T: Real>(
    sensors: &[Vec<T>],
    fs: f64,
    horizon_s: f64,
    stride: usize,
) -> Result<MuxedInput<T>, ReservoirError> {
    let lags = mux_lags(horizon_s, fs, stride)?;
    let peak = sensors.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
    let width = sensors.len() * lags;
    let scale = if peak > T::zero() && width > 0 {
        T::one() / (T::from_count(width) * peak)
    } else {
        T::one()
    };
    build_mux_with_scale(sensors, fs, horizon_s, stride, scale)
}

/// Builds the mux with a given scale, e.g. the one a model was trained with.
pub fn build_mux_with_scale<T: Real>(
    sensors: &[Vec<T>],
    fs: f64,
    horizon_s: f64,
    stride: usize,
    scale: T,
) -> Result<MuxedInput<T>, ReservoirError> {
    let lags = mux_lags(horizon_s, fs, stride)?;
    let n = sensors.first().map_or(0, Vec::len);
    let min = (lags - 1) * stride + 1;
    if n < min || sensors.iter().any(|s| s.len() != n) {
        return Err(ReservoirError::TooShort { len: n, min });
    }
    let width = sensors.len() * lags;
    let mut data = Matrix::zeros(n, width);
    for t in 0..n {
        let row = data.row_mut(t);
        for (s, series) in sensors.iter().enumerate() {
            for j in 0..lags {
                let back = j * stride;
                if back <= t {
                    row[s * lags + j] = series[t - back] * scale;
                }
            }
        }
    }
    Ok(MuxedInput {
        data,
        n_sensors: sensors.len(),
        lags,
        stride,
        scale,
    })
}
