use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::linalg::{cholesky, cholesky_solve, Matrix};
use crate::scalar::Real;

use super::mux::MuxedInput;
use super::{Architecture, ReservoirError};

/// Ridge added to each diagonal entry of the normal equations, relative to
/// that entry, so it acts the same whatever the feature scaling.
pub const DEFAULT_RIDGE: f64 = 1e-8;

/// Row `T`: `[X(T+1), U(T), 1]`, restricted to what the architecture uses.
pub fn feature_matrix<T: Real>(arch: Architecture, states: Option<&Matrix<T>>, mux: &MuxedInput<T>) -> Matrix<T> {
    let n = mux.len();
    let ns = if arch.uses_states() {
        states.map_or(0, Matrix::cols)
    } else {
        0
    };
    let nu = if arch.uses_inputs() { mux.width() } else { 0 };
    let mut f = Matrix::zeros(n, ns + nu + 1);
    for t in 0..n {
        let row = f.row_mut(t);
        if ns > 0 {
            row[..ns].copy_from_slice(states.expect("states present").row(t));
        }
        if nu > 0 {
            row[ns..ns + nu].copy_from_slice(mux.data.row(t));
        }
        row[ns + nu] = T::one();
    }
    f
}

/// Linear readout. Output column `h·n_channels + c` predicts channel `c`
/// at `horizons[h]` samples ahead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Readout<T> {
    pub w: Matrix<T>,
    pub n_channels: usize,
    pub horizons: Vec<usize>,
}

impl<T: Real> Readout<T> {
    pub fn n_outputs(&self) -> usize {
        self.w.cols()
    }

    pub fn predict(&self, features: &Matrix<T>) -> Matrix<T> {
        features.matmul(&self.w)
    }
}

/// Least squares over `rows`, each feature row `T` paired with
/// `targets[c][T + h]` for every horizon `h`.
pub fn train_readout<T: Real>(
    features: &Matrix<T>,
    targets: &[Vec<T>],
    horizons: &[usize],
    rows: Range<usize>,
    ridge: f64,
) -> Result<Readout<T>, ReservoirError> {
    let p = features.cols();
    let h_max = horizons.iter().copied().max().unwrap_or(0);
    let n = targets.first().map_or(0, Vec::len).min(features.rows());
    let end = rows.end.min(n.saturating_sub(h_max));
    let start = rows.start.min(end);
    let m = end - start;
    if m < 3 * p {
        return Err(ReservoirError::InsufficientSamples {
            samples: m,
            features: p,
        });
    }
    let nc = targets.len();
    let n_out = nc * horizons.len();
    let f = features.slice_rows(start, end);
    let y = Matrix::from_fn(m, n_out, |r, o| targets[o % nc][start + r + horizons[o / nc]]);
    let mut g = f.gram();
    let eps = T::lit(ridge);
    let floor = (0..p).fold(T::zero(), |m, i| m.max(g[(i, i)])) * T::EPS;
    for i in 0..p {
        // All-zero columns (e.g. lags never filled) still get a pivot.
        let d = g[(i, i)].max(floor);
        g[(i, i)] += eps * d;
    }
    let l = cholesky(&g).ok_or(ReservoirError::RankDeficient)?;
    let mut w = f.t_matmul(&y);
    cholesky_solve(&l, &mut w);
    if w.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(ReservoirError::RankDeficient);
    }
    Ok(Readout {
        w,
        n_channels: nc,
        horizons: horizons.to_vec(),
    })
}

/// `1 − SSE/SST` for one channel.
pub fn r2_channel<T: Real>(predicted: &[T], actual: &[T]) -> Result<T, ReservoirError> {
    if predicted.len() != actual.len() || actual.len() < 2 {
        return Err(ReservoirError::TooShort {
            len: actual.len().min(predicted.len()),
            min: 2,
        });
    }
    let m = actual.iter().copied().sum::<T>() / T::from_count(actual.len());
    let sst: T = actual.iter().map(|&a| (a - m) * (a - m)).sum();
    let scale = actual.iter().fold(T::zero(), |s, a| s.max(a.abs()));
    if !(sst > scale * scale * T::EPS * T::from_count(actual.len())) {
        return Err(ReservoirError::ConstantTarget(0));
    }
    let sse: T = predicted.iter().zip(actual).map(|(&p, &a)| (p - a) * (p - a)).sum();
    Ok(T::one() - sse / sst)
}

/// Unweighted mean of the per-channel scores.
pub fn r2<T: Real>(predicted: &[Vec<T>], actual: &[Vec<T>]) -> Result<T, ReservoirError> {
    let mut total = T::zero();
    for (c, (p, a)) in predicted.iter().zip(actual).enumerate() {
        total += r2_channel(p, a).map_err(|e| match e {
            ReservoirError::ConstantTarget(_) => ReservoirError::ConstantTarget(c),
            other => other,
        })?;
    }
    Ok(total / T::from_count(actual.len()))
}
