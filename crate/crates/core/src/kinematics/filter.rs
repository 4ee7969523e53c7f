use crate::scalar::Real;

use super::KinematicsError;

pub const LOWPASS_CUTOFF_HZ: f64 = 3.0;

/// Second-order Butterworth low-pass from the bilinear transform with
/// frequency prewarping. `a0` is normalized to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Butterworth2<T> {
    pub b: [T; 3],
    pub a: [T; 2],
}

impl<T: Real> Butterworth2<T> {
    pub fn new(fs: f64, cutoff: f64) -> Result<Self, KinematicsError> {
        if !(fs >= 10.0) || !(cutoff > 0.0) || cutoff >= fs / 2.0 {
            return Err(KinematicsError::InvalidSampling { fs, cutoff });
        }
        let k = (std::f64::consts::PI * cutoff / fs).tan();
        let s2 = std::f64::consts::SQRT_2;
        let norm = 1.0 / (1.0 + s2 * k + k * k);
        let b0 = k * k * norm;
        Ok(Self {
            b: [T::lit(b0), T::lit(2.0 * b0), T::lit(b0)],
            a: [
                T::lit(2.0 * (k * k - 1.0) * norm),
                T::lit((1.0 - s2 * k + k * k) * norm),
            ],
        })
    }

    /// Samples the response needs to settle, used for edge padding.
    pub fn settle_len(fs: f64, cutoff: f64) -> usize {
        (fs / cutoff).ceil() as usize
    }

    /// Squared magnitude response at `f` Hz for sampling rate `fs`.
    pub fn power_gain(&self, f: f64, fs: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * f / fs;
        let (b0, b1, b2) = (self.b[0].as_f64(), self.b[1].as_f64(), self.b[2].as_f64());
        let (a1, a2) = (self.a[0].as_f64(), self.a[1].as_f64());
        let eval = |c0: f64, c1: f64, c2: f64| {
            let re = c0 + c1 * w.cos() + c2 * (2.0 * w).cos();
            let im = -c1 * w.sin() - c2 * (2.0 * w).sin();
            re * re + im * im
        };
        eval(b0, b1, b2) / eval(1.0, a1, a2)
    }

    /// One causal pass, transposed direct form II, state initialised to the
    /// steady state for a step of height `x[0]`.
    fn run(&self, x: &mut [T]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let Some(&x0) = x.first() else { return };
        let mut z1 = (T::one() - b0) * x0;
        let mut z2 = (b2 - a2) * x0;
        for v in x.iter_mut() {
            let xi = *v;
            let y = b0 * xi + z1;
            z1 = b1 * xi - a1 * y + z2;
            z2 = b2 * xi - a2 * y;
            *v = y;
        }
    }

    /// Forward-backward filtering with odd reflection at both ends.
    fn filtfilt(&self, x: &[T], pad: usize) -> Vec<T> {
        let n = x.len();
        let (first, last) = (x[0], x[n - 1]);
        let two = T::lit(2.0);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| two * first - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| two * last - x[n - 1 - i]));
        self.run(&mut ext);
        ext.reverse();
        self.run(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Zero-phase 2nd-order Butterworth low-pass.
///
/// The forward-backward pass is averaged with its mirror image so the
/// result commutes exactly with time reversal.
pub fn lowpass<T: Real>(x: &[T], fs: f64, cutoff: f64) -> Result<Vec<T>, KinematicsError> {
    let filt = Butterworth2::<T>::new(fs, cutoff)?;
    let settle = Butterworth2::<T>::settle_len(fs, cutoff);
    let min = 3 * settle;
    if x.len() < min {
        return Err(KinematicsError::TooShort { len: x.len(), min });
    }
    let pad = min.min(x.len() - 1);
    let fwd = filt.filtfilt(x, pad);
    let rev: Vec<T> = x.iter().rev().copied().collect();
    let bwd = filt.filtfilt(&rev, pad);
    let half = T::lit(0.5);
    Ok(fwd
        .iter()
        .zip(bwd.iter().rev())
        .map(|(&a, &b)| half * (a + b))
        .collect())
}

pub fn lowpass_3hz<T: Real>(x: &[T], fs: f64) -> Result<Vec<T>, KinematicsError> {
    lowpass(x, fs, LOWPASS_CUTOFF_HZ)
}

/// Z-score with the population standard deviation. `NaN` samples are
/// skipped for the statistics and stay `NaN`.
pub fn standardize<T: Real>(x: &[T]) -> Result<Vec<T>, KinematicsError> {
    let mut out = x.to_vec();
    standardize_in_place(&mut out)?;
    Ok(out)
}

pub fn standardize_in_place<T: Real>(x: &mut [T]) -> Result<(), KinematicsError> {
    let finite: Vec<T> = x.iter().copied().filter(|v| !v.is_nan()).collect();
    if finite.is_empty() {
        return Err(KinematicsError::ZeroVariance);
    }
    let m = crate::scalar::mean(&finite);
    let sd = crate::scalar::variance(&finite).sqrt();
    let scale = finite.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    if !(sd > scale * T::EPS * T::lit(16.0)) || sd == T::zero() {
        return Err(KinematicsError::ZeroVariance);
    }
    for v in x.iter_mut() {
        *v = (*v - m) / sd;
    }
    Ok(())
}
