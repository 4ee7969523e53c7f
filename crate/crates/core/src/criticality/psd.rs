use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::{mean, Real};

use super::CriticalityError;

pub const WELCH_SEGMENT: usize = 512;
pub const MIN_PSD_LEN: usize = 256;
/// Peaks below this frequency are ignored (drift, not dynamics).
pub const PEAK_FLOOR_HZ: f64 = 0.05;

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate<T> {
    pub freqs: Vec<T>,
    pub power: Vec<T>,
    pub peak_freq: T,
    pub peak_power: T,
}

impl<T: Real> PsdEstimate<T> {
    pub fn bin_width(&self) -> T {
        if self.freqs.len() < 2 {
            T::zero()
        } else {
            self.freqs[1] - self.freqs[0]
        }
    }

    /// Riemann sum of the density; matches the variance of the input.
    pub fn total_power(&self) -> T {
        self.power.iter().copied().sum::<T>() * self.bin_width()
    }

    /// Builds an estimate from explicit bins and locates the peak.
    pub fn from_bins(freqs: Vec<T>, power: Vec<T>) -> Result<Self, CriticalityError> {
        let floor = T::lit(PEAK_FLOOR_HZ);
        let (i, _) = freqs
            .iter()
            .zip(&power)
            .enumerate()
            .filter(|(_, (&f, _))| f > floor)
            .max_by(|a, b| a.1 .1.partial_cmp(b.1 .1).unwrap_or(std::cmp::Ordering::Equal))
            .ok_or(CriticalityError::NoPeak)?;
        Ok(Self {
            peak_freq: freqs[i],
            peak_power: power[i],
            freqs,
            power,
        })
    }
}

/// Welch estimate with the default 512-sample segments.
pub fn psd<T: Real>(x: &[T], fs: f64) -> Result<PsdEstimate<T>, CriticalityError> {
    psd_with_segment(x, fs, WELCH_SEGMENT)
}

/// Welch estimate: Hann window, 50% overlap, mean removed, density
/// scaling. The segment shrinks to the series length for short input.
pub fn psd_with_segment<T: Real>(x: &[T], fs: f64, segment: usize) -> Result<PsdEstimate<T>, CriticalityError> {
    let n = x.len();
    if n < MIN_PSD_LEN {
        return Err(CriticalityError::TooShort {
            len: n,
            min: MIN_PSD_LEN,
        });
    }
    let seg = segment.max(MIN_PSD_LEN).min(n);
    let step = seg / 2;
    let m = mean(x);
    let window: Vec<T> = (0..seg)
        .map(|k| T::lit(0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / seg as f64).cos()))
        .collect();
    let wss: T = window.iter().map(|&w| w * w).sum();
    let fft = FftPlanner::<T>::new().plan_fft_forward(seg);

    let nbins = seg / 2 + 1;
    let mut acc = vec![T::zero(); nbins];
    let mut buf = vec![Complex::new(T::zero(), T::zero()); seg];
    let mut count = 0usize;
    let mut start = 0;
    while start + seg <= n {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = Complex::new((x[start + k] - m) * window[k], T::zero());
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += step;
    }
    let fs_t = T::lit(fs);
    let scale = T::one() / (fs_t * wss * T::from_count(count));
    let two = T::lit(2.0);
    let power: Vec<T> = acc
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let one_sided = k != 0 && !(seg % 2 == 0 && k == seg / 2);
            if one_sided {
                a * scale * two
            } else {
                a * scale
            }
        })
        .collect();
    let df = fs / seg as f64;
    let freqs = (0..nbins).map(|k| T::lit(k as f64 * df)).collect();
    PsdEstimate::from_bins(freqs, power)
}
