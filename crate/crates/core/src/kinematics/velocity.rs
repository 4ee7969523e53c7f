use crate::geometry::Vec3;
use crate::ingest::TrialRecording;
use crate::scalar::Real;

use super::frame::BodyPoseSeries;

pub const MOVING_AVERAGE_WINDOW: usize = 5;

/// Explicit-Euler velocity: `(x[k+1] - x[k]) * fs`; the final sample
/// reuses the last available difference.
pub fn forward_difference<T: Real>(x: &[T], fs: T) -> Vec<T> {
    let n = x.len();
    if n < 2 {
        return vec![T::zero(); n];
    }
    let mut v: Vec<T> = x.windows(2).map(|w| (w[1] - w[0]) * fs).collect();
    v.push(v[n - 2]);
    v
}

/// Centred moving average; the window shrinks symmetrically at the ends.
pub fn moving_average<T: Real>(x: &[T], window: usize) -> Vec<T> {
    let n = x.len();
    let half = window / 2;
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let s = &x[i - h..=i + h];
            s.iter().copied().sum::<T>() / T::from_count(s.len())
        })
        .collect()
}

/// COM velocity by forward difference, smoothed with a 5-sample centred
/// moving average in the world frame, then rotated into the body frame of
/// the same instant.
pub fn local_velocities<T: Real>(trial: &TrialRecording<T>, pose: &BodyPoseSeries<T>) -> Vec<Vec3<T>> {
    let fs = T::lit(trial.frame_rate);
    let axis = |f: fn(&Vec3<T>) -> T| -> Vec<T> {
        let x: Vec<T> = pose.com.iter().map(f).collect();
        moving_average(&forward_difference(&x, fs), MOVING_AVERAGE_WINDOW)
    };
    let vx = axis(|p| p.x);
    let vy = axis(|p| p.y);
    let vz = axis(|p| p.z);
    (0..pose.len())
        .map(|k| pose.rotation[k].apply_inverse(Vec3::new(vx[k], vy[k], vz[k])))
        .collect()
}
