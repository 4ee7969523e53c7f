use crate::criticality::{default_threshold, extract_pulses};
use crate::geometry::wrap_angle;
use crate::kinematics::{lowpass_3hz, standardize, BodyFrameSeries, KinematicsError};
use crate::scalar::Real;

/// Regression targets, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSeries<T> {
    pub names: Vec<String>,
    pub data: Vec<Vec<T>>,
}

impl<T: Real> TargetSeries<T> {
    pub fn len(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, names: &[&str]) -> Option<Self> {
        let idx: Option<Vec<usize>> = names.iter().map(|n| self.names.iter().position(|m| m == n)).collect();
        let idx = idx?;
        Some(Self {
            names: idx.iter().map(|&i| self.names[i].clone()).collect(),
            data: idx.iter().map(|&i| self.data[i].clone()).collect(),
        })
    }

    /// Applies the 3 Hz low-pass to every channel.
    pub fn lowpassed(&self, fs: f64) -> Result<Self, KinematicsError> {
        Ok(Self {
            names: self.names.clone(),
            data: self.data.iter().map(|c| lowpass_3hz(c, fs)).collect::<Result<_, _>>()?,
        })
    }
}

/// Body-frame velocities `v_x, v_y, v_z`.
pub fn velocity_targets<T: Real>(body: &BodyFrameSeries<T>) -> TargetSeries<T> {
    TargetSeries {
        names: vec!["v_x".into(), "v_y".into(), "v_z".into()],
        data: vec![
            body.v_local.iter().map(|v| v.x).collect(),
            body.v_local.iter().map(|v| v.y).collect(),
            body.v_local.iter().map(|v| v.z).collect(),
        ],
    }
}

/// Pulse onsets as sample indices: upward crossings of the contracting
/// (negated, low-passed, standardized) inner radius over the default
/// threshold. The first sample at or after each crossing is reported.
pub fn pulse_onsets_from_radius<T: Real>(inner_radius: &[T], fs: f64) -> Result<Vec<usize>, KinematicsError> {
    let neg: Vec<T> = inner_radius.iter().map(|&r| -r).collect();
    let z = standardize(&lowpass_3hz(&neg, fs)?)?;
    let theta = default_threshold(&z);
    let events = extract_pulses(&z, fs, theta);
    let mut onsets: Vec<usize> = events
        .iter()
        .map(|e| (e.onset_s.as_f64() * fs).ceil() as usize)
        .collect();
    if let Some(last) = events.last() {
        onsets.push(((last.onset_s + last.duration_s).as_f64() * fs).ceil() as usize);
    }
    Ok(onsets)
}

/// Velocities plus position and orientation dead-reckoned from the
/// velocities and Euler angles, both reset to zero at every onset.
pub fn dead_reckoned_targets<T: Real>(body: &BodyFrameSeries<T>, onsets: &[usize], fs: f64) -> TargetSeries<T> {
    let n = body.v_local.len();
    let dt = T::lit(1.0 / fs);
    let mut is_onset = vec![false; n];
    for &k in onsets {
        if k < n {
            is_onset[k] = true;
        }
    }
    let mut pos = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];
    let mut rot = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];
    let mut origin = body.pose.euler.first().map_or([T::zero(); 3], |e| [e.0, e.1, e.2]);
    let mut p = [T::zero(); 3];
    for k in 0..n {
        let e = body.pose.euler[k];
        let e = [e.0, e.1, e.2];
        if is_onset[k] {
            p = [T::zero(); 3];
            origin = e;
        }
        for a in 0..3 {
            pos[a][k] = p[a];
            rot[a][k] = wrap_angle(e[a] - origin[a]);
        }
        let v = body.v_local[k].to_array();
        for a in 0..3 {
            p[a] += v[a] * dt;
        }
    }
    let mut t = velocity_targets(body);
    let names = ["p_x", "p_y", "p_z", "d_alpha", "d_beta", "d_gamma"];
    t.names.extend(names.iter().map(|s| s.to_string()));
    t.data.extend(pos);
    t.data.extend(rot);
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::analyze_body;
    use crate::synthgen::{gen_jellyfish, pwm_schedule, SyntheticJellyfishParams};

    #[test]
    fn dead_reckoning_resets_at_onsets() {
        let s = gen_jellyfish(
            &SyntheticJellyfishParams::default(),
            Some(&pwm_schedule(2.0, 30.0).unwrap()),
            30.0,
            1,
        )
        .unwrap();
        let body = analyze_body(&s.trial).unwrap();
        let onsets = pulse_onsets_from_radius(&body.pose.inner_radius, 60.0).unwrap();
        assert!((13..=16).contains(&onsets.len()), "{}", onsets.len());
        // Detected onsets trail the true contraction starts by less than the rise time.
        for &k in &onsets {
            let t = k as f64 / 60.0;
            assert!(s.pulse_onsets_s.iter().any(|&o| t >= o && t - o < 0.6), "{t}");
        }
        let tg = dead_reckoned_targets(&body, &onsets, 60.0);
        assert_eq!(tg.names.len(), 9);
        for &k in &onsets {
            for c in 3..9 {
                assert_eq!(tg.data[c][k], 0.0);
            }
        }
        // Between onsets position integrates velocity.
        let k = onsets[2] + 10;
        let manual: f64 = (onsets[2]..k).map(|j| body.v_local[j].z / 60.0).sum();
        assert!((tg.data[5][k] - manual).abs() < 1e-12);
    }
}
