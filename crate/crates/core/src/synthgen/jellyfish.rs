use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, StandardNormal};

use crate::geometry::{wrap_angle, Rotation3, Vec3};
use crate::ingest::{Condition, MarkerId, TrialRecording};
use crate::kinematics::{lowpass, BodyFrameSeries, BodyPoseSeries};

use super::schedule::StimulusSchedule;
use super::SynthError;

/// Angular position of each spoke in the body frame; markers 1 (outer) and
/// 2 (inner) of a colour share a spoke.
pub const MARKER_ANGLES_DEG: [(MarkerId, f64); 4] = [
    (MarkerId::R1, 135.0),
    (MarkerId::Y1, 225.0),
    (MarkerId::O1, 315.0),
    (MarkerId::B1, 45.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticJellyfishParams {
    pub frame_rate: f64,
    pub inner_radius_mm: f64,
    pub outer_radius_mm: f64,
    pub bell_height_mm: f64,
    /// Fractional radius loss at full contraction.
    pub contraction_amplitude: f64,
    pub rise_s: f64,
    pub relax_tau_s: f64,
    pub spont_median_interval_s: f64,
    pub spont_log_sd: f64,
    pub rest_probability: f64,
    pub rest_range_s: (f64, f64),
    /// Stimulus periods at or above this lock 1:1.
    pub responsiveness_floor_s: f64,
    pub latency_s: f64,
    pub latency_jitter_s: f64,
    pub amplitude_jitter: f64,
    /// Fast stimulation: chance of answering a burst once recovered.
    pub fast_response_probability: f64,
    pub refractory_s: f64,
    pub partial_range: (f64, f64),
    /// mm per unit contraction rate, forward and recovery strokes.
    pub propulsion_gain_mm: f64,
    pub recovery_gain_mm: f64,
    pub drift_sd_mm_s: f64,
    pub drift_tau_s: f64,
    pub tilt_rad: f64,
    pub wobble_rad: f64,
    /// Tangential margin twitch at each burst.
    pub twitch_rad: f64,
    pub twitch_s: f64,
    /// Outer radius offsets for the R/O and Y/B spoke pairs.
    pub asymmetry: [f64; 2],
    pub noise_sd_mm: f64,
}

impl Default for SyntheticJellyfishParams {
    fn default() -> Self {
        Self {
            frame_rate: 60.0,
            inner_radius_mm: 12.0,
            outer_radius_mm: 30.0,
            bell_height_mm: 10.0,
            contraction_amplitude: 0.25,
            rise_s: 0.6,
            relax_tau_s: 1.0,
            spont_median_interval_s: 2.2,
            spont_log_sd: 0.35,
            rest_probability: 0.08,
            rest_range_s: (3.0, 8.0),
            responsiveness_floor_s: 1.2,
            latency_s: 0.08,
            latency_jitter_s: 0.02,
            amplitude_jitter: 0.08,
            fast_response_probability: 0.6,
            refractory_s: 0.9,
            partial_range: (0.3, 0.8),
            propulsion_gain_mm: 10.0,
            recovery_gain_mm: 3.0,
            drift_sd_mm_s: 2.0,
            drift_tau_s: 1.5,
            tilt_rad: 0.2,
            wobble_rad: 0.05,
            twitch_rad: 0.06,
            twitch_s: 0.15,
            asymmetry: [0.03, -0.02],
            noise_sd_mm: 0.05,
        }
    }
}

impl SyntheticJellyfishParams {
    /// Per-animal variation around the defaults.
    pub fn animal(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA11A_0000);
        let mut jitter = |x: f64, rel: f64| x * (1.0 + rng.random_range(-rel..rel));
        let d = Self::default();
        Self {
            inner_radius_mm: jitter(d.inner_radius_mm, 0.15),
            outer_radius_mm: jitter(d.outer_radius_mm, 0.15),
            bell_height_mm: jitter(d.bell_height_mm, 0.15),
            contraction_amplitude: jitter(d.contraction_amplitude, 0.2),
            propulsion_gain_mm: jitter(d.propulsion_gain_mm, 0.2),
            asymmetry: [jitter(d.asymmetry[0], 0.5), jitter(d.asymmetry[1], 0.5)],
            ..d
        }
    }
}

/// Generated markers with the exact body-frame trajectory behind them.
#[derive(Debug, Clone)]
pub struct SyntheticTrial {
    pub trial: TrialRecording<f64>,
    pub truth: BodyFrameSeries<f64>,
    /// Contraction state in [0, 1).
    pub contraction: Vec<f64>,
    pub pulse_onsets_s: Vec<f64>,
    pub stimulus_onsets_s: Vec<f64>,
}

/// Unit contraction profile: raised-cosine rise then exponential
/// relaxation. Returns `(value, derivative)` at `s` seconds after onset.
pub fn contraction_kernel(s: f64, rise_s: f64, tau_s: f64) -> (f64, f64) {
    if s < 0.0 {
        (0.0, 0.0)
    } else if s < rise_s {
        (
            0.5 - 0.5 * (PI * s / rise_s).cos(),
            0.5 * PI / rise_s * (PI * s / rise_s).sin(),
        )
    } else {
        let e = (-(s - rise_s) / tau_s).exp();
        (e, -e / tau_s)
    }
}

fn pulse_times(
    p: &SyntheticJellyfishParams,
    schedule: Option<&StimulusSchedule>,
    duration_s: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<(f64, f64)> {
    let amp = |rng: &mut ChaCha8Rng| 1.0 - p.amplitude_jitter * rng.random::<f64>();
    let mut out = Vec::new();
    match schedule {
        None => {
            let interval = LogNormal::new(p.spont_median_interval_s.ln(), p.spont_log_sd).expect("valid lognormal");
            let mut t = rng.random_range(0.0..p.spont_median_interval_s);
            while t < duration_s {
                out.push((t, amp(rng)));
                t += interval.sample(rng).max(p.rise_s);
                if rng.random::<f64>() < p.rest_probability {
                    t += rng.random_range(p.rest_range_s.0..p.rest_range_s.1);
                }
            }
        }
        Some(s) => {
            let locked = s.period_s >= p.responsiveness_floor_s;
            let mut last = f64::NEG_INFINITY;
            for &o in &s.onsets_s {
                let t = o + p.latency_s + p.latency_jitter_s * rng.random_range(-1.0..1.0);
                if t >= duration_s {
                    break;
                }
                if locked {
                    out.push((t, amp(rng)));
                } else if t - last >= p.refractory_s && rng.random::<f64>() < p.fast_response_probability {
                    out.push((t, amp(rng) * rng.random_range(p.partial_range.0..p.partial_range.1)));
                    last = t;
                }
            }
        }
    }
    out
}

/// Simulates a trial. With `schedule`, pulses follow the bursts (1:1 above
/// the responsiveness floor, sporadic and partial below it) and each burst
/// twitches the bell margin; without, pulse intervals are lognormal with
/// occasional rests.
pub fn gen_jellyfish(
    params: &SyntheticJellyfishParams,
    schedule: Option<&StimulusSchedule>,
    duration_s: f64,
    seed: u64,
) -> Result<SyntheticTrial, SynthError> {
    if duration_s < 10.0 {
        return Err(SynthError::DurationTooShort(duration_s));
    }
    let p = params;
    let fs = p.frame_rate;
    let dt = 1.0 / fs;
    let n = (duration_s * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Contraction: each new pulse only recruits what is still relaxed.
    let raw = pulse_times(p, schedule, duration_s, &mut rng);
    let mut pulses: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    for (t, a) in raw {
        let c_now: f64 = pulses
            .iter()
            .map(|&(tp, ap)| ap * contraction_kernel(t - tp, p.rise_s, p.relax_tau_s).0)
            .sum();
        pulses.push((t, a * (1.0 - c_now.min(1.0))));
    }
    let horizon = p.rise_s + 12.0 * p.relax_tau_s;
    let mut c = vec![0.0; n];
    let mut cdot = vec![0.0; n];
    for &(tp, ap) in &pulses {
        let k0 = (tp * fs).floor().max(0.0) as usize;
        let k1 = (((tp + horizon) * fs).ceil() as usize).min(n);
        for k in k0..k1 {
            let (v, d) = contraction_kernel(k as f64 * dt - tp, p.rise_s, p.relax_tau_s);
            c[k] += ap * v;
            cdot[k] += ap * d;
        }
    }

    let stim_onsets: Vec<f64> = schedule.map(|s| s.onsets_s.clone()).unwrap_or_default();
    let twitch = |t: f64| -> f64 {
        stim_onsets
            .iter()
            .map(|&o| {
                let u = (t - o) / p.twitch_s;
                if (0.0..1.0).contains(&u) {
                    (PI * u).sin().powi(2)
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            * p.twitch_rad
    };

    // Transverse drift (Ornstein–Uhlenbeck) and slow orientation wobble.
    let decay = (-dt / p.drift_tau_s).exp();
    let kick = p.drift_sd_mm_s * (1.0 - decay * decay).sqrt();
    let mut drift = [0.0f64; 2];
    let heading0 = rng.random_range(-PI..PI);
    let phases: [f64; 3] = [
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
    ];

    let mut com = Vec3::new(75.0, 75.0, 75.0);
    let mut frames = Vec::with_capacity(n);
    let mut pose = BodyPoseSeries {
        com: Vec::with_capacity(n),
        inner_radius: Vec::with_capacity(n),
        outer_radius: Vec::with_capacity(n),
        rotation: Vec::with_capacity(n),
        euler: Vec::with_capacity(n),
    };
    let mut v_local = Vec::with_capacity(n);
    let noise = Normal::new(0.0, p.noise_sd_mm.max(0.0)).expect("finite noise sd");
    let deg = PI / 180.0;

    for k in 0..n {
        let t = k as f64 * dt;
        let alpha = wrap_angle(heading0 + 0.3 * (2.0 * PI * t / 23.0 + phases[0]).sin());
        let beta = p.tilt_rad + p.wobble_rad * (2.0 * PI * t / 7.0 + phases[1]).sin();
        let gamma = wrap_angle(0.1 * (2.0 * PI * t / 11.0 + phases[2]).sin());
        let rot = Rotation3::from_euler_zyz(alpha, beta, gamma);

        let shrink = 1.0 - p.contraction_amplitude * c[k];
        let r_in = p.inner_radius_mm * shrink;
        let h = p.bell_height_mm * (1.0 + 0.6 * p.contraction_amplitude * c[k]);
        let tw = twitch(t);
        let mut body = [Vec3::zero(); 8];
        for (i, &(outer, angle)) in MARKER_ANGLES_DEG.iter().enumerate() {
            let inner = MarkerId::ALL[outer.index() + 1];
            let a = angle * deg;
            body[inner.index()] = Vec3::new(r_in * a.cos(), r_in * a.sin(), 0.0);
            // R/O and Y/B sit on opposite spokes and share their offsets, and
            // the twitch turns opposite markers the same way, so the outer
            // centroid stays on the axis.
            let r_out = p.outer_radius_mm * (1.0 + p.asymmetry[i % 2]) * shrink;
            let a_out = a + if i % 2 == 0 { tw } else { -tw };
            body[outer.index()] = Vec3::new(r_out * a_out.cos(), r_out * a_out.sin(), -h);
        }
        let outer_r = MarkerId::OUTER.iter().map(|m| body[m.index()].norm()).sum::<f64>() / 4.0;

        let vz = p.propulsion_gain_mm * cdot[k].max(0.0) - p.recovery_gain_mm * (-cdot[k]).max(0.0);
        let v = Vec3::new(drift[0], drift[1], vz);

        let mut world = body.map(|b| rot.apply(b) + com);
        if p.noise_sd_mm > 0.0 {
            for w in &mut world {
                *w = *w + Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
            }
        }
        frames.push(world);
        pose.com.push(com);
        pose.inner_radius.push(r_in);
        pose.outer_radius.push(outer_r);
        pose.rotation.push(rot);
        pose.euler.push((alpha, beta, gamma));
        v_local.push(v);

        com = com + rot.apply(v) * dt;
        for d in &mut drift {
            let z: f64 = StandardNormal.sample(&mut rng);
            *d = *d * decay + kick * z;
        }
    }

    let condition = match schedule {
        Some(s) => Condition::Stimulated { period_s: s.period_s },
        None => Condition::Spontaneous,
    };
    let stimulus = match schedule {
        Some(s) => s.frame_mask(fs, n),
        None => vec![false; n],
    };
    Ok(SyntheticTrial {
        trial: TrialRecording {
            animal_id: format!("synth{seed}"),
            condition,
            frame_rate: fs,
            frames,
            stimulus,
            valid: vec![true; n],
        },
        truth: BodyFrameSeries { pose, v_local },
        contraction: c,
        pulse_onsets_s: pulses.iter().filter(|p| p.1 > 0.05).map(|p| p.0).collect(),
        stimulus_onsets_s: stim_onsets,
    })
}

/// Control responses with no shared drive: independent Gaussian noise per
/// channel, low-passed to `cutoff_hz`.
pub fn gen_independent_control(n_channels: usize, n: usize, fs: f64, cutoff_hz: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_channels)
        .map(|_| {
            let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            lowpass(&x, fs, cutoff_hz).expect("control series long enough to filter")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{analyze_body, moving_average, pairwise_lengths, MOVING_AVERAGE_WINDOW, RADIAL};
    use crate::synthgen::pwm_schedule;

    fn quiet() -> SyntheticJellyfishParams {
        SyntheticJellyfishParams {
            noise_sd_mm: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn zero_amplitude_is_static() {
        let p = SyntheticJellyfishParams {
            contraction_amplitude: 0.0,
            propulsion_gain_mm: 0.0,
            recovery_gain_mm: 0.0,
            drift_sd_mm_s: 0.0,
            noise_sd_mm: 0.0,
            ..Default::default()
        };
        let s = gen_jellyfish(&p, None, 20.0, 3).unwrap();
        let l = pairwise_lengths(&s.trial);
        for ch in &l.data {
            assert!(ch.iter().all(|v| (v - ch[0]).abs() < 1e-9));
        }
        assert!(s.truth.v_local.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn symmetric_rest_radial_lengths_agree() {
        let p = SyntheticJellyfishParams {
            asymmetry: [0.0, 0.0],
            ..quiet()
        };
        let s = gen_jellyfish(&p, None, 10.0, 1).unwrap();
        let l = pairwise_lengths(&s.trial);
        let r: Vec<f64> = RADIAL.iter().map(|&(a, b)| l.channel(a, b)[0]).collect();
        assert!(r.iter().all(|v| (v - r[0]).abs() < 1e-9));
    }

    #[test]
    fn kinematics_reproduce_ground_truth() {
        let sched = pwm_schedule(2.0, 30.0).unwrap();
        let s = gen_jellyfish(&quiet(), Some(&sched), 30.0, 5).unwrap();
        let body = analyze_body(&s.trial).unwrap();
        for k in 0..s.trial.len() {
            assert!((body.pose.inner_radius[k] - s.truth.pose.inner_radius[k]).abs() < 1e-6);
            assert!((body.pose.outer_radius[k] - s.truth.pose.outer_radius[k]).abs() < 1e-6);
            assert!(body.pose.com[k].distance(s.truth.pose.com[k]) < 1e-6);
        }
        // The pipeline smooths world-frame velocity; apply the same
        // smoothing to the true world velocity before comparing.
        let world: Vec<Vec3<f64>> = (0..s.trial.len())
            .map(|k| s.truth.pose.rotation[k].apply(s.truth.v_local[k]))
            .collect();
        let smooth =
            |f: fn(&Vec3<f64>) -> f64| moving_average(&world.iter().map(f).collect::<Vec<_>>(), MOVING_AVERAGE_WINDOW);
        let (sx, sy, sz) = (smooth(|v| v.x), smooth(|v| v.y), smooth(|v| v.z));
        for k in 0..s.trial.len() - 3 {
            let expect = s.truth.pose.rotation[k].apply_inverse(Vec3::new(sx[k], sy[k], sz[k]));
            assert!(body.v_local[k].distance(expect) < 1e-3, "{k}");
        }
    }

    #[test]
    fn locked_and_fast_stimulation() {
        let slow = gen_jellyfish(&quiet(), Some(&pwm_schedule(2.0, 60.0).unwrap()), 60.0, 2).unwrap();
        assert_eq!(slow.pulse_onsets_s.len(), 30);
        let fast = gen_jellyfish(&quiet(), Some(&pwm_schedule(0.5, 60.0).unwrap()), 60.0, 2).unwrap();
        assert!(fast.pulse_onsets_s.len() < 100);
        assert!(fast.contraction.iter().all(|&c| (0.0..1.0).contains(&c)));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = gen_jellyfish(&Default::default(), None, 12.0, 9).unwrap();
        let b = gen_jellyfish(&Default::default(), None, 12.0, 9).unwrap();
        assert_eq!(a.trial.frames, b.trial.frames);
    }
}
