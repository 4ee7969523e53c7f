use std::sync::OnceLock;

use medusa_core::criticality::{extract_pulses, fit_power_law_events, psd, EventField, PulseEvent};
use medusa_core::esp::{esp_index, EspParams, EspTrial};
use medusa_core::geometry::{Rotation3, Vec3};
use medusa_core::ingest::TrialRecording;
use medusa_core::kinematics::{analyze_body, pairwise_lengths};
use medusa_core::reservoir::{build_mux, Esn, ReservoirConfig, ReservoirModel, TargetSeries};
use medusa_core::response::one_way_anova;
use medusa_core::synthgen::{gen_avalanche, gen_jellyfish, pwm_schedule, AvalancheParams, SyntheticJellyfishParams};
use medusa_core::Matrix64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn base_trial() -> &'static TrialRecording<f64> {
    static TRIAL: OnceLock<TrialRecording<f64>> = OnceLock::new();
    TRIAL.get_or_init(|| {
        let sched = pwm_schedule(2.0, 10.0).unwrap();
        gen_jellyfish(&SyntheticJellyfishParams::default(), Some(&sched), 10.0, 3)
            .unwrap()
            .trial
    })
}

fn noise(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn rigid(trial: &TrialRecording<f64>, r: &Rotation3<f64>, t: Vec3<f64>) -> TrialRecording<f64> {
    let mut out = trial.clone();
    for f in &mut out.frames {
        for p in f.iter_mut() {
            *p = r.apply(*p) + t;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rigid_motion_preserves_lengths_radii_and_local_velocity(
        alpha in -3.1f64..3.1, beta in 0.0f64..3.1, gamma in -3.1f64..3.1,
        tx in -500.0f64..500.0, ty in -500.0f64..500.0, tz in -500.0f64..500.0,
    ) {
        let trial = base_trial();
        let moved = rigid(trial, &Rotation3::from_euler_zyz(alpha, beta, gamma), Vec3::new(tx, ty, tz));
        let (a, b) = (pairwise_lengths(trial), pairwise_lengths(&moved));
        for (ca, cb) in a.data.iter().zip(&b.data) {
            for (x, y) in ca.iter().zip(cb) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
        let (ba, bb) = (analyze_body(trial).unwrap(), analyze_body(&moved).unwrap());
        for k in 0..trial.len() {
            prop_assert!((ba.pose.inner_radius[k] - bb.pose.inner_radius[k]).abs() < 1e-9);
            prop_assert!((ba.pose.outer_radius[k] - bb.pose.outer_radius[k]).abs() < 1e-9);
            prop_assert!(ba.v_local[k].distance(bb.v_local[k]) < 1e-7);
        }
    }

    #[test]
    fn welch_density_integrates_to_variance(seed in 0u64..1000, sd in 0.1f64..10.0, n in 4096usize..8192) {
        let x: Vec<f64> = noise(seed, n).into_iter().map(|v| v * sd).collect();
        let est = psd(&x, 60.0).unwrap();
        let m = x.iter().sum::<f64>() / n as f64;
        let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
        prop_assert!((est.total_power() / var - 1.0).abs() < 0.15, "{} vs {}", est.total_power(), var);
    }

    #[test]
    fn pulse_durations_tile_the_crossing_span(seed in 0u64..1000, thr in -0.5f64..1.0) {
        let x = noise(seed, 3000);
        let ev = extract_pulses(&x, 60.0, thr);
        prop_assume!(ev.len() >= 2);
        for w in ev.windows(2) {
            prop_assert!((w[0].onset_s + w[0].duration_s - w[1].onset_s).abs() < 1e-12);
        }
        let total: f64 = ev.iter().map(|e| e.duration_s).sum();
        let last = ev.last().unwrap();
        prop_assert!((total - (last.onset_s + last.duration_s - ev[0].onset_s)).abs() < 1e-9);
        prop_assert!(ev.iter().all(|e| e.size > 0.0 && e.duration_s > 0.0));
    }

    #[test]
    fn exponent_is_scale_equivariant(seed in 0u64..50, c in 0.01f64..100.0) {
        let train = gen_avalanche(&AvalancheParams { n_events: 400, ..Default::default() }, seed).unwrap();
        let scaled: Vec<PulseEvent<f64>> =
            train.events.iter().map(|e| PulseEvent { size: e.size * c, duration_s: e.duration_s * c, ..*e }).collect();
        for field in [EventField::Duration, EventField::Size] {
            let a = fit_power_law_events(&train.events, field).unwrap();
            let b = fit_power_law_events(&scaled, field).unwrap();
            prop_assert!((a.alpha - b.alpha).abs() < 1e-9, "{} vs {}", a.alpha, b.alpha);
        }
    }

    #[test]
    fn anova_ignores_affine_rescaling(seed in 0u64..1000, shift in -100.0f64..100.0, scale in 0.01f64..100.0) {
        let groups: Vec<Vec<f64>> = (0..4).map(|g| noise(seed * 4 + g, 10 + g as usize)).collect();
        let moved: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|v| v * scale + shift).collect()).collect();
        let (a, b) = (one_way_anova(&groups).unwrap(), one_way_anova(&moved).unwrap());
        prop_assert!((a.f - b.f).abs() < 1e-9 * a.f.max(1.0));
        prop_assert!((a.p - b.p).abs() < 1e-9);
    }

    #[test]
    fn esp_index_ignores_trial_order(seed in 0u64..1000, rot in 1usize..4) {
        let trials: Vec<EspTrial<f64>> = (0..5)
            .map(|i| EspTrial { channels: vec![noise(seed * 10 + i, 300), noise(seed * 10 + i + 5, 300)], onsets_s: vec![] })
            .collect();
        let mut shuffled = trials.clone();
        shuffled.rotate_left(rot);
        shuffled.swap(0, 3);
        let params = EspParams { transient_s: 0.5, horizon_s: 4.0 };
        let a = esp_index(&trials, 60.0, params).unwrap();
        let b = esp_index(&shuffled, 60.0, params).unwrap();
        prop_assert!((a.value - b.value).abs() < 1e-12);
        prop_assert!(a.pairs.iter().all(|p| p.2 >= 0.0));
    }

    #[test]
    fn mux_sum_is_bounded(seed in 0u64..1000, sensors in 1usize..6, lag_steps in 0usize..8, amp in 0.001f64..1000.0) {
        let data: Vec<Vec<f64>> = (0..sensors).map(|s| noise(seed * 8 + s as u64, 400).into_iter().map(|v| v * amp).collect()).collect();
        let horizon = lag_steps as f64 * 6.0 / 60.0;
        let m = build_mux(&data, 60.0, horizon, 6).unwrap();
        for t in 0..m.len() {
            prop_assert!(m.data.row(t).iter().sum::<f64>().abs() <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn echo_state_convergence_up_to_rho_095() {
    for seed in 0..10 {
        let cfg = ReservoirConfig {
            spectral_radius: 0.95,
            seed,
            ..Default::default()
        };
        let esn = Esn::<f64>::new(&cfg, 1, 1).unwrap();
        let u = Matrix64::from_vec(10_000, 1, noise(seed, 10_000).into_iter().map(|v| 0.5 * v).collect());
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let x0: Vec<f64> = (0..100).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let x1: Vec<f64> = (0..100).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let a = esn.run(&u, Some(&x0)).unwrap();
        let b = esn.run(&u, Some(&x1)).unwrap();
        let d: f64 = a
            .row(9_999)
            .iter()
            .zip(b.row(9_999))
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        assert!(d < 1e-6, "seed {seed}: {d}");
    }
}

#[test]
fn fixed_seed_gives_bit_identical_readout() {
    let s = vec![noise(1, 1500), noise(2, 1500)];
    let y = TargetSeries {
        names: vec!["y".into()],
        data: vec![noise(3, 1500)],
    };
    let names = vec!["a".to_string(), "b".to_string()];
    let cfg = ReservoirConfig {
        n_nodes: 40,
        mux_horizon_s: 0.5,
        seed: 9,
        ..Default::default()
    };
    let fit = || ReservoirModel::fit(&cfg, 60.0, &names, &s, &y, &[0.0, 1.0], 100).unwrap();
    let (a, b) = (fit(), fit());
    assert!(a
        .readout
        .w
        .as_slice()
        .iter()
        .zip(b.readout.w.as_slice())
        .all(|(p, q)| p.to_bits() == q.to_bits()));
    let t1 = gen_jellyfish(&SyntheticJellyfishParams::default(), None, 20.0, 4).unwrap();
    let t2 = gen_jellyfish(&SyntheticJellyfishParams::default(), None, 20.0, 4).unwrap();
    assert_eq!(t1.trial, t2.trial);
}
