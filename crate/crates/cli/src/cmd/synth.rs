use anyhow::Result;
use medusa_core::geometry::Point2;
use medusa_core::ingest::io::{save_trial, write_metadata, write_view};
use medusa_core::ingest::{Observation, RawViewSeries, View, TANK_SIZE_MM};
use medusa_core::synthgen::{gen_jellyfish, pwm_schedule, SyntheticJellyfishParams, SyntheticTrial, BURST_DURATION_S};
use medusa_core::Trial64;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::SynthArgs;
use crate::manifest::Run;
use crate::usage;

#[derive(Serialize)]
struct Truth<'a> {
    pulse_onsets_s: &'a [f64],
    stimulus_onsets_s: &'a [f64],
}

/// Pixel mapping of one camera view: `pixel = offset + scale·(a, b)` for
/// the two tank coordinates the view sees.
struct Camera {
    view: View,
    axes: (usize, usize),
    scale: f64,
    offset: (f64, f64),
}

const CAMERAS: [Camera; 3] = [
    Camera {
        view: View::Top,
        axes: (0, 1),
        scale: 4.0,
        offset: (40.0, 30.0),
    },
    Camera {
        view: View::Behind,
        axes: (0, 2),
        scale: 3.5,
        offset: (700.0, 60.0),
    },
    Camera {
        view: View::Right,
        axes: (1, 2),
        scale: 3.0,
        offset: (90.0, 690.0),
    },
];

const TRACK_CONFIDENCE: f64 = 0.95;

fn render(trial: &Trial64, cam: &Camera) -> RawViewSeries<f64> {
    let px = |a: f64, b: f64| Point2::new(cam.offset.0 + cam.scale * a, cam.offset.1 + cam.scale * b);
    let s = TANK_SIZE_MM;
    let corners = [(0.0, 0.0), (s, 0.0), (s, s), (0.0, s)].map(|(a, b)| {
        let p = px(a, b);
        Observation::new(p.x, p.y, TRACK_CONFIDENCE)
    });
    let markers = trial
        .frames
        .iter()
        .map(|f| {
            f.map(|m| {
                let c = m.to_array();
                let p = px(c[cam.axes.0], c[cam.axes.1]);
                Observation::new(p.x, p.y, TRACK_CONFIDENCE)
            })
        })
        .collect();
    // Only the top camera sees the indicator LEDs.
    let leds = (cam.view == View::Top).then(|| {
        trial
            .stimulus
            .iter()
            .map(|&on| {
                if on {
                    [1.0, 0.05, 1.0, 0.05]
                } else {
                    [0.05, 1.0, 0.05, 1.0]
                }
            })
            .collect()
    });
    RawViewSeries {
        view: cam.view,
        frame_rate: trial.frame_rate,
        corners: vec![corners; trial.len()],
        markers,
        leds,
    }
}

pub fn run(a: &SynthArgs) -> Result<()> {
    if !(a.seconds.is_finite() && a.seconds >= 10.0) {
        usage!("--seconds", "must be at least 10, got {}", a.seconds);
    }
    if a.trials == 0 {
        usage!("--trials", "must be at least 1");
    }
    if let Some(t) = a.tau {
        if !(t.is_finite() && t > BURST_DURATION_S) {
            usage!("--tau", "period must exceed the {BURST_DURATION_S} s burst, got {t}");
        }
    }
    let mut run = Run::new("synth", &a.io.out, a, Some(a.seed))?;
    let params = a
        .animal
        .map_or_else(SyntheticJellyfishParams::default, SyntheticJellyfishParams::animal);
    let schedule = a.tau.map(|t| pwm_schedule(t, a.seconds)).transpose()?;
    let animal_id = a.animal.map_or_else(|| "synth".to_string(), |s| format!("synth-a{s}"));

    let generated: Vec<SyntheticTrial> = (0..a.trials)
        .into_par_iter()
        .map(|i| {
            gen_jellyfish(
                &params,
                schedule.as_ref(),
                a.seconds,
                a.seed.wrapping_mul(1_000_003).wrapping_add(i as u64),
            )
        })
        .collect::<Result<_, _>>()?;
    run.lap("generate");

    for (i, mut g) in generated.into_iter().enumerate() {
        g.trial.animal_id = animal_id.clone();
        let stem = format!("{}_s{}_{i:02}", g.trial.condition.label(), a.seed);
        let csv = run.output(&format!("{stem}.csv"))?;
        run.output(&format!("{stem}.json"))?;
        save_trial(&csv, &g.trial)?;
        run.write_json(
            &format!("{stem}_truth.json"),
            &Truth {
                pulse_onsets_s: &g.pulse_onsets_s,
                stimulus_onsets_s: &g.stimulus_onsets_s,
            },
        )?;
        if a.views {
            let dir = format!("{stem}_views");
            for cam in &CAMERAS {
                let name = match cam.view {
                    View::Top => "top",
                    View::Behind => "behind",
                    View::Right => "right",
                };
                let mut buf = Vec::new();
                write_view(&mut buf, &render(&g.trial, cam))?;
                run.write(&format!("{dir}/{name}.csv"), buf)?;
            }
            write_metadata(&run.output(&format!("{dir}/meta.json"))?, &g.trial.metadata())?;
        }
        println!("{stem}: {} frames, {} pulses", g.trial.len(), g.pulse_onsets_s.len());
    }
    run.lap("write");
    run.finish()
}
