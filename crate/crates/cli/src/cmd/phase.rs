use std::fmt::Write as _;

use anyhow::Result;
use medusa_core::criticality::psd;
use medusa_core::kinematics::{body_frame, lowpass_3hz, standardize};
use medusa_core::response::{phase_response, PHASE_POINTS};

use crate::args::PhaseArgs;
use crate::data::{load_trials, num};
use crate::manifest::Run;
use crate::svg::ribbon_plot;

pub fn run(a: &PhaseArgs) -> Result<()> {
    let mut run = Run::new("phase", &a.io.out, a, None)?;
    let trials = load_trials(&mut run, &a.io)?;
    let mut summary =
        String::from("trial,condition,stimulus_period_s,stimulus_hz,response_peak_hz,segments,peak_phase,note\n");
    for t in &trials {
        let fs = t.trial.frame_rate;
        let onsets: Vec<f64> = t.trial.stimulus_onsets().iter().map(|&k| k as f64 / fs).collect();
        if onsets.len() < 2 {
            let _ = writeln!(summary, "{},{},,,,,,no stimulus onsets", t.stem, t.label());
            continue;
        }
        // Contraction signal: negated, low-passed, standardized inner radius.
        let pose = body_frame(&t.trial)?;
        let neg: Vec<f64> = pose.inner_radius.iter().map(|r| -r).collect();
        let x = standardize(&lowpass_3hz(&neg, fs)?)?;
        let pr = phase_response(&x, fs, &onsets)?;
        let peak_hz = psd(&x, fs)?.peak_freq;
        let phases: Vec<f64> = (0..PHASE_POINTS).map(|i| i as f64 / PHASE_POINTS as f64).collect();
        let (peak_i, _) = pr
            .mean
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });

        let mut csv = String::from("phase,mean,sd\n");
        for i in 0..PHASE_POINTS {
            let _ = writeln!(csv, "{},{},{}", num(phases[i]), num(pr.mean[i]), num(pr.sd[i]));
        }
        run.write(&format!("{}_phase.csv", t.stem), csv)?;
        run.write(
            &format!("{}_phase.svg", t.stem),
            ribbon_plot(
                &format!("{} phase response", t.stem),
                "stimulus phase",
                "contraction (z)",
                &phases,
                &pr.mean,
                &pr.sd,
            ),
        )?;
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{},",
            t.stem,
            t.label(),
            num(pr.period_s),
            num(1.0 / pr.period_s),
            num(peak_hz),
            pr.n_segments,
            num(phases[peak_i])
        );
        println!(
            "{}: {} cycles, response peak {:.3} Hz at stimulus {:.3} Hz",
            t.stem,
            pr.n_segments,
            peak_hz,
            1.0 / pr.period_s
        );
    }
    run.write("phase_summary.csv", summary)?;
    run.finish()
}
