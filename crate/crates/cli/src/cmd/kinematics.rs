use std::fmt::Write as _;

use anyhow::Result;
use medusa_core::kinematics::{analyze_body, pairwise_lengths, write_analysis_csv};
use medusa_core::reservoir::pulse_onsets_from_radius;
use medusa_core::scalar::{mean, variance};

use crate::args::KinematicsArgs;
use crate::data::{load_trials, num};
use crate::manifest::Run;
use crate::svg::{line_plot, Series};

const PLOT_SECONDS: f64 = 20.0;

pub fn run(a: &KinematicsArgs) -> Result<()> {
    let mut run = Run::new("kinematics", &a.io.out, a, None)?;
    let trials = load_trials(&mut run, &a.io)?;
    let mut summary =
        String::from("trial,condition,frames,pulses,mean_inner_radius,mean_outer_radius,mean_v_z,sd_v_z\n");
    for t in &trials {
        let fs = t.trial.frame_rate;
        let lengths = pairwise_lengths(&t.trial);
        let body = analyze_body(&t.trial)?;
        let mut buf = Vec::new();
        write_analysis_csv(&mut buf, fs, &lengths, &body)?;
        run.write(&format!("{}_kinematics.csv", t.stem), buf)?;

        let vz: Vec<f64> = body.v_local.iter().map(|v| v.z).collect();
        let pulses = pulse_onsets_from_radius(&body.pose.inner_radius, fs)?.len();
        let _ = writeln!(
            summary,
            "{},{},{},{pulses},{},{},{},{}",
            t.stem,
            t.label(),
            t.trial.len(),
            num(mean(&body.pose.inner_radius)),
            num(mean(&body.pose.outer_radius)),
            num(mean(&vz)),
            num(variance(&vz).sqrt())
        );

        let n = ((PLOT_SECONDS * fs) as usize).min(t.trial.len());
        let trace = |label: &str, x: &[f64]| Series {
            label: label.into(),
            points: (0..n).map(|k| (k as f64 / fs, x[k])).collect(),
        };
        let plot = line_plot(
            &format!("{} ring radii", t.stem),
            "time (s)",
            "radius (mm)",
            &[
                trace("inner", &body.pose.inner_radius),
                trace("outer", &body.pose.outer_radius),
            ],
            false,
            false,
        );
        run.write(&format!("{}_radii.svg", t.stem), plot)?;
    }
    run.write("kinematics_summary.csv", summary)?;
    println!("{} trials analysed", trials.len());
    run.finish()
}
