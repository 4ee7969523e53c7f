use std::fmt::Write as _;

use anyhow::Result;
use medusa_core::criticality::{
    default_threshold, extract_pulses, fit_power_law_events, fit_power_law_psd, psd_with_segment, EventField,
    PowerLawFit, PulseEvent,
};
use medusa_core::kinematics::{body_frame, lowpass_3hz, pair_name, pairwise_lengths, standardize, CORONAL};

use crate::args::SocArgs;
use crate::data::{load_trials, num};
use crate::manifest::Run;
use crate::svg::{line_plot, Series};
use crate::usage;

fn fit_row<E: std::fmt::Display>(
    out: &mut String,
    trial: &str,
    channel: &str,
    field: &str,
    fit: Result<PowerLawFit<f64>, E>,
) {
    match fit {
        Ok(f) => {
            let _ = writeln!(
                out,
                "{trial},{channel},{field},{},{},{},{},{},",
                num(f.alpha),
                num(f.fit_range.0),
                num(f.fit_range.1),
                num(f.r2_loglog),
                f.n_points
            );
        }
        Err(e) => {
            let _ = writeln!(
                out,
                "{trial},{channel},{field},,,,,,{}",
                e.to_string().replace(',', ";")
            );
        }
    }
}

pub fn run(a: &SocArgs) -> Result<()> {
    if a.segment < 16 {
        usage!("--segment", "must be at least 16 samples");
    }
    if a.threshold.is_some_and(|t| !t.is_finite()) {
        usage!("--threshold", "must be finite");
    }
    let mut run = Run::new("soc", &a.io.out, a, None)?;
    let trials = load_trials(&mut run, &a.io)?;
    run.lap("load");

    let mut fits = String::from("trial,channel,field,alpha,range_lo,range_hi,r2,n_points,note\n");
    let mut peaks = String::from("trial,channel,peak_hz,peak_power\n");
    let mut pooled: Vec<PulseEvent<f64>> = Vec::new();
    for t in &trials {
        let fs = t.trial.frame_rate;
        let lengths = pairwise_lengths(&t.trial);
        let pose = body_frame(&t.trial)?;
        let mut names: Vec<String> = CORONAL.iter().map(|&(p, q)| pair_name(p, q)).collect();
        let mut raw: Vec<Vec<f64>> = CORONAL.iter().map(|&(p, q)| lengths.channel(p, q).to_vec()).collect();
        names.push("inner_radius".into());
        raw.push(pose.inner_radius.clone());

        // Spectra of the standardized, unfiltered channels.
        let mut spectra = Vec::new();
        for (name, x) in names.iter().zip(&raw) {
            let est = psd_with_segment(&standardize(x)?, fs, a.segment)?;
            let _ = writeln!(
                peaks,
                "{},{name},{},{}",
                t.stem,
                num(est.peak_freq),
                num(est.peak_power)
            );
            fit_row(&mut fits, &t.stem, name, "psd", fit_power_law_psd(&est));
            spectra.push(est);
        }
        let mut csv = String::from("freq");
        for n in &names {
            let _ = write!(csv, ",{n}");
        }
        csv.push('\n');
        for (k, f) in spectra[0].freqs.iter().enumerate() {
            let _ = write!(csv, "{}", num(*f));
            for s in &spectra {
                let _ = write!(csv, ",{}", num(s.power[k]));
            }
            csv.push('\n');
        }
        run.write(&format!("{}_psd.csv", t.stem), csv)?;
        let series: Vec<Series> = names
            .iter()
            .zip(&spectra)
            .map(|(n, s)| Series {
                label: n.clone(),
                points: s.freqs.iter().zip(&s.power).skip(1).map(|(&f, &p)| (f, p)).collect(),
            })
            .collect();
        run.write(
            &format!("{}_psd.svg", t.stem),
            line_plot(
                &format!("{} power spectra", t.stem),
                "frequency (Hz)",
                "power density",
                &series,
                true,
                true,
            ),
        )?;

        // Pulses: excursions of the contraction signal.
        let neg: Vec<f64> = pose.inner_radius.iter().map(|r| -r).collect();
        let z = standardize(&lowpass_3hz(&neg, fs)?)?;
        let theta = a.threshold.unwrap_or_else(|| default_threshold(&z));
        let events = extract_pulses(&z, fs, theta);
        let mut csv = String::from("onset,duration,size\n");
        for e in &events {
            let _ = writeln!(csv, "{},{},{}", num(e.onset_s), num(e.duration_s), num(e.size));
        }
        run.write(&format!("{}_events.csv", t.stem), csv)?;
        for field in [EventField::Duration, EventField::Size] {
            fit_row(
                &mut fits,
                &t.stem,
                "pulses",
                field.name(),
                fit_power_law_events(&events, field),
            );
        }
        println!(
            "{}: {} pulses, coronal peak {:.3} Hz",
            t.stem,
            events.len(),
            spectra[0].peak_freq
        );
        pooled.extend(events);
    }
    if trials.len() > 1 {
        for field in [EventField::Duration, EventField::Size] {
            fit_row(
                &mut fits,
                "pooled",
                "pulses",
                field.name(),
                fit_power_law_events(&pooled, field),
            );
        }
    }
    run.lap("analyse");
    run.write("fits.csv", fits)?;
    run.write("peaks.csv", peaks)?;
    run.finish()
}
