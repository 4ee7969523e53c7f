use std::fmt::Write as _;

use anyhow::{Context, Result};
use medusa_core::reservoir::{cross_predict, export_compact, r2_channel, CompactEvaluator, ReservoirModel, HEADER_LEN};
use medusa_core::ReservoirModel64;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{ConfusionArgs, ExportArgs, PredictArgs, ReportArgs, TrainArgs};
use crate::data::{
    by_condition, check_horizons, load_trials, num, rc_data, rc_data_all, reservoir_config, washout_for, Loaded,
    ModelFile, RcData,
};
use crate::manifest::Run;
use crate::svg::heatmap;
use crate::usage;

/// `(horizon_s, target, r2)` per trained horizon and channel, plus an
/// `all` row pooling the channels, over rows from `start`.
fn score_rows(model: &ReservoirModel64, data: &RcData, start: usize) -> Result<Vec<(f64, String, f64)>> {
    let overall = model.evaluate(&data.sensors, &data.targets, start)?;
    let pred = model.predict(&data.sensors)?;
    let n = data.targets.len();
    let mut rows = Vec::new();
    for (hi, &h) in pred.horizons.iter().enumerate() {
        let end = n.saturating_sub(h);
        let s = start.min(end);
        for (c, name) in data.targets.names.iter().enumerate() {
            let p = &pred.series(hi, c)[s..end];
            let r = r2_channel(p, &data.targets.data[c][s + h..end + h]).unwrap_or(f64::NAN);
            rows.push((model.horizons_s[hi], name.clone(), r));
        }
        rows.push((model.horizons_s[hi], "all".to_string(), overall[hi]));
    }
    Ok(rows)
}

fn scores_csv(rows: &[(f64, String, f64)]) -> String {
    let mut s = String::from("horizon_s,target,r2\n");
    for (h, t, r) in rows {
        let _ = writeln!(s, "{},{t},{}", num(*h), num(*r));
    }
    s
}

fn refs(trials: &[Loaded]) -> Vec<&Loaded> {
    trials.iter().collect()
}

fn condition_label(trials: &[&Loaded]) -> String {
    let mut labels: Vec<String> = trials.iter().map(|t| t.label()).collect();
    labels.dedup();
    if labels.len() == 1 {
        labels.remove(0)
    } else {
        "mixed".into()
    }
}

pub fn train(a: &TrainArgs) -> Result<()> {
    check_horizons("--horizons", &a.horizons)?;
    let mut run = Run::new("train", &a.io.out, a, Some(a.rc.seed))?;
    let trials = load_trials(&mut run, &a.io)?;
    let data = rc_data_all(&refs(&trials), &a.rc)?;
    let cfg = reservoir_config(&a.rc, a.mux, data.fs)?;
    let washout = washout_for(a.rc.washout, trials.len(), data.targets.len())?;
    run.lap("load");
    let model = ReservoirModel::fit(
        &cfg,
        data.fs,
        &a.rc.sensors,
        &data.sensors,
        &data.targets,
        &a.horizons,
        washout,
    )?
    .with_condition(condition_label(&refs(&trials)));
    run.lap("fit");
    let rows = score_rows(&model, &data, washout)?;
    run.write_json("model.json", &ModelFile::from_model(&model, a.rc.targets))?;
    run.write("train_scores.csv", scores_csv(&rows))?;
    for (h, t, r) in rows.iter().filter(|r| r.1 == "all") {
        println!(
            "horizon {h} s: R² {r:.4} ({t} targets, {} training rows)",
            model.train_rows.len()
        );
    }
    run.finish()
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    let mut run = Run::new("predict", &a.io.out, a, None)?;
    run.input(&a.model)?;
    let (file, model) = ModelFile::load(&a.model)?;
    let trials = load_trials(&mut run, &a.io)?;
    let mut all_scores = String::from("trial,horizon_s,target,r2\n");
    for t in &trials {
        if (t.trial.frame_rate - model.fs).abs() > 1e-9 {
            anyhow::bail!(
                "{}: frame rate {} differs from the model's {}",
                t.stem,
                t.trial.frame_rate,
                model.fs
            );
        }
        let data = rc_data(&t.trial, &model.sensor_names, file.target_set)?;
        let n = data.targets.len();
        let start = match a.washout {
            Some(w) if w >= n => usage!("--washout", "{w} leaves no samples of {}", t.stem),
            Some(w) => w,
            None => model.train_rows.start.min(n / 2),
        };
        let pred = model.predict(&data.sensors)?;
        let mut csv = String::from("t,target,horizon_s,actual,predicted\n");
        for (hi, &h) in pred.horizons.iter().enumerate() {
            for (c, name) in data.targets.names.iter().enumerate() {
                let p = pred.series(hi, c);
                for k in 0..n.saturating_sub(h) {
                    let _ = writeln!(
                        csv,
                        "{},{name},{},{},{}",
                        num((k + h) as f64 / model.fs),
                        num(model.horizons_s[hi]),
                        num(data.targets.data[c][k + h]),
                        num(p[k])
                    );
                }
            }
        }
        run.write(&format!("{}_predictions.csv", t.stem), csv)?;
        for (h, target, r) in score_rows(&model, &data, start)? {
            let _ = writeln!(all_scores, "{},{},{target},{}", t.stem, num(h), num(r));
            if target == "all" {
                println!("{}: horizon {h} s R² {r:.4}", t.stem);
            }
        }
    }
    run.write("predict_scores.csv", all_scores)?;
    run.finish()
}

pub fn confusion(a: &ConfusionArgs) -> Result<()> {
    check_horizons("--horizon", &[a.horizon])?;
    let mut run = Run::new("confusion", &a.io.out, a, Some(a.rc.seed))?;
    let trials = load_trials(&mut run, &a.io)?;
    let groups = by_condition(&trials);
    let labels: Vec<String> = groups.keys().cloned().collect();
    let sets: Vec<RcData> = groups.values().map(|g| rc_data_all(g, &a.rc)).collect::<Result<_>>()?;
    let fs = sets[0].fs;
    if sets.iter().any(|s| (s.fs - fs).abs() > 1e-9) {
        anyhow::bail!("conditions have different frame rates");
    }
    let cfg = reservoir_config(&a.rc, a.mux, fs)?;
    let min_rows = sets.iter().map(|s| s.targets.len()).min().unwrap_or(0);
    let max_trials = groups.values().map(Vec::len).max().unwrap_or(1);
    let washout = washout_for(a.rc.washout, max_trials, min_rows)?;
    run.lap("load");

    let models: Vec<ReservoirModel64> = sets
        .par_iter()
        .zip(&labels)
        .map(|(d, l)| {
            ReservoirModel::fit(&cfg, fs, &a.rc.sensors, &d.sensors, &d.targets, &[a.horizon], washout)
                .map(|m| m.with_condition(l.clone()))
                .with_context(|| format!("training on {l}"))
        })
        .collect::<Result<_>>()?;
    run.lap("fit");
    let model_refs: Vec<(String, &ReservoirModel64)> = labels.iter().cloned().zip(&models).collect();
    let data_refs: Vec<(String, &[Vec<f64>], &_)> = labels
        .iter()
        .zip(&sets)
        .map(|(l, d)| (l.clone(), d.sensors.as_slice(), &d.targets))
        .collect();
    let cross = cross_predict(&model_refs, &data_refs, a.horizon, washout)?;
    run.lap("cross");

    let mut csv = String::from("train\\eval");
    for l in &labels {
        let _ = write!(csv, ",{l}");
    }
    csv.push('\n');
    for (l, row) in labels.iter().zip(&cross.r2) {
        let _ = write!(csv, "{l}");
        for v in row {
            let _ = write!(csv, ",{}", num(*v));
        }
        csv.push('\n');
        println!(
            "{l}: {}",
            row.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join("  ")
        );
    }
    run.write("confusion.csv", csv)?;
    run.write_json("confusion.json", &cross)?;
    let title = format!("cross-condition R² at {} s", a.horizon);
    run.write(
        "confusion.svg",
        heatmap(&title, "evaluated on", "trained on", &labels, &labels, &cross.r2),
    )?;
    run.finish()
}

pub fn report(a: &ReportArgs) -> Result<()> {
    check_horizons("--horizons", &a.horizons)?;
    if a.mux.is_empty() {
        usage!("--mux", "at least one mux length is needed");
    }
    let mut run = Run::new("report", &a.io.out, a, Some(a.rc.seed))?;
    let trials = load_trials(&mut run, &a.io)?;
    let data = rc_data_all(&refs(&trials), &a.rc)?;
    let configs = a
        .mux
        .iter()
        .map(|&m| reservoir_config(&a.rc, m, data.fs))
        .collect::<Result<Vec<_>>>()?;
    let washout = washout_for(a.rc.washout, trials.len(), data.targets.len())?;
    run.lap("load");

    let grid: Vec<Vec<f64>> = configs
        .par_iter()
        .map(|cfg| {
            let m = ReservoirModel::fit(
                cfg,
                data.fs,
                &a.rc.sensors,
                &data.sensors,
                &data.targets,
                &a.horizons,
                washout,
            )?;
            Ok(m.evaluate(&data.sensors, &data.targets, washout)?)
        })
        .collect::<Result<_>>()?;
    run.lap("sweep");

    let mut csv = String::from("mux_s,horizon_s,r2\n");
    for (m, row) in a.mux.iter().zip(&grid) {
        for (h, r) in a.horizons.iter().zip(row) {
            let _ = writeln!(csv, "{},{},{}", num(*m), num(*h), num(*r));
        }
    }
    run.write("report.csv", csv)?;
    let cols: Vec<String> = a.horizons.iter().map(|h| format!("{h} s")).collect();
    let rows: Vec<String> = a.mux.iter().map(|m| format!("{m} s")).collect();
    run.write(
        "report.svg",
        heatmap(
            "R² by mux length and horizon",
            "prediction horizon",
            "mux length",
            &cols,
            &rows,
            &grid,
        ),
    )?;

    let mut md = format!(
        "# Prediction report\n\n{} trial(s), washout {washout} samples, targets {:?}.\n\n| mux \\ horizon |",
        trials.len(),
        data.targets.names
    );
    for c in &cols {
        let _ = write!(md, " {c} |");
    }
    md.push_str("\n|---|");
    md.push_str(&"---|".repeat(cols.len()));
    md.push('\n');
    for (r, row) in rows.iter().zip(&grid) {
        let _ = write!(md, "| {r} |");
        for v in row {
            let _ = write!(md, " {v:.3} |");
        }
        md.push('\n');
    }
    print!("{md}");
    run.write("report.md", md)?;
    run.finish()
}

#[derive(Serialize)]
struct BlobInfo {
    bytes: usize,
    header_bytes: usize,
    working_set_bytes: usize,
    n_sensors: usize,
    n_outputs: usize,
}

pub fn export_model(a: &ExportArgs) -> Result<()> {
    let mut run = Run::new("export-model", &a.out, a, None)?;
    run.input(&a.model)?;
    let (_, model) = ModelFile::load(&a.model)?;
    let blob = export_compact(&model);
    let eval = CompactEvaluator::from_blob(&blob)?;
    let info = BlobInfo {
        bytes: blob.len(),
        header_bytes: HEADER_LEN,
        working_set_bytes: eval.working_set_bytes(),
        n_sensors: eval.n_sensors(),
        n_outputs: eval.n_outputs(),
    };
    run.write("model.bin", &blob)?;
    run.write_json("model_bin.json", &info)?;
    println!(
        "model.bin: {} bytes, working set {} bytes",
        info.bytes, info.working_set_bytes
    );
    run.finish()
}
