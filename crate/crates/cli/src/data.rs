use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use medusa_core::ingest::io::{load_trial, sidecar_path};
use medusa_core::kinematics::analyze_body;
use medusa_core::reservoir::{
    dead_reckoned_targets, mux_lags, pulse_onsets_from_radius, velocity_targets, Architecture, Esn, LeakMode, Readout,
    ReservoirConfig, ReservoirModel, TargetSeries, WASHOUT_AGGREGATE, WASHOUT_PULSATILE,
};
use medusa_core::sensorsearch::SensorPool;
use medusa_core::{ReservoirModel64, Trial64};
use serde::{Deserialize, Serialize};

use crate::args::{ArchArg, Io, LeakArg, RcOpts, TargetSet};
use crate::manifest::Run;
use crate::usage;

pub struct Loaded {
    pub stem: String,
    pub trial: Trial64,
}

impl Loaded {
    pub fn label(&self) -> String {
        self.trial.condition.label()
    }
}

pub fn input_path(io: &Io) -> Result<PathBuf> {
    let Some(p) = io.input.clone() else {
        usage!("--input", "required (or set MEDUSA_DATA_DIR)");
    };
    if !p.exists() {
        usage!("--input", "{} does not exist", p.display());
    }
    Ok(p)
}

/// Canonical trial CSVs: the file itself, or every `*.csv` in a directory
/// that has a metadata sidecar, sorted by name.
pub fn trial_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .with_context(|| format!("listing {}", path.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv") && sidecar_path(p).is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        usage!("--input", "no trial CSV with a JSON sidecar in {}", path.display());
    }
    Ok(files)
}

pub fn load_trials(run: &mut Run, io: &Io) -> Result<Vec<Loaded>> {
    let root = input_path(io)?;
    trial_files(&root)?
        .into_iter()
        .map(|p| {
            run.input(&p)?;
            run.input(&sidecar_path(&p))?;
            let trial = load_trial(&p).with_context(|| format!("loading {}", p.display()))?;
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(Loaded { stem, trial })
        })
        .collect()
}

/// Trials grouped by condition label, in label order.
pub fn by_condition(trials: &[Loaded]) -> BTreeMap<String, Vec<&Loaded>> {
    let mut groups: BTreeMap<String, Vec<&Loaded>> = BTreeMap::new();
    for t in trials {
        groups.entry(t.label()).or_default().push(t);
    }
    groups
}

pub fn fs_of(trials: &[&Loaded]) -> Result<f64> {
    let fs = trials[0].trial.frame_rate;
    if trials.iter().any(|t| (t.trial.frame_rate - fs).abs() > 1e-9) {
        anyhow::bail!("trials have different frame rates");
    }
    Ok(fs)
}

/// Sensors and targets of one or more trials, end to end.
#[derive(Clone)]
pub struct RcData {
    pub fs: f64,
    pub sensors: Vec<Vec<f64>>,
    pub targets: TargetSeries<f64>,
}

pub fn rc_data(trial: &Trial64, sensors: &[String], set: TargetSet) -> Result<RcData> {
    let fs = trial.frame_rate;
    let pool = SensorPool::from_trial(trial)?;
    let names: Vec<&str> = sensors.iter().map(String::as_str).collect();
    let Some(s) = pool.select(&names) else {
        let bad = names.iter().find(|n| pool.index_of(n).is_none()).unwrap_or(&"");
        usage!(
            "--sensors",
            "unknown sensor `{bad}` (choose from {})",
            pool.names.join(", ")
        );
    };
    let body = analyze_body(trial)?;
    let targets = match set {
        TargetSet::Velocity => velocity_targets(&body),
        TargetSet::Vz => velocity_targets(&body)
            .select(&["v_z"])
            .expect("v_z is a velocity target"),
        TargetSet::DeadReckoned => {
            let onsets = pulse_onsets_from_radius(&body.pose.inner_radius, fs)?;
            dead_reckoned_targets(&body, &onsets, fs)
        }
    };
    Ok(RcData {
        fs,
        sensors: s,
        targets: targets.lowpassed(fs)?,
    })
}

pub fn rc_data_all(trials: &[&Loaded], opts: &RcOpts) -> Result<RcData> {
    let fs = fs_of(trials)?;
    let parts: Vec<RcData> = trials
        .iter()
        .map(|t| rc_data(&t.trial, &opts.sensors, opts.targets))
        .collect::<Result<_>>()?;
    let mut out = parts[0].clone();
    out.fs = fs;
    for p in &parts[1..] {
        for (a, b) in out.sensors.iter_mut().zip(&p.sensors) {
            a.extend_from_slice(b);
        }
        for (a, b) in out.targets.data.iter_mut().zip(&p.targets.data) {
            a.extend_from_slice(b);
        }
    }
    Ok(out)
}

pub fn default_washout(n_trials: usize) -> usize {
    if n_trials > 1 {
        WASHOUT_AGGREGATE
    } else {
        WASHOUT_PULSATILE
    }
}

/// Washout for `rows` samples: the flag, else the default for the trial
/// count, capped so at least half the data remains.
pub fn washout_for(flag: Option<usize>, n_trials: usize, rows: usize) -> Result<usize> {
    match flag {
        Some(w) if w >= rows => usage!("--washout", "{w} leaves no samples out of {rows}"),
        Some(w) => Ok(w),
        None => Ok(default_washout(n_trials).min(rows / 2)),
    }
}

pub fn check_horizons(flag: &str, h: &[f64]) -> Result<()> {
    if h.is_empty() {
        usage!(flag, "at least one horizon is needed");
    }
    if let Some(bad) = h.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        usage!(flag, "horizon {bad} must be a non-negative number of seconds");
    }
    Ok(())
}

pub fn reservoir_config(opts: &RcOpts, mux: f64, fs: f64) -> Result<ReservoirConfig> {
    if opts.nodes == 0 && opts.arch != ArchArg::Prc {
        usage!("--nodes", "must be at least 1");
    }
    if !(opts.rho.is_finite() && opts.rho > 0.0) {
        usage!("--rho", "must be positive, got {}", opts.rho);
    }
    if !(opts.input_scale.is_finite() && opts.input_scale > 0.0) {
        usage!("--input-scale", "must be positive");
    }
    if opts.stride == 0 {
        usage!("--stride", "must be at least 1");
    }
    if !(0.0..1.0).contains(&opts.leak) {
        usage!("--leak", "must be in [0, 1), got {}", opts.leak);
    }
    if !(opts.ridge.is_finite() && opts.ridge >= 0.0) {
        usage!("--ridge", "must be non-negative");
    }
    if !(mux.is_finite() && mux >= 0.0) || mux_lags(mux, fs, opts.stride).is_err() {
        usage!(
            "--mux",
            "{mux} s is not a multiple of the {}-sample stride at {fs} Hz",
            opts.stride
        );
    }
    Ok(ReservoirConfig {
        n_nodes: opts.nodes,
        spectral_radius: opts.rho,
        input_scale: opts.input_scale,
        mux_horizon_s: mux,
        mux_stride: opts.stride,
        leak: opts.leak,
        leak_mode: match opts.leak_mode {
            LeakArg::Input => LeakMode::Input,
            LeakArg::State => LeakMode::State,
        },
        architecture: match opts.arch {
            ArchArg::Esn => Architecture::Esn,
            ArchArg::Prc => Architecture::Prc,
            ArchArg::Hybrid => Architecture::Hybrid,
        },
        seed: opts.seed,
        ridge: opts.ridge,
    })
}

/// On-disk model. The reservoir weights are not stored: they are a pure
/// function of the config seed and are regenerated on load.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub config: ReservoirConfig,
    pub fs: f64,
    pub sensor_names: Vec<String>,
    pub target_names: Vec<String>,
    pub target_set: TargetSet,
    pub horizons_s: Vec<f64>,
    pub lags: usize,
    pub mux_scale: f64,
    pub readout: Readout<f64>,
    pub train_rows: (usize, usize),
    pub condition: String,
}

impl ModelFile {
    pub fn from_model(m: &ReservoirModel64, target_set: TargetSet) -> Self {
        Self {
            config: m.config.clone(),
            fs: m.fs,
            sensor_names: m.sensor_names.clone(),
            target_names: m.target_names.clone(),
            target_set,
            horizons_s: m.horizons_s.clone(),
            lags: m.lags,
            mux_scale: m.mux_scale,
            readout: m.readout.clone(),
            train_rows: (m.train_rows.start, m.train_rows.end),
            condition: m.condition.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<(Self, ReservoirModel64)> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let f: ModelFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let esn = if f.config.architecture.uses_states() {
            Some(Esn::new(&f.config, f.sensor_names.len(), f.lags)?)
        } else {
            None
        };
        let model = ReservoirModel {
            config: f.config.clone(),
            fs: f.fs,
            sensor_names: f.sensor_names.clone(),
            target_names: f.target_names.clone(),
            horizons_s: f.horizons_s.clone(),
            lags: f.lags,
            mux_scale: f.mux_scale,
            esn,
            readout: f.readout.clone(),
            train_rows: f.train_rows.0..f.train_rows.1,
            condition: f.condition.clone(),
        };
        Ok((f, model))
    }
}

/// Formats a float column for CSV output.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "NaN".into()
    }
}
