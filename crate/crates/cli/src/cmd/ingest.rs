use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use medusa_core::ingest::io::{read_metadata, read_view, save_trial};
use medusa_core::ingest::{assemble_3d, AssembleOptions, View};

use crate::args::IngestArgs;
use crate::data::{input_path, num};
use crate::manifest::Run;
use crate::usage;

const VIEW_FILES: [(View, &str); 3] = [
    (View::Top, "top.csv"),
    (View::Behind, "behind.csv"),
    (View::Right, "right.csv"),
];

/// The input directory itself when it holds one trial's exports, else its
/// subdirectories that do.
fn trial_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    if root.join("top.csv").is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .with_context(|| format!("listing {}", root.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("top.csv").is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        usage!(
            "--input",
            "no directory with top.csv, behind.csv, right.csv and meta.json under {}",
            root.display()
        );
    }
    Ok(dirs)
}

pub fn run(a: &IngestArgs) -> Result<()> {
    if !(a.confidence > 0.0 && a.confidence <= 1.0) {
        usage!("--confidence", "must be in (0, 1]");
    }
    if !(a.tank_mm.is_finite() && a.tank_mm > 0.0) {
        usage!("--tank-mm", "must be positive");
    }
    let root = input_path(&a.io)?;
    let mut run = Run::new("ingest", &a.io.out, a, None)?;
    let opts = AssembleOptions {
        confidence_threshold: a.confidence,
        tank_size_mm: a.tank_mm,
        max_gap_frames: a.max_gap,
        led_threshold: a.led_threshold,
    };
    let mut summary = String::from("trial,animal_id,condition,frames,valid_fraction,stimulus_onsets\n");
    for dir in trial_dirs(&root)? {
        let meta_path = dir.join("meta.json");
        run.input(&meta_path)?;
        let meta = read_metadata(&meta_path).with_context(|| format!("reading {}", meta_path.display()))?;
        let mut views = Vec::new();
        for (view, file) in VIEW_FILES {
            let p = dir.join(file);
            run.input(&p)?;
            let f = File::open(&p).with_context(|| format!("opening {}", p.display()))?;
            views.push(read_view(f, view, meta.frame_rate).with_context(|| format!("reading {}", p.display()))?);
        }
        let trial = assemble_3d(&views[0], &views[1], &views[2], &meta, &opts)
            .with_context(|| format!("assembling {}", dir.display()))?;
        let base = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "trial".into());
        let stem = base.strip_suffix("_views").unwrap_or(&base).to_string();
        let csv = run.output(&format!("{stem}.csv"))?;
        run.output(&format!("{stem}.json"))?;
        save_trial(&csv, &trial)?;
        let valid = trial.valid.iter().filter(|v| **v).count() as f64 / trial.len().max(1) as f64;
        let _ = writeln!(
            summary,
            "{stem},{},{},{},{},{}",
            trial.animal_id,
            trial.condition.label(),
            trial.len(),
            num(valid),
            trial.stimulus_onsets().len()
        );
        println!("{stem}: {} frames, {:.1}% valid", trial.len(), 100.0 * valid);
    }
    run.write("ingest_summary.csv", summary)?;
    run.finish()
}
