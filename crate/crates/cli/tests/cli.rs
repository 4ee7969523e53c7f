use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use medusa_core::ingest::io::load_trial;
use medusa_core::reservoir::{CompactEvaluator, HEADER_LEN};

fn medusa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_medusa"))
        .current_dir(dir)
        .env_remove("MEDUSA_DATA_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = medusa(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn synth_soc_esp_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "synth",
            "--tau",
            "2.0",
            "--seconds",
            "60",
            "--seed",
            "7",
            "--out",
            "syn",
        ],
    );
    let soc = ok(d, &["soc", "--input", "syn", "--out", "soc"]);
    assert!(soc.contains("coronal peak 0.500 Hz"), "{soc}");
    ok(d, &["esp", "--input", "syn", "--out", "esp"]);

    for (sub, command) in [("syn", "synth"), ("soc", "soc"), ("esp", "esp")] {
        let m = manifest(&d.join(sub));
        assert_eq!(m["command"], command);
        assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
        for o in m["outputs"].as_array().unwrap() {
            assert!(d.join(sub).join(o.as_str().unwrap()).is_file(), "{sub}: missing {o}");
        }
    }
    assert_eq!(manifest(&d.join("soc"))["inputs"].as_array().unwrap().len(), 6);
    let esp = fs::read_to_string(d.join("esp/esp.csv")).unwrap();
    assert!(esp.lines().nth(1).unwrap().starts_with("tau2,3,2,"), "{esp}");
    let svg = fs::read_to_string(d.join("soc/tau2_s7_00_psd.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));
}

#[test]
fn reruns_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for out in ["a", "b"] {
        ok(
            d,
            &["synth", "--seconds", "20", "--seed", "4", "--trials", "2", "--out", out],
        );
        ok(d, &["soc", "--input", out, "--out", &format!("{out}_soc")]);
    }
    for f in [
        "spontaneous_s4_01.csv",
        "spontaneous_s4_01.json",
        "spontaneous_s4_01_truth.json",
    ] {
        assert_eq!(
            fs::read(d.join("a").join(f)).unwrap(),
            fs::read(d.join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(
        fs::read(d.join("a_soc/fits.csv")).unwrap(),
        fs::read(d.join("b_soc/fits.csv")).unwrap()
    );
    assert_eq!(manifest(&d.join("a"))["config_hash"].as_str().unwrap().len(), 64);
    // Only the output directory differs between the two configs.
    assert_ne!(
        manifest(&d.join("a"))["config_hash"],
        manifest(&d.join("b"))["config_hash"]
    );
}

#[test]
fn search_prints_subset_count() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "synth",
            "--tau",
            "1.5",
            "--seconds",
            "40",
            "--seed",
            "2",
            "--trials",
            "1",
            "--out",
            "syn",
        ],
    );
    let out = ok(d, &["search-sensors", "--input", "syn", "--kmax", "5", "--out", "ss"]);
    assert!(out.contains("evaluated 174436 subsets"), "{out}");
    let best = fs::read_to_string(d.join("ss/best_subsets.csv")).unwrap();
    assert_eq!(
        best.lines().count(),
        1 + 10,
        "9 dead-reckoned targets plus the stimulus"
    );
    let tally = fs::read_to_string(d.join("ss/tally.csv")).unwrap();
    assert_eq!(tally.lines().count(), 31);
}

#[test]
fn views_round_trip_through_ingest() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "synth",
            "--tau",
            "1.0",
            "--seconds",
            "12",
            "--seed",
            "5",
            "--trials",
            "1",
            "--views",
            "--out",
            "syn",
        ],
    );
    ok(d, &["ingest", "--input", "syn", "--out", "ing"]);
    let a = load_trial(&d.join("syn/tau1_s5_00.csv")).unwrap();
    let b = load_trial(&d.join("ing/tau1_s5_00.csv")).unwrap();
    assert_eq!(a.condition, b.condition);
    assert_eq!(a.stimulus, b.stimulus);
    assert_eq!(a.valid, b.valid);
    for (fa, fb) in a.frames.iter().zip(&b.frames) {
        for (p, q) in fa.iter().zip(fb) {
            assert!(p.distance(*q) < 1e-9);
        }
    }
}

#[test]
fn train_predict_export() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "synth",
            "--tau",
            "2.0",
            "--seconds",
            "40",
            "--seed",
            "1",
            "--trials",
            "2",
            "--out",
            "syn",
        ],
    );
    let args = [
        "--input",
        "syn/tau2_s1_00.csv",
        "--targets",
        "vz",
        "--nodes",
        "50",
        "--horizons",
        "0,1",
    ];
    ok(d, &[&["train", "--out", "tr"][..], &args].concat());
    let scores = fs::read_to_string(d.join("tr/train_scores.csv")).unwrap();
    let r0: f64 = scores
        .lines()
        .find(|l| l.starts_with("0,v_z,"))
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(r0 > 0.9, "{scores}");

    let out = ok(
        d,
        &[
            "predict",
            "--input",
            "syn/tau2_s1_01.csv",
            "--model",
            "tr/model.json",
            "--out",
            "pr",
        ],
    );
    assert!(out.contains("horizon 1 s"), "{out}");
    let dump = fs::read_to_string(d.join("pr/tau2_s1_01_predictions.csv")).unwrap();
    assert_eq!(dump.lines().next().unwrap(), "t,target,horizon_s,actual,predicted");
    assert_eq!(dump.lines().count(), 1 + 2400 + (2400 - 60));

    ok(d, &["export-model", "--model", "tr/model.json", "--out", "ex"]);
    let blob = fs::read(d.join("ex/model.bin")).unwrap();
    let eval = CompactEvaluator::from_blob(&blob).unwrap();
    assert_eq!(eval.n_sensors(), 4);
    assert_eq!(eval.n_outputs(), 2);
    // Hybrid, 50 nodes, 4 sensors × 21 lags, 2 outputs.
    let (n, m, f) = (50, 84, 1 + 84 + 50);
    assert_eq!(blob.len(), HEADER_LEN + 4 * (n * m + n * n + f * 2));
}

#[test]
fn confusion_and_report_write_heatmaps() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "synth",
            "--tau",
            "2.0",
            "--seconds",
            "30",
            "--seed",
            "1",
            "--trials",
            "1",
            "--out",
            "syn",
        ],
    );
    ok(
        d,
        &[
            "synth",
            "--seconds",
            "30",
            "--seed",
            "1",
            "--trials",
            "1",
            "--out",
            "syn",
        ],
    );
    ok(
        d,
        &[
            "confusion",
            "--input",
            "syn",
            "--targets",
            "vz",
            "--nodes",
            "30",
            "--out",
            "conf",
        ],
    );
    let csv = fs::read_to_string(d.join("conf/confusion.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "train\\eval,spontaneous,tau2");
    assert_eq!(csv.lines().count(), 3);
    assert!(fs::read_to_string(d.join("conf/confusion.svg"))
        .unwrap()
        .contains("<rect"));

    let r = ok(
        d,
        &[
            "report",
            "--input",
            "syn",
            "--targets",
            "vz",
            "--nodes",
            "30",
            "--mux",
            "0,1",
            "--horizons",
            "0,1",
            "--out",
            "rep",
        ],
    );
    assert!(r.contains("| 1 s |"), "{r}");
    assert_eq!(fs::read_to_string(d.join("rep/report.csv")).unwrap().lines().count(), 5);
}

#[test]
fn kinematics_and_phase_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "synth",
            "--tau",
            "1.5",
            "--seconds",
            "20",
            "--seed",
            "3",
            "--trials",
            "1",
            "--out",
            "syn",
        ],
    );
    ok(d, &["kinematics", "--input", "syn", "--out", "kin"]);
    let k = fs::read_to_string(d.join("kin/tau1.5_s3_00_kinematics.csv")).unwrap();
    assert_eq!(k.lines().count(), 1 + 1200);
    assert_eq!(k.lines().next().unwrap().split(',').count(), 1 + 28 + 8);
    ok(d, &["phase", "--input", "syn", "--out", "ph"]);
    let p = fs::read_to_string(d.join("ph/tau1.5_s3_00_phase.csv")).unwrap();
    assert_eq!(p.lines().count(), 1 + 64);
    let s = fs::read_to_string(d.join("ph/phase_summary.csv")).unwrap();
    assert!(s.lines().nth(1).unwrap().starts_with("tau1.5_s3_00,tau1.5,1.5,"), "{s}");
}

#[test]
fn input_defaults_to_data_dir_env() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["synth", "--seconds", "20", "--trials", "1", "--out", "syn"]);
    let out = Command::new(env!("CARGO_BIN_EXE_medusa"))
        .current_dir(d)
        .env("MEDUSA_DATA_DIR", d.join("syn"))
        .args(["kinematics", "--out", "kin"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.join("kin/kinematics_summary.csv").is_file());
}

#[test]
fn unknown_flag_exits_2_with_usage() {
    let tmp = tempfile::tempdir().unwrap();
    let out = medusa(tmp.path(), &["soc", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--bogus") && err.contains("Usage"), "{err}");
}

#[test]
fn invalid_values_exit_2_naming_the_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for (args, flag) in [
        (vec!["synth", "--seconds", "5"], "--seconds"),
        (vec!["synth", "--tau", "0.05"], "--tau"),
        (vec!["soc"], "--input"),
    ] {
        let out = medusa(d, &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(flag), "{args:?}");
    }
    ok(d, &["synth", "--seconds", "20", "--trials", "1", "--out", "syn"]);
    for (args, flag) in [
        (vec!["train", "--input", "syn", "--rho", "-1"], "--rho"),
        (vec!["train", "--input", "syn", "--mux", "0.05"], "--mux"),
        (vec!["train", "--input", "syn", "--horizons", "0,-1"], "--horizons"),
        (vec!["train", "--input", "syn", "--sensors", "nope"], "--sensors"),
        (vec!["search-sensors", "--input", "syn", "--kmax", "31"], "--kmax"),
    ] {
        let out = medusa(d, &args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(String::from_utf8_lossy(&out.stderr).contains(flag), "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("model.json"), "{not json").unwrap();
    let out = medusa(d, &["export-model", "--model", "model.json"]);
    assert_eq!(out.status.code(), Some(1));
    let out = medusa(d, &["export-model", "--model", "missing.json"]);
    assert_eq!(out.status.code(), Some(1));
}
