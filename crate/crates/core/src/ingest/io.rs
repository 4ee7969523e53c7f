//! CSV/JSON file formats.
//!
//! * Per-view tracker export: `frame`, then `<p><point>_x`, `<p><point>_y`,
//!   `<p><point>_conf` for the corners `1..4` and the markers `R1..B2`,
//!   where `<p>` is the view prefix (`c`, `u`, `r`). Optional indicator
//!   columns `led_on_left, led_off_left, led_on_right, led_off_right`.
//! * Trial metadata sidecar: `{animal_id, condition, period_s, frame_rate}`.
//! * Canonical trial: `frame, t, R1_x, R1_y, R1_z, …, B2_z, stim, valid`,
//!   with `NaN` coordinates on invalid frames.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use csv::StringRecord;

use crate::geometry::Vec3;

use super::{IngestError, MarkerId, Observation, RawViewSeries, TrialMetadata, TrialRecording, View, LED_CHANNELS};

const CORNER_NAMES: [&str; 4] = ["1", "2", "3", "4"];

fn column_index(header: &StringRecord, name: &str) -> Option<usize> {
    header.iter().position(|h| h.trim() == name)
}

fn require(header: &StringRecord, name: &str) -> Result<usize, IngestError> {
    column_index(header, name).ok_or_else(|| IngestError::Format(format!("missing column `{name}`")))
}

fn parse_field(rec: &StringRecord, idx: usize, line: usize) -> Result<f64, IngestError> {
    let s = rec.get(idx).unwrap_or("").trim();
    if s.is_empty() {
        return Ok(f64::NAN);
    }
    s.parse::<f64>()
        .map_err(|_| IngestError::Format(format!("line {line}: cannot parse `{s}` as a number")))
}

/// Column names of one view export, in order.
pub fn view_columns(view: View, with_leds: bool) -> Vec<String> {
    let p = view.prefix();
    let mut cols = vec!["frame".to_string()];
    let points = CORNER_NAMES
        .iter()
        .copied()
        .chain(MarkerId::ALL.iter().map(|m| m.name()));
    for name in points {
        for suffix in ["x", "y", "conf"] {
            cols.push(format!("{p}{name}_{suffix}"));
        }
    }
    if with_leds {
        cols.extend(LED_CHANNELS.iter().map(|s| s.to_string()));
    }
    cols
}

pub fn read_view<R: Read>(reader: R, view: View, frame_rate: f64) -> Result<RawViewSeries<f64>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let p = view.prefix();
    let triplet = |name: &str| -> Result<[usize; 3], IngestError> {
        Ok([
            require(&header, &format!("{p}{name}_x"))?,
            require(&header, &format!("{p}{name}_y"))?,
            require(&header, &format!("{p}{name}_conf"))?,
        ])
    };
    let corner_cols: Vec<[usize; 3]> = CORNER_NAMES.iter().map(|n| triplet(n)).collect::<Result<_, _>>()?;
    let marker_cols: Vec<[usize; 3]> = MarkerId::ALL
        .iter()
        .map(|m| triplet(m.name()))
        .collect::<Result<_, _>>()?;
    let led_cols: Option<Vec<usize>> = LED_CHANNELS.iter().map(|n| column_index(&header, n)).collect();

    let mut corners = Vec::new();
    let mut markers = Vec::new();
    let mut leds = led_cols.as_ref().map(|_| Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = line + 2;
        let obs = |c: &[usize; 3]| -> Result<Observation<f64>, IngestError> {
            let conf = parse_field(&rec, c[2], line)?;
            Ok(Observation::new(
                parse_field(&rec, c[0], line)?,
                parse_field(&rec, c[1], line)?,
                if conf.is_nan() { 0.0 } else { conf },
            ))
        };
        let mut cf = [Observation::default(); 4];
        for (slot, c) in cf.iter_mut().zip(&corner_cols) {
            *slot = obs(c)?;
        }
        let mut mf = [Observation::default(); 8];
        for (slot, c) in mf.iter_mut().zip(&marker_cols) {
            *slot = obs(c)?;
        }
        corners.push(cf);
        markers.push(mf);
        if let (Some(cols), Some(out)) = (&led_cols, leds.as_mut()) {
            let mut l = [0.0; 4];
            for (slot, &c) in l.iter_mut().zip(cols) {
                *slot = parse_field(&rec, c, line)?;
            }
            out.push(l);
        }
    }
    Ok(RawViewSeries {
        view,
        frame_rate,
        corners,
        markers,
        leds,
    })
}

pub fn write_view<W: Write>(writer: W, series: &RawViewSeries<f64>) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(view_columns(series.view, series.leds.is_some()))?;
    for f in 0..series.len() {
        let mut row = vec![f.to_string()];
        for o in series.corners[f].iter().chain(series.markers[f].iter()) {
            row.push(o.pos.x.to_string());
            row.push(o.pos.y.to_string());
            row.push(o.confidence.to_string());
        }
        if let Some(l) = &series.leds {
            row.extend(l[f].iter().map(|v| v.to_string()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metadata(path: &Path) -> Result<TrialMetadata, IngestError> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_metadata(path: &Path, meta: &TrialMetadata) -> Result<(), IngestError> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, meta)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Header of the canonical trial CSV.
pub fn trial_columns() -> Vec<String> {
    let mut cols = vec!["frame".to_string(), "t".to_string()];
    for m in MarkerId::ALL {
        for axis in ["x", "y", "z"] {
            cols.push(format!("{}_{axis}", m.name()));
        }
    }
    cols.push("stim".into());
    cols.push("valid".into());
    cols
}

pub fn write_trial<W: Write>(writer: W, trial: &TrialRecording<f64>) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(trial_columns())?;
    for (f, frame) in trial.frames.iter().enumerate() {
        let mut row = Vec::with_capacity(28);
        row.push(f.to_string());
        row.push(format!("{}", trial.time(f)));
        for p in frame {
            for v in p.to_array() {
                row.push(format!("{v}"));
            }
        }
        row.push(u8::from(trial.stimulus[f]).to_string());
        row.push(u8::from(trial.valid[f]).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trial<R: Read>(reader: R, meta: &TrialMetadata) -> Result<TrialRecording<f64>, IngestError> {
    let condition = meta.parse_condition()?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let frame_col = require(&header, "frame")?;
    let coord_cols: Vec<usize> = trial_columns()[2..26]
        .iter()
        .map(|c| require(&header, c))
        .collect::<Result<_, _>>()?;
    let stim_col = require(&header, "stim")?;
    let valid_col = require(&header, "valid")?;

    let mut frames = Vec::new();
    let mut stimulus = Vec::new();
    let mut valid = Vec::new();
    let mut last_frame: Option<i64> = None;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = line + 2;
        let frame = parse_field(&rec, frame_col, line)? as i64;
        if let Some(prev) = last_frame {
            if frame != prev + 1 {
                return Err(IngestError::Format(format!(
                    "line {line}: frames must be consecutive (got {frame} after {prev})"
                )));
            }
        }
        last_frame = Some(frame);
        let mut fr = [Vec3::zero(); 8];
        for (m, p) in fr.iter_mut().enumerate() {
            *p = Vec3::new(
                parse_field(&rec, coord_cols[3 * m], line)?,
                parse_field(&rec, coord_cols[3 * m + 1], line)?,
                parse_field(&rec, coord_cols[3 * m + 2], line)?,
            );
        }
        let ok = parse_field(&rec, valid_col, line)? != 0.0 && fr.iter().all(|p| p.is_finite());
        frames.push(fr);
        stimulus.push(parse_field(&rec, stim_col, line)? != 0.0);
        valid.push(ok);
    }
    Ok(TrialRecording {
        animal_id: meta.animal_id.clone(),
        condition,
        frame_rate: meta.frame_rate,
        frames,
        stimulus,
        valid,
    })
}

/// Sidecar path of a trial CSV (`trial.csv` → `trial.json`).
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn load_trial(csv_path: &Path) -> Result<TrialRecording<f64>, IngestError> {
    let meta = read_metadata(&sidecar_path(csv_path))?;
    read_trial(BufReader::new(File::open(csv_path)?), &meta)
}

pub fn save_trial(csv_path: &Path, trial: &TrialRecording<f64>) -> Result<(), IngestError> {
    write_trial(BufWriter::new(File::create(csv_path)?), trial)?;
    write_metadata(&sidecar_path(csv_path), &trial.metadata())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Condition;

    fn small_trial() -> TrialRecording<f64> {
        let mut frames = Vec::new();
        for f in 0..4 {
            let mut fr = [Vec3::zero(); 8];
            for (m, p) in fr.iter_mut().enumerate() {
                *p = Vec3::new(f as f64, m as f64 * 0.5, 1.25);
            }
            frames.push(fr);
        }
        frames[2] = [Vec3::nan(); 8];
        TrialRecording {
            animal_id: "jf1".into(),
            condition: Condition::Stimulated { period_s: 2.0 },
            frame_rate: 60.0,
            frames,
            stimulus: vec![true, false, false, true],
            valid: vec![true, true, false, true],
        }
    }

    #[test]
    fn trial_csv_round_trip() {
        let trial = small_trial();
        let mut buf = Vec::new();
        write_trial(&mut buf, &trial).unwrap();
        let back = read_trial(buf.as_slice(), &trial.metadata()).unwrap();
        assert_eq!(back.valid, trial.valid);
        assert_eq!(back.stimulus, trial.stimulus);
        assert_eq!(back.frames[3], trial.frames[3]);
        assert!(!back.frames[2][0].is_finite());
        let header = String::from_utf8(buf).unwrap();
        assert!(header.starts_with("frame,t,R1_x,R1_y,R1_z,R2_x"));
    }

    #[test]
    fn view_csv_round_trip_with_leds() {
        let series = RawViewSeries {
            view: View::Behind,
            frame_rate: 60.0,
            corners: vec![[Observation::new(1.0, 2.0, 0.9); 4]; 3],
            markers: vec![[Observation::new(3.0, 4.0, 0.7); 8]; 3],
            leds: Some(vec![[1.0, 0.0, 0.0, 1.0]; 3]),
        };
        let mut buf = Vec::new();
        write_view(&mut buf, &series).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("frame,u1_x,u1_y,u1_conf"));
        let back = read_view(buf.as_slice(), View::Behind, 60.0).unwrap();
        assert_eq!(back.markers, series.markers);
        assert_eq!(back.leds, series.leds);
    }

    #[test]
    fn missing_column_is_reported() {
        let text = "frame,c1_x\n0,1\n";
        let err = read_view(text.as_bytes(), View::Top, 60.0).unwrap_err();
        assert!(err.to_string().contains("c1_y"));
    }

    #[test]
    fn nonconsecutive_frames_rejected() {
        let trial = small_trial();
        let mut buf = Vec::new();
        write_trial(&mut buf, &trial).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("\n3,", "\n7,", 1);
        assert!(read_trial(text.as_bytes(), &trial.metadata()).is_err());
    }
}
