use crate::geometry::{Point2, Vec3};
use crate::scalar::Real;

use super::homography::Homography;
use super::stimulus::align_stimulus;
use super::{
    Condition, IngestError, Observation, RawViewSeries, TrialMetadata, TrialRecording, CONFIDENCE_THRESHOLD,
    DEFAULT_MAX_GAP_FRAMES, TANK_SIZE_MM,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssembleOptions {
    pub confidence_threshold: f64,
    pub tank_size_mm: f64,
    pub max_gap_frames: usize,
    /// Threshold on the ON-indicator intensity.
    pub led_threshold: f64,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self {
            confidence_threshold: CONFIDENCE_THRESHOLD,
            tank_size_mm: TANK_SIZE_MM,
            max_gap_frames: DEFAULT_MAX_GAP_FRAMES,
            led_threshold: 0.5,
        }
    }
}

/// Builds approximate 3D marker positions from three rectified views.
///
/// Axis convention after rectification onto the tank face: the top view
/// gives `(x, y)`, the behind mirror `(x, z)` and the right mirror `(y, z)`.
/// `x, y` come from the top view; `z` is the mean of the confident mirror
/// readings, or the single confident one. Frames lacking a confident top
/// reading or any depth reading become gaps and are then passed through
/// [`interpolate_gaps`].
pub fn assemble_3d<T: Real>(
    top: &RawViewSeries<T>,
    behind: &RawViewSeries<T>,
    right: &RawViewSeries<T>,
    meta: &TrialMetadata,
    opts: &AssembleOptions,
) -> Result<TrialRecording<T>, IngestError> {
    let n = top.len();
    for v in [behind, right] {
        if v.len() != n {
            return Err(IngestError::FrameCountMismatch(n, v.len()));
        }
    }
    let condition = meta.parse_condition()?;
    let thr = T::lit(opts.confidence_threshold);
    let size = T::lit(opts.tank_size_mm);
    let h_top = view_homography(top, thr, size)?;
    let h_behind = view_homography(behind, thr, size)?;
    let h_right = view_homography(right, thr, size)?;

    let mut frames = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    let mut any_depth = false;
    for f in 0..n {
        let mut frame = [Vec3::nan(); 8];
        let mut ok = true;
        for m in 0..8 {
            let t = top.markers[f][m];
            let b = behind.markers[f][m];
            let r = right.markers[f][m];
            let z_b = (b.confidence >= thr).then(|| h_behind.apply(b.pos).y);
            let z_r = (r.confidence >= thr).then(|| h_right.apply(r.pos).y);
            let z = match (z_b, z_r) {
                (Some(a), Some(c)) => Some((a + c) * T::lit(0.5)),
                (Some(a), None) | (None, Some(a)) => Some(a),
                (None, None) => None,
            };
            any_depth |= z.is_some();
            match (t.confidence >= thr, z) {
                (true, Some(z)) => {
                    let xy = h_top.apply(t.pos);
                    frame[m] = Vec3::new(xy.x, xy.y, z);
                }
                _ => ok = false,
            }
        }
        if !ok {
            frame = [Vec3::nan(); 8];
        }
        frames.push(frame);
        valid.push(ok);
    }
    if n > 0 && !any_depth {
        return Err(IngestError::NoConfidentView);
    }

    let stimulus = match (condition, top.on_led_intensity()) {
        (Condition::Stimulated { .. }, Some(led)) => align_stimulus(&led, T::lit(opts.led_threshold))?.active,
        _ => vec![false; n],
    };

    let trial = TrialRecording {
        animal_id: meta.animal_id.clone(),
        condition,
        frame_rate: meta.frame_rate,
        frames,
        stimulus,
        valid,
    };
    Ok(interpolate_gaps(&trial, opts.max_gap_frames))
}

/// Fills runs of at most `max_gap_frames` invalid frames that are bounded
/// by valid frames on both sides, coordinate by coordinate, with linear
/// interpolation. Longer runs and runs touching either end stay invalid.
pub fn interpolate_gaps<T: Real>(trial: &TrialRecording<T>, max_gap_frames: usize) -> TrialRecording<T> {
    let mut out = trial.clone();
    let n = trial.len();
    let mut i = 0;
    while i < n {
        if trial.valid[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && !trial.valid[i] {
            i += 1;
        }
        let end = i; // exclusive
        let len = end - start;
        if start == 0 || end == n || len > max_gap_frames {
            continue;
        }
        let (a, b) = (&trial.frames[start - 1], &trial.frames[end]);
        let span = T::from_count(len + 1);
        for (k, f) in (start..end).enumerate() {
            let w = T::from_count(k + 1) / span;
            for m in 0..8 {
                out.frames[f][m] = a[m] + (b[m] - a[m]) * w;
            }
            out.valid[f] = true;
        }
    }
    out
}

/// Homography of one view from the median of its confident corner tracks.
fn view_homography<T: Real>(series: &RawViewSeries<T>, thr: T, size: T) -> Result<Homography<T>, IngestError> {
    let mut corners = [Point2::new(T::zero(), T::zero()); 4];
    for (c, corner) in corners.iter_mut().enumerate() {
        let confident: Vec<Observation<T>> = series
            .corners
            .iter()
            .map(|f| f[c])
            .filter(|o| o.confidence >= thr)
            .collect();
        if confident.is_empty() {
            return Err(IngestError::MissingCorner {
                view: series.view,
                corner: c + 1,
            });
        }
        let xs: Vec<T> = confident.iter().map(|o| o.pos.x).collect();
        let ys: Vec<T> = confident.iter().map(|o| o.pos.y).collect();
        *corner = Point2::new(median(xs), median(ys));
    }
    Homography::to_tank_face(&corners, size)
}

fn median<T: Real>(mut xs: Vec<T>) -> T {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) * T::lit(0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::homography::tank_face;
    use crate::ingest::View;

    fn projector(seed: f64) -> Homography<f64> {
        Homography {
            h: [
                [6.0 + seed, 0.3, 200.0 + 10.0 * seed],
                [-0.2, 5.5 - 0.1 * seed, 120.0],
                [4e-4 * seed, -3e-4, 1.0],
            ],
        }
    }

    /// Projects 3D tank coordinates into the three pixel views.
    fn views_of(points: &[[Vec3<f64>; 8]], conf: impl Fn(View, usize) -> f64) -> [RawViewSeries<f64>; 3] {
        let hs = [projector(0.0), projector(1.0), projector(2.0)];
        let views = [View::Top, View::Behind, View::Right];
        let face = tank_face(150.0);
        views.map(|v| {
            let h = &hs[v as usize];
            let proj = |p: Vec3<f64>| match v {
                View::Top => h.apply(Point2::new(p.x, p.y)),
                View::Behind => h.apply(Point2::new(p.x, p.z)),
                View::Right => h.apply(Point2::new(p.y, p.z)),
            };
            RawViewSeries {
                view: v,
                frame_rate: 60.0,
                corners: points
                    .iter()
                    .map(|_| {
                        face.map(|c| {
                            let q = h.apply(c);
                            Observation::new(q.x, q.y, 1.0)
                        })
                    })
                    .collect(),
                markers: points
                    .iter()
                    .enumerate()
                    .map(|(f, fr)| {
                        fr.map(|p| {
                            let q = proj(p);
                            Observation::new(q.x, q.y, conf(v, f))
                        })
                    })
                    .collect(),
                leds: None,
            }
        })
    }

    fn meta() -> TrialMetadata {
        TrialMetadata::from_condition("t", Condition::Spontaneous, 60.0)
    }

    #[test]
    fn recovers_tank_center() {
        let p = Vec3::new(75.0, 75.0, 75.0);
        let frames = vec![[p; 8]; 3];
        let [t, b, r] = views_of(&frames, |_, _| 1.0);
        let trial = assemble_3d(&t, &b, &r, &meta(), &AssembleOptions::default()).unwrap();
        for fr in &trial.frames {
            for q in fr {
                assert!(q.distance(p) < 1e-6, "{q:?}");
            }
        }
        assert!(trial.valid.iter().all(|&v| v));
    }

    #[test]
    fn single_confident_mirror_is_used() {
        let p = Vec3::new(30.0, 100.0, 42.0);
        let frames = vec![[p; 8]; 4];
        let [t, b, r] = views_of(&frames, |v, f| if v == View::Behind && f == 2 { 0.0 } else { 0.9 });
        let trial = assemble_3d(&t, &b, &r, &meta(), &AssembleOptions::default()).unwrap();
        assert!(trial.valid[2]);
        assert!((trial.frames[2][0].z - 42.0).abs() < 1e-6);
    }

    #[test]
    fn long_dual_mirror_dropout_marks_frames_invalid() {
        let p = Vec3::new(60.0, 70.0, 80.0);
        let frames = vec![[p; 8]; 500];
        let [t, b, r] = views_of(&frames, |v, f| {
            if v != View::Top && (50..450).contains(&f) {
                0.0
            } else {
                1.0
            }
        });
        let trial = assemble_3d(&t, &b, &r, &meta(), &AssembleOptions::default()).unwrap();
        assert!(trial.valid[..50].iter().all(|&v| v));
        assert!(trial.valid[50..450].iter().all(|&v| !v));
        assert!(trial.valid[450..].iter().all(|&v| v));
    }

    #[test]
    fn no_depth_anywhere_is_an_error() {
        let frames = vec![[Vec3::new(1.0, 2.0, 3.0); 8]; 10];
        let [t, b, r] = views_of(&frames, |v, _| if v == View::Top { 1.0 } else { 0.1 });
        assert!(matches!(
            assemble_3d(&t, &b, &r, &meta(), &AssembleOptions::default()),
            Err(IngestError::NoConfidentView)
        ));
    }

    fn line_trial(values: &[Option<f64>]) -> TrialRecording<f64> {
        TrialRecording {
            animal_id: "x".into(),
            condition: Condition::Spontaneous,
            frame_rate: 60.0,
            frames: values
                .iter()
                .map(|v| [Vec3::new(v.unwrap_or(f64::NAN), 0.0, 0.0); 8])
                .collect(),
            stimulus: vec![false; values.len()],
            valid: values.iter().map(|v| v.is_some()).collect(),
        }
    }

    #[test]
    fn short_gap_is_filled_linearly() {
        let t = line_trial(&[Some(0.0), None, None, None, Some(4.0)]);
        let out = interpolate_gaps(&t, 5);
        let xs: Vec<f64> = out.frames.iter().map(|f| f[0].x).collect();
        assert_eq!(xs, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!(out.valid.iter().all(|&v| v));
    }

    #[test]
    fn long_gap_stays_invalid() {
        let mut v = vec![Some(0.0)];
        v.extend(std::iter::repeat_n(None, 6));
        v.push(Some(7.0));
        let out = interpolate_gaps(&line_trial(&v), 5);
        assert_eq!(out.valid.iter().filter(|&&x| !x).count(), 6);
    }

    #[test]
    fn no_gaps_is_identity() {
        let t = line_trial(&[Some(1.0), Some(2.0), Some(5.0)]);
        assert_eq!(interpolate_gaps(&t, 5), t);
    }

    #[test]
    fn edge_gaps_are_not_extrapolated() {
        let t = line_trial(&[None, Some(1.0), Some(2.0), None]);
        let out = interpolate_gaps(&t, 5);
        assert_eq!(out.valid, vec![false, true, true, false]);
    }
}
