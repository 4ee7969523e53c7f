use crate::geometry::{wrap_angle, Rotation3, Vec3};
use crate::ingest::{MarkerId, TrialRecording};
use crate::scalar::Real;

use super::KinematicsError;

/// Per-frame pose of the body frame.
///
/// `rotation[k]` maps body coordinates to world coordinates, so a world
/// vector `v` reads `rotation[k]ᵀ v` in the body frame.
#[derive(Debug, Clone)]
pub struct BodyPoseSeries<T> {
    pub com: Vec<Vec3<T>>,
    pub inner_radius: Vec<T>,
    pub outer_radius: Vec<T>,
    pub rotation: Vec<Rotation3<T>>,
    /// Intrinsic z-y-z angles `(alpha, beta, gamma)`.
    pub euler: Vec<(T, T, T)>,
}

impl<T: Real> BodyPoseSeries<T> {
    pub fn len(&self) -> usize {
        self.com.len()
    }

    pub fn is_empty(&self) -> bool {
        self.com.is_empty()
    }
}

/// Computes COM (centroid of the inner ring), ring radii and the z-y-z
/// orientation that puts the outer→inner ring axis on +z and the Y2→O2
/// segment in the x-z plane with positive x.
pub fn body_frame<T: Real>(trial: &TrialRecording<T>) -> Result<BodyPoseSeries<T>, KinematicsError> {
    let n = trial.len();
    let mut out = BodyPoseSeries {
        com: Vec::with_capacity(n),
        inner_radius: Vec::with_capacity(n),
        outer_radius: Vec::with_capacity(n),
        rotation: Vec::with_capacity(n),
        euler: Vec::with_capacity(n),
    };
    let nan_rot = Rotation3 { m: [[T::nan(); 3]; 3] };
    for (f, frame) in trial.frames.iter().enumerate() {
        if !trial.valid[f] {
            out.com.push(Vec3::nan());
            out.inner_radius.push(T::nan());
            out.outer_radius.push(T::nan());
            out.rotation.push(nan_rot);
            out.euler.push((T::nan(), T::nan(), T::nan()));
            continue;
        }
        let inner = MarkerId::INNER.map(|m| frame[m.index()]);
        let outer = MarkerId::OUTER.map(|m| frame[m.index()]);
        check_ring(&inner, "inner", f)?;
        check_ring(&outer, "outer", f)?;

        let com = Vec3::centroid(&inner);
        let outer_center = Vec3::centroid(&outer);
        let four = T::lit(4.0);
        let r_in = inner.iter().map(|p| p.distance(com)).sum::<T>() / four;
        let r_out = outer.iter().map(|p| p.distance(com)).sum::<T>() / four;

        let axis = (com - outer_center).normalized();
        let planar = axis.x.hypot(axis.y);
        let beta = planar.atan2(axis.z);
        let alpha = if planar > T::lit(1e-12) {
            wrap_angle(axis.y.atan2(axis.x))
        } else {
            T::zero()
        };
        let tilt = Rotation3::about_z(alpha) * Rotation3::about_y(beta);
        let d = tilt.apply_inverse(frame[MarkerId::O2.index()] - frame[MarkerId::Y2.index()]);
        let gamma = wrap_angle(d.y.atan2(d.x));
        let rot = tilt * Rotation3::about_z(gamma);

        out.com.push(com);
        out.inner_radius.push(r_in);
        out.outer_radius.push(r_out);
        out.rotation.push(rot);
        out.euler.push((alpha, beta, gamma));
    }
    Ok(out)
}

fn check_ring<T: Real>(ring: &[Vec3<T>; 4], name: &'static str, frame: usize) -> Result<(), KinematicsError> {
    let scale = ring
        .iter()
        .flat_map(|a| ring.iter().map(move |b| a.distance(*b)))
        .fold(T::zero(), T::max);
    let tol = scale * scale * T::lit(1e-9);
    let mut best = T::zero();
    for i in 1..4 {
        for j in (i + 1)..4 {
            best = best.max((ring[i] - ring[0]).cross(ring[j] - ring[0]).norm());
        }
    }
    if !(scale > T::zero()) || best <= tol {
        return Err(KinematicsError::DegenerateRing { ring: name, frame });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Condition;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Canonical pose: inner ring in z=0 around the origin, outer ring
    /// below it, Y2→O2 along +x.
    pub(crate) fn canonical_markers() -> [Vec3<f64>; 8] {
        let deg = std::f64::consts::PI / 180.0;
        let angle = |m: MarkerId| match m {
            MarkerId::R1 | MarkerId::R2 => 135.0 * deg,
            MarkerId::Y1 | MarkerId::Y2 => 225.0 * deg,
            MarkerId::O1 | MarkerId::O2 => 315.0 * deg,
            MarkerId::B1 | MarkerId::B2 => 45.0 * deg,
        };
        MarkerId::ALL.map(|m| {
            let (r, z) = if m.is_outer() { (25.0, -8.0) } else { (10.0, 0.0) };
            let a = angle(m);
            Vec3::new(r * a.cos(), r * a.sin(), z)
        })
    }

    fn trial_of(frames: Vec<[Vec3<f64>; 8]>) -> TrialRecording<f64> {
        let n = frames.len();
        TrialRecording {
            animal_id: "t".into(),
            condition: Condition::Spontaneous,
            frame_rate: 60.0,
            frames,
            stimulus: vec![false; n],
            valid: vec![true; n],
        }
    }

    #[test]
    fn canonical_configuration_has_zero_angles() {
        let pose = body_frame(&trial_of(vec![canonical_markers()])).unwrap();
        let (a, b, g) = pose.euler[0];
        assert!(a.abs() < 1e-12 && b.abs() < 1e-12 && g.abs() < 1e-12, "{a} {b} {g}");
        assert!(pose.com[0].norm() < 1e-12);
        assert!((pose.inner_radius[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_inner_ring_radius() {
        let mut fr = canonical_markers();
        fr[MarkerId::R2.index()] = Vec3::new(1.0, 0.0, 0.0);
        fr[MarkerId::Y2.index()] = Vec3::new(0.0, 1.0, 0.0);
        fr[MarkerId::O2.index()] = Vec3::new(-1.0, 0.0, 0.0);
        fr[MarkerId::B2.index()] = Vec3::new(0.0, -1.0, 0.0);
        let pose = body_frame(&trial_of(vec![fr])).unwrap();
        assert!(pose.com[0].norm() < 1e-15);
        assert!((pose.inner_radius[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn realigns_randomly_rotated_configuration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = canonical_markers();
        for _ in 0..50 {
            let axis = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let q = Rotation3::from_axis_angle(axis, rng.random_range(-3.0..3.0));
            let shift = Vec3::new(
                rng.random_range(0.0..150.0),
                rng.random_range(0.0..150.0),
                rng.random_range(0.0..150.0),
            );
            let fr = base.map(|p| q.apply(p) + shift);
            let pose = body_frame(&trial_of(vec![fr])).unwrap();
            let r = pose.rotation[0];
            assert!(r.orthonormality_error() < 1e-9);
            assert!((r.determinant() - 1.0).abs() < 1e-9);
            let inner_c = Vec3::centroid(&MarkerId::INNER.map(|m| fr[m.index()]));
            let outer_c = Vec3::centroid(&MarkerId::OUTER.map(|m| fr[m.index()]));
            let axis_body = r.apply_inverse(inner_c - outer_c).normalized();
            assert!(axis_body.x.abs() < 1e-9 && axis_body.y.abs() < 1e-9 && axis_body.z > 0.0);
            let d = r.apply_inverse(fr[MarkerId::O2.index()] - fr[MarkerId::Y2.index()]);
            assert!(d.y.abs() < 1e-9 && d.x > 0.0);
            // The canonical pose is recovered exactly, so R equals the applied rotation.
            for i in 0..3 {
                for j in 0..3 {
                    assert!((r.m[i][j] - q.m[i][j]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn collinear_ring_is_degenerate() {
        let mut fr = canonical_markers();
        for (k, m) in MarkerId::INNER.iter().enumerate() {
            fr[m.index()] = Vec3::new(k as f64, 0.0, 0.0);
        }
        assert_eq!(
            body_frame(&trial_of(vec![fr])).unwrap_err(),
            KinematicsError::DegenerateRing {
                ring: "inner",
                frame: 0
            }
        );
    }
}
