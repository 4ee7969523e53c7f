use crate::geometry::{cross2, Point2};
use crate::linalg::{lu_solve, Matrix};
use crate::scalar::Real;

use super::IngestError;

/// Planar projective transform, `h[2][2] = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography<T> {
    pub h: [[T; 3]; 3],
}

impl<T: Real> Homography<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            h: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    /// Exact transform taking each `src[i]` to `dst[i]`, from the 8×8
    /// direct linear system on Hartley-normalized coordinates.
    pub fn from_correspondences(src: &[Point2<T>; 4], dst: &[Point2<T>; 4]) -> Result<Self, IngestError> {
        check_general_position(src)?;
        check_general_position(dst)?;
        let (ns, ts) = normalize(src);
        let (nd, td) = normalize(dst);

        let mut a = Matrix::<T>::zeros(8, 8);
        let mut b = vec![T::zero(); 8];
        for i in 0..4 {
            let (x, y) = (ns[i].x, ns[i].y);
            let (u, v) = (nd[i].x, nd[i].y);
            let r = 2 * i;
            a.row_mut(r)
                .copy_from_slice(&[x, y, T::one(), T::zero(), T::zero(), T::zero(), -u * x, -u * y]);
            a.row_mut(r + 1)
                .copy_from_slice(&[T::zero(), T::zero(), T::zero(), x, y, T::one(), -v * x, -v * y]);
            b[r] = u;
            b[r + 1] = v;
        }
        let sol = lu_solve(&a, &b, T::lit(1e-12)).ok_or(IngestError::DegenerateCorners)?;
        let hn = Self {
            h: [
                [sol[0], sol[1], sol[2]],
                [sol[3], sol[4], sol[5]],
                [sol[6], sol[7], T::one()],
            ],
        };
        let full = td
            .inverse()
            .ok_or(IngestError::DegenerateCorners)?
            .compose(&hn)
            .compose(&ts);
        full.normalized().ok_or(IngestError::DegenerateCorners)
    }

    /// Transform taking the four tank corners onto the square face
    /// `(0,0) (s,0) (s,s) (0,s)`.
    pub fn to_tank_face(corners: &[Point2<T>; 4], size: T) -> Result<Self, IngestError> {
        Self::from_correspondences(corners, &tank_face(size))
    }

    pub fn apply(&self, p: Point2<T>) -> Point2<T> {
        let h = &self.h;
        let w = h[2][0] * p.x + h[2][1] * p.y + h[2][2];
        Point2::new(
            (h[0][0] * p.x + h[0][1] * p.y + h[0][2]) / w,
            (h[1][0] * p.x + h[1][1] * p.y + h[1][2]) / w,
        )
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let mut h = [[T::zero(); 3]; 3];
        for (i, row) in h.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                *out = (0..3).map(|k| self.h[i][k] * other.h[k][j]).sum();
            }
        }
        Self { h }
    }

    pub fn inverse(&self) -> Option<Self> {
        let m = &self.h;
        let c = |r0: usize, c0: usize, r1: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let det = m[0][0] * c(1, 1, 2, 2) - m[0][1] * c(1, 0, 2, 2) + m[0][2] * c(1, 0, 2, 1);
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let adj = [
            [c(1, 1, 2, 2), -c(0, 1, 2, 2), c(0, 1, 1, 2)],
            [-c(1, 0, 2, 2), c(0, 0, 2, 2), -c(0, 0, 1, 2)],
            [c(1, 0, 2, 1), -c(0, 0, 2, 1), c(0, 0, 1, 1)],
        ];
        let mut h = adj;
        for row in &mut h {
            for v in row.iter_mut() {
                *v /= det;
            }
        }
        Self { h }.normalized()
    }

    fn normalized(mut self) -> Option<Self> {
        let s = self.h[2][2];
        if s == T::zero() || !s.is_finite() {
            return None;
        }
        for row in &mut self.h {
            for v in row.iter_mut() {
                *v /= s;
            }
        }
        Some(self)
    }
}

/// Rectifies `points` with the transform that maps `corners` exactly onto
/// `target`.
pub fn rectify_homography<T: Real>(
    corners: &[Point2<T>; 4],
    target: &[Point2<T>; 4],
    points: &[Point2<T>],
) -> Result<Vec<Point2<T>>, IngestError> {
    let h = Homography::from_correspondences(corners, target)?;
    Ok(points.iter().map(|&p| h.apply(p)).collect())
}

pub(crate) fn tank_face<T: Real>(size: T) -> [Point2<T>; 4] {
    let z = T::zero();
    [
        Point2::new(z, z),
        Point2::new(size, z),
        Point2::new(size, size),
        Point2::new(z, size),
    ]
}

fn check_general_position<T: Real>(p: &[Point2<T>; 4]) -> Result<(), IngestError> {
    let mut scale = T::zero();
    for i in 0..4 {
        for j in (i + 1)..4 {
            scale = scale.max(p[i].distance(p[j]));
        }
    }
    if !(scale > T::zero()) {
        return Err(IngestError::DegenerateCorners);
    }
    let tol = scale * scale * T::lit(1e-9);
    for skip in 0..4 {
        let tri: Vec<Point2<T>> = (0..4).filter(|&i| i != skip).map(|i| p[i]).collect();
        if cross2(tri[0], tri[1], tri[2]).abs() <= tol {
            return Err(IngestError::DegenerateCorners);
        }
    }
    Ok(())
}

/// Translates the centroid to the origin and scales the mean distance to √2.
fn normalize<T: Real>(p: &[Point2<T>; 4]) -> ([Point2<T>; 4], Homography<T>) {
    let four = T::lit(4.0);
    let cx = p.iter().map(|q| q.x).sum::<T>() / four;
    let cy = p.iter().map(|q| q.y).sum::<T>() / four;
    let c = Point2::new(cx, cy);
    let mean_d = p.iter().map(|q| q.distance(c)).sum::<T>() / four;
    let s = T::SQRT_2() / mean_d;
    let out = p.map(|q| Point2::new((q.x - cx) * s, (q.y - cy) * s));
    let z = T::zero();
    let t = Homography {
        h: [[s, z, -s * cx], [z, s, -s * cy], [z, z, T::one()]],
    };
    (out, t)
}
