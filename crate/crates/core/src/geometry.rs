//! 2D/3D points and rotations.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Self) -> T {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Twice the signed area of the triangle `abc`.
pub fn cross2<T: Real>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> T {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn nan() -> Self {
        Self::new(T::nan(), T::nan(), T::nan())
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    pub fn normalized(self) -> Self {
        self / self.norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.as_f64()),
            U::lit(self.y.as_f64()),
            U::lit(self.z.as_f64()),
        )
    }

    /// Centroid of a non-empty set of points.
    pub fn centroid(points: &[Self]) -> Self {
        let sum = points.iter().fold(Self::zero(), |acc, &p| acc + p);
        sum / T::from_count(points.len())
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Proper rotation stored as a row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation3<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Real> Rotation3<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            m: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    pub fn about_z(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let (o, z) = (T::one(), T::zero());
        Self {
            m: [[c, -s, z], [s, c, z], [z, z, o]],
        }
    }

    pub fn about_y(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let (o, z) = (T::one(), T::zero());
        Self {
            m: [[c, z, s], [z, o, z], [-s, z, c]],
        }
    }

    pub fn about_x(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let (o, z) = (T::one(), T::zero());
        Self {
            m: [[o, z, z], [z, c, -s], [z, s, c]],
        }
    }

    /// Intrinsic z-y-z composition `Rz(alpha) Ry(beta) Rz(gamma)`.
    pub fn from_euler_zyz(alpha: T, beta: T, gamma: T) -> Self {
        Self::about_z(alpha) * Self::about_y(beta) * Self::about_z(gamma)
    }

    /// Inverse of [`from_euler_zyz`](Self::from_euler_zyz) with angles in
    /// (−π, π]; `beta` lies in [0, π]. At `beta = 0` the first angle is 0.
    pub fn to_euler_zyz(&self) -> (T, T, T) {
        let m = &self.m;
        let cb = m[2][2].max(-T::one()).min(T::one());
        let sb = (m[0][2] * m[0][2] + m[1][2] * m[1][2]).sqrt();
        let beta = sb.atan2(cb);
        let tiny = T::lit(1e-12);
        let (alpha, gamma) = if sb > tiny {
            (m[1][2].atan2(m[0][2]), m[2][1].atan2(-m[2][0]))
        } else if cb > T::zero() {
            (T::zero(), m[1][0].atan2(m[0][0]))
        } else {
            (T::zero(), m[1][0].atan2(-m[0][0]))
        };
        (wrap_angle(alpha), beta, wrap_angle(gamma))
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn apply(&self, v: Vec3<T>) -> Vec3<T> {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    /// `selfᵀ v`.
    pub fn apply_inverse(&self, v: Vec3<T>) -> Vec3<T> {
        self.transpose().apply(v)
    }

    pub fn determinant(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// `‖RᵀR − I‖∞` (max-abs entry).
    pub fn orthonormality_error(&self) -> T {
        let p = self.transpose() * *self;
        let mut err = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { T::one() } else { T::zero() };
                err = err.max((p.m[i][j] - target).abs());
            }
        }
        err
    }

    /// Axis-angle constructor (Rodrigues).
    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Self {
        let k = axis.normalized();
        let (s, c) = angle.sin_cos();
        let t = T::one() - c;
        Self {
            m: [
                [c + k.x * k.x * t, k.x * k.y * t - k.z * s, k.x * k.z * t + k.y * s],
                [k.y * k.x * t + k.z * s, c + k.y * k.y * t, k.y * k.z * t - k.x * s],
                [k.z * k.x * t - k.y * s, k.z * k.y * t + k.x * s, c + k.z * k.z * t],
            ],
        }
    }
}

impl<T: Real> Mul for Rotation3<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut m = [[T::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                *out = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Self { m }
    }
}

/// Maps an angle into (−π, π].
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut w = a % two_pi;
    if w <= -T::PI() {
        w += two_pi;
    } else if w > T::PI() {
        w -= two_pi;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_round_trip() {
        for &(a, b, g) in &[(0.3, 1.1, -2.0), (-3.0, 0.2, 3.1), (1.0, 2.9, 0.0)] {
            let r = Rotation3::<f64>::from_euler_zyz(a, b, g);
            let (a2, b2, g2) = r.to_euler_zyz();
            assert!((a - a2).abs() < 1e-12, "{a} {a2}");
            assert!((b - b2).abs() < 1e-12);
            assert!((g - g2).abs() < 1e-12);
        }
    }

    #[test]
    fn gimbal_case_puts_rotation_in_last_angle() {
        let r = Rotation3::<f64>::from_euler_zyz(0.4, 0.0, 0.5);
        let (a, b, g) = r.to_euler_zyz();
        assert_eq!(a, 0.0);
        assert!(b.abs() < 1e-12);
        assert!((g - 0.9).abs() < 1e-12);
    }

    #[test]
    fn wrap_angle_range() {
        use std::f64::consts::PI;
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.5f64) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn axis_angle_is_proper() {
        let r = Rotation3::from_axis_angle(Vec3::new(1.0, 2.0, -0.5), 1.3f64);
        assert!(r.orthonormality_error() < 1e-14);
        assert!((r.determinant() - 1.0).abs() < 1e-14);
    }
}
