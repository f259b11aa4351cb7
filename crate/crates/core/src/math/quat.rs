use std::ops::Mul;

use super::{Mat3, Real, Vec3};

/// Rotation quaternion `w + xi + yj + zk`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub w: T,
}

impl<T: Real> Default for Quat<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> Quat<T> {
    pub fn new(x: T, y: T, z: T, w: T) -> Self {
        Self { x, y, z, w }
    }

    pub fn identity() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::one())
    }

    /// Rotation of `angle` radians about `axis` (need not be unit length).
    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Self {
        let a = axis.normalize();
        let half = angle * T::lit(0.5);
        let s = half.sin();
        Self::new(a.x * s, a.y * s, a.z * s, half.cos())
    }

    /// Intrinsic rotation from XYZ Euler angles in radians (applied x, then y, then z).
    pub fn from_euler_xyz(rx: T, ry: T, rz: T) -> Self {
        let qx = Self::from_axis_angle(Vec3::unit_x(), rx);
        let qy = Self::from_axis_angle(Vec3::unit_y(), ry);
        let qz = Self::from_axis_angle(Vec3::unit_z(), rz);
        qz * qy * qx
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z + self.w * o.w
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn normalize(self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n, self.z / n, self.w / n)
    }

    pub fn conjugate(self) -> Self {
        Self::new(-self.x, -self.y, -self.z, self.w)
    }

    fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s, self.w * s)
    }

    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z, self.w + o.w)
    }

    pub fn rotate(self, v: Vec3<T>) -> Vec3<T> {
        let u = Vec3::new(self.x, self.y, self.z);
        let two = T::lit(2.0);
        let t = u.cross(v) * two;
        v + t * self.w + u.cross(t)
    }

    /// Spherical interpolation along the shortest arc. Falls back to
    /// normalized lerp when the keys are nearly parallel.
    pub fn slerp(self, other: Self, s: T) -> Self {
        let mut cos = self.dot(other);
        let mut end = other;
        if cos < T::zero() {
            cos = -cos;
            end = other.scale(-T::one());
        }
        if cos > T::lit(0.9995) {
            return self.scale(T::one() - s).add(end.scale(s)).normalize();
        }
        let theta = cos.acos();
        let sin = theta.sin();
        let a = ((T::one() - s) * theta).sin() / sin;
        let b = (s * theta).sin() / sin;
        self.scale(a).add(end.scale(b)).normalize()
    }

    pub fn to_mat3(self) -> Mat3<T> {
        let q = self;
        let one = T::one();
        let two = T::lit(2.0);
        let (x, y, z, w) = (q.x, q.y, q.z, q.w);
        Mat3::from_rows([
            [
                one - two * (y * y + z * z),
                two * (x * y - z * w),
                two * (x * z + y * w),
            ],
            [
                two * (x * y + z * w),
                one - two * (x * x + z * z),
                two * (y * z - x * w),
            ],
            [
                two * (x * z - y * w),
                two * (y * z + x * w),
                one - two * (x * x + y * y),
            ],
        ])
    }

    /// Quaternion of an orthonormal rotation matrix.
    pub fn from_mat3(m: &Mat3<T>) -> Self {
        let r = &m.rows;
        let one = T::one();
        let quarter = T::lit(0.25);
        let trace = r[0][0] + r[1][1] + r[2][2];
        let q = if trace > T::zero() {
            let s = (trace + one).sqrt() * T::lit(2.0);
            Self::new(
                (r[2][1] - r[1][2]) / s,
                (r[0][2] - r[2][0]) / s,
                (r[1][0] - r[0][1]) / s,
                quarter * s,
            )
        } else if r[0][0] > r[1][1] && r[0][0] > r[2][2] {
            let s = (one + r[0][0] - r[1][1] - r[2][2]).sqrt() * T::lit(2.0);
            Self::new(
                quarter * s,
                (r[0][1] + r[1][0]) / s,
                (r[0][2] + r[2][0]) / s,
                (r[2][1] - r[1][2]) / s,
            )
        } else if r[1][1] > r[2][2] {
            let s = (one + r[1][1] - r[0][0] - r[2][2]).sqrt() * T::lit(2.0);
            Self::new(
                (r[0][1] + r[1][0]) / s,
                quarter * s,
                (r[1][2] + r[2][1]) / s,
                (r[0][2] - r[2][0]) / s,
            )
        } else {
            let s = (one + r[2][2] - r[0][0] - r[1][1]).sqrt() * T::lit(2.0);
            Self::new(
                (r[0][2] + r[2][0]) / s,
                (r[1][2] + r[2][1]) / s,
                quarter * s,
                (r[1][0] - r[0][1]) / s,
            )
        };
        q.normalize()
    }
}

impl<T: Real> Mul for Quat<T> {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        Self::new(
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
        )
    }
}
