//! Scalar-generic vector, quaternion, and affine-matrix math plus the
//! two-key transform used for motion blur.

mod matrix;
mod quat;
pub mod scalar;
mod transform;
mod vector;

pub use matrix::{Mat3, Mat4};
pub use quat::Quat;
pub use scalar::Real;
pub use transform::{look_at_rotation, Transform};
pub use vector::{Vec2, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MathError {
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not affine")]
    NotAffine,
    #[error("look-at is degenerate: eye equals target or up is parallel to the view direction")]
    DegenerateLookAt,
    #[error("scale components must be positive and finite")]
    NonPositiveScale,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray<T> {
    pub origin: Vec3<T>,
    /// Unit length.
    pub direction: Vec3<T>,
    pub t_min: T,
    pub t_max: T,
    /// Shutter parameter in `[0, 1]`.
    pub time: T,
}

impl<T: Real> Ray<T> {
    pub fn new(origin: Vec3<T>, direction: Vec3<T>, time: T) -> Self {
        Self {
            origin,
            direction,
            t_min: T::zero(),
            t_max: T::infinity(),
            time,
        }
    }

    pub fn with_range(mut self, t_min: T, t_max: T) -> Self {
        self.t_min = t_min;
        self.t_max = t_max;
        self
    }

    #[inline]
    pub fn at(&self, t: T) -> Vec3<T> {
        self.origin + self.direction * t
    }
}

/// Orthonormal basis with `n` as the local +z axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame<T> {
    pub t: Vec3<T>,
    pub b: Vec3<T>,
    pub n: Vec3<T>,
}

impl<T: Real> Frame<T> {
    /// Builds a frame around a unit normal (branchless construction of Duff et al.).
    pub fn from_normal(n: Vec3<T>) -> Self {
        let sign = T::one().copysign(n.z);
        let a = -T::one() / (sign + n.z);
        let b = n.x * n.y * a;
        let t = Vec3::new(T::one() + sign * n.x * n.x * a, sign * b, -sign * n.x);
        let bt = Vec3::new(b, sign + n.y * n.y * a, -n.y);
        Self { t, b: bt, n }
    }

    /// Frame whose tangent is `tangent` projected onto the plane of `n`.
    /// Returns `None` when the tangent is (nearly) parallel to the normal.
    pub fn from_normal_tangent(n: Vec3<T>, tangent: Vec3<T>) -> Option<Self> {
        let t = (tangent - n * n.dot(tangent)).try_normalize()?;
        if t.length_squared() < T::lit(0.5) {
            return None;
        }
        let b = n.cross(t);
        Some(Self { t, b, n })
    }

    #[inline]
    pub fn to_local(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(v.dot(self.t), v.dot(self.b), v.dot(self.n))
    }

    #[inline]
    pub fn to_world(&self, v: Vec3<T>) -> Vec3<T> {
        self.t * v.x + self.b * v.y + self.n * v.z
    }

    /// Same frame viewed from the other side.
    pub fn flipped(&self) -> Self {
        Self {
            t: self.t,
            b: -self.b,
            n: -self.n,
        }
    }
}
