//! Triangle meshes, the per-mesh BVH (BLAS), the instance-level BVH (IAS),
//! and ray queries against them.

mod bvh;
mod ias;
mod mesh;
pub mod obj;
mod triangle;

pub use bvh::{Blas, Bvh, BvhNode, BVH_BINS, BVH_MAX_DEPTH, BVH_MAX_LEAF, COST_INTERSECT, COST_TRAVERSE};
pub use ias::{brute_force_intersect, Hit, Ias, Instance};
pub use mesh::{Mesh, DEGENERATE_AREA};
pub use obj::{load_obj, parse_obj, ObjMesh};
pub use triangle::intersect_triangle;

use crate::math::{Mat4, Real, Vec3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("triangle {triangle} references vertex {index} but only {count} vertices exist")]
    IndexOutOfRange { triangle: usize, index: i64, count: usize },
    #[error("{what} has {got} entries, expected {expected}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("mesh has no non-degenerate triangles")]
    EmptyMesh,
    #[error("OBJ line {line}: {message}")]
    Obj { line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Axis-aligned bounding box. The empty box has `min > max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Default for Aabb<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: Real> Aabb<T> {
    pub fn empty() -> Self {
        Self {
            min: Vec3::splat(T::infinity()),
            max: Vec3::splat(T::neg_infinity()),
        }
    }

    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Self {
        Self { min, max }
    }

    pub fn from_points(points: impl IntoIterator<Item = Vec3<T>>) -> Self {
        points.into_iter().fold(Self::empty(), |b, p| b.grow(p))
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    #[inline]
    pub fn grow(self, p: Vec3<T>) -> Self {
        Self::new(self.min.min(p), self.max.max(p))
    }

    #[inline]
    pub fn union(self, o: Self) -> Self {
        Self::new(self.min.min(o.min), self.max.max(o.max))
    }

    pub fn centroid(&self) -> Vec3<T> {
        (self.min + self.max) * T::lit(0.5)
    }

    pub fn diagonal(&self) -> Vec3<T> {
        if self.is_empty() {
            Vec3::zero()
        } else {
            self.max - self.min
        }
    }

    pub fn surface_area(&self) -> T {
        let d = self.diagonal();
        T::lit(2.0) * (d.x * d.y + d.y * d.z + d.z * d.x)
    }

    pub fn contains_point(&self, p: Vec3<T>) -> bool {
        p.x >= self.min.x
            && p.y >= self.min.y
            && p.z >= self.min.z
            && p.x <= self.max.x
            && p.y <= self.max.y
            && p.z <= self.max.z
    }

    pub fn contains(&self, o: &Self) -> bool {
        o.is_empty() || (self.contains_point(o.min) && self.contains_point(o.max))
    }

    pub fn corners(&self) -> [Vec3<T>; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(a.x, b.y, b.z),
            Vec3::new(b.x, b.y, b.z),
        ]
    }

    /// Bounds of the eight transformed corners.
    pub fn transformed(&self, m: &Mat4<T>) -> Self {
        if self.is_empty() {
            return *self;
        }
        Self::from_points(self.corners().into_iter().map(|c| m.transform_point(c)))
    }

    /// Slab test returning the parametric overlap `[t0, t1]` with `[t_min, t_max]`.
    /// The slab interval is widened by a few ulps so that any triangle inside
    /// the box that a ray hits is never culled by rounding.
    #[inline]
    pub fn intersect(&self, origin: Vec3<T>, inv_dir: Vec3<T>, t_min: T, t_max: T) -> Option<(T, T)> {
        let pad = T::epsilon() * T::lit(64.0);
        let mut t0 = t_min;
        let mut t1 = t_max;
        for a in 0..3 {
            let inv = inv_dir[a];
            let o = origin[a];
            if inv.is_infinite() {
                // direction component is zero: the ray stays in this slab or never enters it
                if o < self.min[a] || o > self.max[a] {
                    return None;
                }
                continue;
            }
            let mut near = (self.min[a] - o) * inv;
            let mut far = (self.max[a] - o) * inv;
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            let slack = (near.abs().max(far.abs())) * pad + T::min_positive_value();
            near -= slack;
            far += slack;
            if near > t0 {
                t0 = near;
            }
            if far < t1 {
                t1 = far;
            }
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

/// Component-wise reciprocal; zero components map to signed infinity.
#[inline]
pub(crate) fn reciprocal<T: Real>(d: Vec3<T>) -> Vec3<T> {
    Vec3::new(T::one() / d.x, T::one() / d.y, T::one() / d.z)
}
