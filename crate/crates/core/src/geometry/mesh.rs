use crate::math::{Real, Vec2, Vec3};

use super::{Aabb, GeometryError};

/// Triangles whose area is at or below this are dropped at build time.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// Indexed triangle mesh with per-vertex normals and optional texture coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh<T> {
    positions: Vec<Vec3<T>>,
    normals: Vec<Vec3<T>>,
    uvs: Option<Vec<Vec2<T>>>,
    indices: Vec<[u32; 3]>,
    dropped_degenerate: usize,
    normals_computed: bool,
}

impl<T: Real> Mesh<T> {
    /// Validates raw arrays and builds a mesh. Degenerate triangles are
    /// dropped (see [`Mesh::dropped_degenerate`]); missing normals are
    /// computed as area-weighted averages of adjacent face normals.
    pub fn from_arrays(
        positions: Vec<Vec3<T>>,
        indices: Vec<[u32; 3]>,
        normals: Option<Vec<Vec3<T>>>,
        uvs: Option<Vec<Vec2<T>>>,
    ) -> Result<Self, GeometryError> {
        let count = positions.len();
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite("vertex position"));
        }
        for (triangle, tri) in indices.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i as usize >= count) {
                return Err(GeometryError::IndexOutOfRange {
                    triangle,
                    index: bad as i64,
                    count,
                });
            }
        }
        if let Some(n) = &normals {
            if n.len() != count {
                return Err(GeometryError::LengthMismatch {
                    what: "normals",
                    expected: count,
                    got: n.len(),
                });
            }
        }
        if let Some(uv) = &uvs {
            if uv.len() != count {
                return Err(GeometryError::LengthMismatch {
                    what: "uvs",
                    expected: count,
                    got: uv.len(),
                });
            }
            if uv.iter().any(|t| !(t.x.is_finite() && t.y.is_finite())) {
                return Err(GeometryError::NonFinite("texture coordinate"));
            }
        }

        let threshold = T::lit(DEGENERATE_AREA);
        let before = indices.len();
        let indices: Vec<[u32; 3]> = indices
            .into_iter()
            .filter(|t| triangle_area(&positions, t) > threshold)
            .collect();
        let dropped_degenerate = before - indices.len();
        if indices.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }

        let (normals, normals_computed) = match normals {
            Some(n) => {
                let mut out = Vec::with_capacity(n.len());
                // unit normals pass through untouched so export/import is lossless
                let slack = T::epsilon() * T::lit(4.0);
                for v in n {
                    if v.is_finite() && (v.length_squared() - T::one()).abs() <= slack {
                        out.push(v);
                    } else {
                        out.push(v.try_normalize().ok_or(GeometryError::NonFinite("vertex normal"))?);
                    }
                }
                (out, false)
            }
            None => (vertex_normals(&positions, &indices), true),
        };

        Ok(Self {
            positions,
            normals,
            uvs,
            indices,
            dropped_degenerate,
            normals_computed,
        })
    }

    /// UV sphere centered at the origin with `segments` slices and
    /// `segments / 2` stacks, z-up.
    pub fn sphere(radius: T, segments: u32) -> Result<Self, GeometryError> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(GeometryError::InvalidDimension(format!("sphere radius {radius}")));
        }
        if segments < 3 {
            return Err(GeometryError::InvalidDimension(format!("sphere segments {segments} (need >= 3)")));
        }
        let slices = segments as usize;
        let stacks = (segments as usize / 2).max(2);
        let mut positions = Vec::with_capacity((stacks + 1) * (slices + 1));
        let mut normals = Vec::with_capacity(positions.capacity());
        let mut uvs = Vec::with_capacity(positions.capacity());
        for i in 0..=stacks {
            let (sin_t, cos_t) = if i == 0 {
                (T::zero(), T::one())
            } else if i == stacks {
                (T::zero(), -T::one())
            } else {
                let theta = T::PI() * T::lit(i as f64) / T::lit(stacks as f64);
                (theta.sin(), theta.cos())
            };
            for j in 0..=slices {
                // the seam column reuses the first column's angle so positions match bitwise
                let jj = if j == slices { 0 } else { j };
                let phi = T::TAU() * T::lit(jj as f64) / T::lit(slices as f64);
                let n = Vec3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t);
                positions.push(n * radius);
                normals.push(n);
                uvs.push(Vec2::new(
                    T::lit(j as f64 / slices as f64),
                    T::one() - T::lit(i as f64 / stacks as f64),
                ));
            }
        }
        let row = slices + 1;
        let mut indices = Vec::with_capacity(2 * stacks * slices);
        for i in 0..stacks {
            for j in 0..slices {
                let a = (i * row + j) as u32;
                let b = ((i + 1) * row + j) as u32;
                let c = ((i + 1) * row + j + 1) as u32;
                let d = (i * row + j + 1) as u32;
                if i + 1 != stacks {
                    indices.push([a, b, c]);
                }
                if i != 0 {
                    indices.push([a, c, d]);
                }
            }
        }
        Self::from_arrays(positions, indices, Some(normals), Some(uvs))
    }

    /// Axis-aligned box centered at the origin with full extents `size`.
    pub fn cuboid(size: Vec3<T>) -> Result<Self, GeometryError> {
        if !(size.min_component() > T::zero()) || !size.is_finite() {
            return Err(GeometryError::InvalidDimension(format!("box size {size:?}")));
        }
        let half = size * T::lit(0.5);
        let x = Vec3::unit_x();
        let y = Vec3::unit_y();
        let z = Vec3::unit_z();
        // (normal, u axis, v axis) with u × v = normal
        let faces = [(x, y, z), (-x, z, y), (y, z, x), (-y, x, z), (z, x, y), (-z, y, x)];
        let mut positions = Vec::with_capacity(24);
        let mut normals = Vec::with_capacity(24);
        let mut uvs = Vec::with_capacity(24);
        let mut indices = Vec::with_capacity(12);
        for (n, u, v) in faces {
            let base = positions.len() as u32;
            let center = n * half;
            let hu = u * half;
            let hv = v * half;
            let corners = [(-T::one(), -T::one()), (T::one(), -T::one()), (T::one(), T::one()), (-T::one(), T::one())];
            for (su, sv) in corners {
                positions.push(center + hu * su + hv * sv);
                normals.push(n);
                uvs.push(Vec2::new((su + T::one()) * T::lit(0.5), (sv + T::one()) * T::lit(0.5)));
            }
            indices.push([base, base + 1, base + 2]);
            indices.push([base, base + 2, base + 3]);
        }
        Self::from_arrays(positions, indices, Some(normals), Some(uvs))
    }

    /// Rectangle in the z = 0 plane, centered at the origin, facing +z.
    pub fn plane(width: T, height: T) -> Result<Self, GeometryError> {
        if !(width > T::zero() && height > T::zero()) || !(width.is_finite() && height.is_finite()) {
            return Err(GeometryError::InvalidDimension(format!("plane size {width} x {height}")));
        }
        let (hw, hh) = (width * T::lit(0.5), height * T::lit(0.5));
        let z = T::zero();
        let positions = vec![
            Vec3::new(-hw, -hh, z),
            Vec3::new(hw, -hh, z),
            Vec3::new(hw, hh, z),
            Vec3::new(-hw, hh, z),
        ];
        let uvs = vec![
            Vec2::new(T::zero(), T::zero()),
            Vec2::new(T::one(), T::zero()),
            Vec2::new(T::one(), T::one()),
            Vec2::new(T::zero(), T::one()),
        ];
        let normals = vec![Vec3::unit_z(); 4];
        Self::from_arrays(positions, vec![[0, 1, 2], [0, 2, 3]], Some(normals), Some(uvs))
    }

    pub fn positions(&self) -> &[Vec3<T>] {
        &self.positions
    }

    pub fn normals(&self) -> &[Vec3<T>] {
        &self.normals
    }

    pub fn uvs(&self) -> Option<&[Vec2<T>]> {
        self.uvs.as_deref()
    }

    pub fn indices(&self) -> &[[u32; 3]] {
        &self.indices
    }

    pub fn triangle_count(&self) -> usize {
        self.indices.len()
    }

    /// Number of zero-area triangles removed while building.
    pub fn dropped_degenerate(&self) -> usize {
        self.dropped_degenerate
    }

    pub fn normals_computed(&self) -> bool {
        self.normals_computed
    }

    #[inline]
    pub fn triangle(&self, i: usize) -> [Vec3<T>; 3] {
        let [a, b, c] = self.indices[i];
        [
            self.positions[a as usize],
            self.positions[b as usize],
            self.positions[c as usize],
        ]
    }

    pub fn triangle_bounds(&self, i: usize) -> Aabb<T> {
        Aabb::from_points(self.triangle(i))
    }

    pub fn triangle_area(&self, i: usize) -> T {
        triangle_area(&self.positions, &self.indices[i])
    }

    pub fn surface_area(&self) -> T {
        (0..self.indices.len()).fold(T::zero(), |acc, i| acc + self.triangle_area(i))
    }

    pub fn bounds(&self) -> Aabb<T> {
        Aabb::from_points(self.positions.iter().copied())
    }

    pub fn cast<U: Real>(&self) -> Mesh<U> {
        Mesh {
            positions: self.positions.iter().map(|p| p.cast()).collect(),
            normals: self.normals.iter().map(|p| p.cast()).collect(),
            uvs: self.uvs.as_ref().map(|v| v.iter().map(|t| t.cast()).collect()),
            indices: self.indices.clone(),
            dropped_degenerate: self.dropped_degenerate,
            normals_computed: self.normals_computed,
        }
    }
}

fn triangle_area<T: Real>(positions: &[Vec3<T>], tri: &[u32; 3]) -> T {
    let a = positions[tri[0] as usize];
    let b = positions[tri[1] as usize];
    let c = positions[tri[2] as usize];
    (b - a).cross(c - a).length() * T::lit(0.5)
}

fn vertex_normals<T: Real>(positions: &[Vec3<T>], indices: &[[u32; 3]]) -> Vec<Vec3<T>> {
    let mut acc = vec![Vec3::zero(); positions.len()];
    for tri in indices {
        let [a, b, c] = tri.map(|i| positions[i as usize]);
        // unnormalized cross product weights by twice the area
        let n = (b - a).cross(c - a);
        for &i in tri {
            acc[i as usize] += n;
        }
    }
    acc.into_iter()
        .map(|n| n.try_normalize().unwrap_or_else(Vec3::unit_z))
        .collect()
}
