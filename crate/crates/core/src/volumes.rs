//! Heterogeneous participating media on dense voxel grids.
//!
//! A grid occupies the unit cube `[0, 1]³` of its entity's local space.
//! All queries take a local-space ray whose parameter is world distance:
//! `origin + t·direction` with `direction` the world unit direction mapped
//! into local space (so generally not unit length).

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use crate::math::Frame;
use crate::sampling::Sampler;
use crate::{Rgb, Vec3f};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VolumeError {
    #[error("grid dimensions must be positive, got {0:?}")]
    InvalidDims([u32; 3]),
    #[error("density has {got} values, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("density at index {0} is negative or not finite")]
    BadDensity(usize),
    #[error("invalid {0}")]
    InvalidParameter(&'static str),
    #[error("malformed VOLG data: {0}")]
    Format(String),
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },
}

/// Dense scalar density grid with its optical parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeGrid {
    dims: [u32; 3],
    density: Vec<f32>,
    sigma_t: f64,
    albedo: Rgb,
    g: f64,
    max_density: f64,
    min_density: f64,
}

/// What happened at a real collision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MediumEvent {
    Scatter,
    Absorb,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Collision {
    pub t: f64,
    pub event: MediumEvent,
    /// Throughput multiplier for a scatter event (albedo over the scatter
    /// probability); zero for absorption.
    pub weight: Rgb,
}

impl VolumeGrid {
    /// Builds a grid from x-fastest densities.
    pub fn from_array(dims: [u32; 3], density: Vec<f32>, sigma_t: f64, albedo: Rgb, g: f64) -> Result<Self, VolumeError> {
        if dims.contains(&0) {
            return Err(VolumeError::InvalidDims(dims));
        }
        let expected = dims.iter().map(|&d| d as usize).product();
        if density.len() != expected {
            return Err(VolumeError::LengthMismatch {
                expected,
                got: density.len(),
            });
        }
        if let Some(i) = density.iter().position(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(VolumeError::BadDensity(i));
        }
        if !(sigma_t > 0.0 && sigma_t.is_finite()) {
            return Err(VolumeError::InvalidParameter("sigma_t: must be positive"));
        }
        if !(g > -1.0 && g < 1.0) {
            return Err(VolumeError::InvalidParameter("phase g: must lie in (-1, 1)"));
        }
        if !albedo.is_finite() {
            return Err(VolumeError::InvalidParameter("albedo"));
        }
        let max_density = density.iter().fold(0.0f32, |m, &d| m.max(d)) as f64;
        let min_density = density.iter().fold(f32::INFINITY, |m, &d| m.min(d)) as f64;
        Ok(Self {
            dims,
            density,
            sigma_t,
            albedo: albedo.map(|a| a.clamp(0.0, 1.0)),
            g,
            max_density,
            min_density,
        })
    }

    pub fn dims(&self) -> [u32; 3] {
        self.dims
    }

    pub fn densities(&self) -> &[f32] {
        &self.density
    }

    pub fn sigma_t(&self) -> f64 {
        self.sigma_t
    }

    pub fn albedo(&self) -> Rgb {
        self.albedo
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn max_density(&self) -> f64 {
        self.max_density
    }

    pub fn min_density(&self) -> f64 {
        self.min_density
    }

    /// Extinction upper bound used for tracking.
    pub fn majorant(&self) -> f64 {
        self.sigma_t * self.max_density
    }

    pub fn voxel(&self, x: u32, y: u32, z: u32) -> f64 {
        let [nx, ny, _] = self.dims;
        self.density[((z * ny + y) * nx + x) as usize] as f64
    }

    /// Trilinear density at a local point with voxel centers at
    /// `(i + 0.5) / n`, clamped to the edge voxels, and 0 outside the cube.
    pub fn density_at(&self, p: Vec3f) -> f64 {
        if !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y) || !(0.0..=1.0).contains(&p.z) {
            return 0.0;
        }
        let mut lo = [0u32; 3];
        let mut hi = [0u32; 3];
        let mut f = [0.0; 3];
        for a in 0..3 {
            let n = self.dims[a];
            let x = (p[a] * n as f64 - 0.5).clamp(0.0, (n - 1) as f64);
            let x0 = x.floor();
            lo[a] = x0 as u32;
            hi[a] = (lo[a] + 1).min(n - 1);
            f[a] = x - x0;
        }
        let mut sum = 0.0;
        for corner in 0..8 {
            let pick = |a: usize| corner >> a & 1 == 1;
            let mut w = 1.0;
            let mut idx = [0u32; 3];
            for a in 0..3 {
                if pick(a) {
                    w *= f[a];
                    idx[a] = hi[a];
                } else {
                    w *= 1.0 - f[a];
                    idx[a] = lo[a];
                }
            }
            if w > 0.0 {
                sum += w * self.voxel(idx[0], idx[1], idx[2]);
            }
        }
        sum
    }

    pub fn sigma_t_at(&self, p: Vec3f) -> f64 {
        self.sigma_t * self.density_at(p)
    }

    /// Estimates the transmittance along `origin + t·direction` for
    /// `t ∈ [t0, t1]` by residual ratio tracking: the grid minimum is
    /// integrated in closed form and the remainder is tracked against the
    /// global majorant. Consumes a variable number of 1D samples.
    pub fn transmittance<S: Sampler + ?Sized>(&self, origin: Vec3f, direction: Vec3f, t0: f64, t1: f64, sampler: &mut S) -> f64 {
        let Some((a, b)) = clip_unit_cube(origin, direction, t0, t1) else {
            return 1.0;
        };
        let control = self.sigma_t * self.min_density;
        let residual_major = self.majorant() - control;
        let base = (-control * (b - a)).exp();
        if residual_major <= 0.0 {
            return base;
        }
        let mut tr = 1.0;
        let mut t = a;
        loop {
            t -= (1.0 - sampler.next_1d()).ln() / residual_major;
            if t >= b {
                break;
            }
            let sigma = self.sigma_t_at(origin + direction * t) - control;
            tr *= 1.0 - sigma / residual_major;
        }
        base * tr
    }

    /// Delta tracking along the ray for `t ∈ [t0, t1]`. Returns the first
    /// real collision, or `None` when the ray leaves the range unscattered.
    pub fn sample_scatter<S: Sampler + ?Sized>(&self, origin: Vec3f, direction: Vec3f, t0: f64, t1: f64, sampler: &mut S) -> Option<Collision> {
        let (a, b) = clip_unit_cube(origin, direction, t0, t1)?;
        let major = self.majorant();
        if major <= 0.0 {
            return None;
        }
        let mut t = a;
        loop {
            t -= (1.0 - sampler.next_1d()).ln() / major;
            if t >= b {
                return None;
            }
            let u = sampler.next_1d();
            if u * major < self.sigma_t_at(origin + direction * t) {
                let p_scatter = self.albedo.average();
                let event = if sampler.next_1d() < p_scatter {
                    MediumEvent::Scatter
                } else {
                    MediumEvent::Absorb
                };
                let weight = match event {
                    MediumEvent::Scatter => self.albedo / p_scatter,
                    MediumEvent::Absorb => Rgb::zero(),
                };
                return Some(Collision { t, event, weight });
            }
        }
    }
}

/// Overlap of the ray range with the unit cube, without padding.
pub fn clip_unit_cube(origin: Vec3f, direction: Vec3f, t0: f64, t1: f64) -> Option<(f64, f64)> {
    let (mut a, mut b) = (t0, t1);
    for k in 0..3 {
        let (o, d) = (origin[k], direction[k]);
        if d == 0.0 {
            if !(0.0..=1.0).contains(&o) {
                return None;
            }
            continue;
        }
        let (mut near, mut far) = (-o / d, (1.0 - o) / d);
        if near > far {
            std::mem::swap(&mut near, &mut far);
        }
        a = a.max(near);
        b = b.min(far);
    }
    (a < b).then_some((a, b))
}

/// Henyey–Greenstein density for the cosine between the incoming and
/// outgoing travel directions.
pub fn hg_phase(cos_theta: f64, g: f64) -> f64 {
    let denom = 1.0 + g * g - 2.0 * g * cos_theta;
    (1.0 - g * g) / (4.0 * PI * denom * denom.sqrt())
}

/// Samples a new travel direction after scattering a ray travelling along
/// `direction` (unit). Returns the direction and its solid-angle pdf.
pub fn sample_phase(g: f64, direction: Vec3f, u: [f64; 2]) -> (Vec3f, f64) {
    let cos_theta = if g.abs() < 1e-3 {
        1.0 - 2.0 * u[0]
    } else {
        let s = (1.0 - g * g) / (1.0 - g + 2.0 * g * u[0]);
        ((1.0 + g * g - s * s) / (2.0 * g)).clamp(-1.0, 1.0)
    };
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    let phi = 2.0 * PI * u[1];
    let local = Vec3f::new(sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta);
    let wi = Frame::from_normal(direction).to_world(local);
    (wi, hg_phase(cos_theta, g))
}

const VOLG_MAGIC: &[u8; 4] = b"VOLG";

/// Reads a VOLG grid: magic, three little-endian u32 dims, then x-fastest
/// little-endian f32 densities.
pub fn read_volg<R: Read>(mut r: R) -> Result<([u32; 3], Vec<f32>), VolumeError> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)
        .map_err(|_| VolumeError::Format("truncated header".into()))?;
    if &header[..4] != VOLG_MAGIC {
        return Err(VolumeError::Format("bad magic".into()));
    }
    let dim = |i: usize| u32::from_le_bytes(header[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let dims = [dim(0), dim(1), dim(2)];
    if dims.contains(&0) {
        return Err(VolumeError::InvalidDims(dims));
    }
    let count = dims
        .iter()
        .try_fold(1usize, |n, &d| n.checked_mul(d as usize))
        .ok_or_else(|| VolumeError::Format("grid too large".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| VolumeError::Format(e.to_string()))?;
    if bytes.len() != count * 4 {
        return Err(VolumeError::LengthMismatch {
            expected: count,
            got: bytes.len() / 4,
        });
    }
    let density = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((dims, density))
}

pub fn write_volg<W: Write>(mut w: W, dims: [u32; 3], density: &[f32]) -> std::io::Result<()> {
    w.write_all(VOLG_MAGIC)?;
    for d in dims {
        w.write_all(&d.to_le_bytes())?;
    }
    for v in density {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn load_volg(path: &Path) -> Result<([u32; 3], Vec<f32>), VolumeError> {
    let file = std::fs::File::open(path).map_err(|e| VolumeError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    read_volg(std::io::BufReader::new(file))
}
