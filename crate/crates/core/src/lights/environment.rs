use std::f64::consts::PI;
use std::sync::Arc;

use crate::materials::Texture;
use crate::sampling::{uniform_sphere, Distribution1D, UNIFORM_SPHERE_PDF};
use crate::{Rgb, Vec2f, Vec3f};

#[derive(Clone, Debug, PartialEq)]
pub enum EnvironmentSource {
    Constant(Rgb),
    /// Latitude-longitude map: columns span longitude, row 0 is the zenith (+z).
    Map(Arc<Texture>),
}

/// Fraction of the mean texel luminance added to every sampling weight so
/// that bilinear spill into dark texels is still reachable.
const SAMPLING_FLOOR: f64 = 0.01;

/// Distant illumination surrounding the scene.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    source: EnvironmentSource,
    intensity: f64,
    rotation: f64,
    hemisphere_only: bool,
    rows: Option<Distribution1D>,
    columns: Vec<Distribution1D>,
}

impl Environment {
    pub fn constant(color: Rgb) -> Self {
        Self::new(EnvironmentSource::Constant(color), 1.0, 0.0, false)
    }

    /// `rotation` (radians) turns the map about +z.
    pub fn new(source: EnvironmentSource, intensity: f64, rotation: f64, hemisphere_only: bool) -> Self {
        let mut env = Self {
            source,
            intensity: if intensity > 0.0 { intensity } else { 0.0 },
            rotation,
            hemisphere_only,
            rows: None,
            columns: Vec::new(),
        };
        if let EnvironmentSource::Map(tex) = &env.source {
            let (w, h) = (tex.width() as usize, tex.height() as usize);
            let lum = |x: usize, y: usize| {
                let [r, g, b, _] = tex.texel(x as u32, y as u32);
                Rgb::new(r as f64, g as f64, b as f64).luminance().max(0.0)
            };
            let mean = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).map(|(x, y)| lum(x, y)).sum::<f64>()
                / (w * h) as f64;
            let floor = SAMPLING_FLOOR * mean;
            let mut row_weights = Vec::with_capacity(h);
            for y in 0..h {
                let theta_top = PI * y as f64 / h as f64;
                let sin_c = (PI * (y as f64 + 0.5) / h as f64).sin();
                let visible = !hemisphere_only || theta_top < PI / 2.0;
                let weights: Vec<f64> = (0..w)
                    .map(|x| if visible { (lum(x, y) + floor) * sin_c } else { 0.0 })
                    .collect();
                row_weights.push(weights.iter().sum());
                env.columns.push(Distribution1D::new(&weights));
            }
            env.rows = Some(Distribution1D::new(&row_weights));
        }
        env
    }

    pub fn source(&self) -> &EnvironmentSource {
        &self.source
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn hemisphere_only(&self) -> bool {
        self.hemisphere_only
    }

    /// Whether any direction receives nonzero radiance.
    pub fn emits(&self) -> bool {
        self.intensity > 0.0
            && match &self.source {
                EnvironmentSource::Constant(c) => c.max_component() > 0.0,
                EnvironmentSource::Map(t) => t.pixels().iter().any(|p| p[..3].iter().any(|&c| c > 0.0)),
            }
    }

    /// Map coordinates of a direction: u from longitude, v = θ/π.
    pub fn direction_to_uv(&self, dir: Vec3f) -> Vec2f {
        let phi = dir.y.atan2(dir.x);
        let u = ((phi - self.rotation) / (2.0 * PI)).rem_euclid(1.0);
        let v = dir.z.clamp(-1.0, 1.0).acos() / PI;
        Vec2f::new(u, v)
    }

    pub fn uv_to_direction(&self, uv: Vec2f) -> Vec3f {
        let phi = 2.0 * PI * uv.x + self.rotation;
        let (st, ct) = (PI * uv.y).sin_cos();
        Vec3f::new(st * phi.cos(), st * phi.sin(), ct)
    }

    /// Radiance arriving from direction `dir` (pointing away from the scene).
    pub fn radiance(&self, dir: Vec3f) -> Rgb {
        if self.hemisphere_only && dir.z < 0.0 {
            return Rgb::zero();
        }
        match &self.source {
            EnvironmentSource::Constant(c) => *c * self.intensity,
            EnvironmentSource::Map(tex) => lookup_latlong(tex, self.direction_to_uv(dir)) * self.intensity,
        }
    }

    /// Importance-samples a direction; returns `(dir, radiance, solid-angle pdf)`.
    pub fn sample(&self, u: [f64; 2]) -> Option<(Vec3f, Rgb, f64)> {
        let (dir, pdf) = match &self.rows {
            None => {
                let mut d = uniform_sphere(u);
                if self.hemisphere_only {
                    d.z = d.z.abs();
                    (d, 2.0 * UNIFORM_SPHERE_PDF)
                } else {
                    (d, UNIFORM_SPHERE_PDF)
                }
            }
            Some(rows) => {
                let (v, pdf_v, row) = rows.sample_continuous(u[1]);
                let (su, pdf_u, _) = self.columns[row].sample_continuous(u[0]);
                let sin_theta = (PI * v).sin();
                if sin_theta <= 0.0 {
                    return None;
                }
                let dir = self.uv_to_direction(Vec2f::new(su, v));
                (dir, pdf_u * pdf_v / (2.0 * PI * PI * sin_theta))
            }
        };
        let radiance = self.radiance(dir);
        if !(pdf > 0.0) || radiance.is_zero() {
            return None;
        }
        Some((dir, radiance, pdf))
    }

    /// Solid-angle density of [`Environment::sample`] producing `dir`.
    pub fn pdf(&self, dir: Vec3f) -> f64 {
        match &self.rows {
            None => {
                if !self.hemisphere_only {
                    UNIFORM_SPHERE_PDF
                } else if dir.z >= 0.0 {
                    2.0 * UNIFORM_SPHERE_PDF
                } else {
                    0.0
                }
            }
            Some(rows) => {
                let sin_theta = (1.0 - dir.z * dir.z).max(0.0).sqrt();
                if sin_theta <= 0.0 {
                    return 0.0;
                }
                let uv = self.direction_to_uv(dir);
                let (h, w) = (rows.len(), self.columns[0].len());
                let row = ((uv.y * h as f64) as usize).min(h - 1);
                let col = ((uv.x * w as f64) as usize).min(w - 1);
                let pdf_uv = rows.prob(row) * h as f64 * self.columns[row].prob(col) * w as f64;
                pdf_uv / (2.0 * PI * PI * sin_theta)
            }
        }
    }
}

/// Bilinear lookup that wraps in longitude and clamps in latitude.
fn lookup_latlong(tex: &Texture, uv: Vec2f) -> Rgb {
    let (w, h) = (tex.width() as i64, tex.height() as i64);
    let x = uv.x * w as f64 - 0.5;
    let y = (uv.y * h as f64 - 0.5).clamp(0.0, (h - 1) as f64);
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let xa = (x0 as i64).rem_euclid(w) as u32;
    let xb = (x0 as i64 + 1).rem_euclid(w) as u32;
    let ya = y0 as u32;
    let yb = (y0 as i64 + 1).min(h - 1) as u32;
    let t = |x, y| {
        let [r, g, b, _] = tex.texel(x, y);
        Rgb::new(r as f64, g as f64, b as f64)
    };
    let top = t(xa, ya) * (1.0 - fx) + t(xb, ya) * fx;
    let bottom = t(xa, yb) * (1.0 - fx) + t(xb, yb) * fx;
    top * (1.0 - fy) + bottom * fy
}
