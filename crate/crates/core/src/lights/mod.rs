//! Mesh area lights, the environment dome, and light sampling for next
//! event estimation.

mod environment;

use std::sync::Arc;

pub use environment::{Environment, EnvironmentSource};

use crate::geometry::Ias;
use crate::materials::{MaterialError, Texture};
use crate::sampling::{uniform_triangle, Distribution1D, Sampler};
use crate::{Rgb, Vec2f, Vec3f};

/// Light component: uniform emitted radiance `intensity · color` over the
/// surface of the entity's mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Light {
    intensity: f64,
    color: Rgb,
    pub color_texture: Option<String>,
    pub two_sided: bool,
}

impl Default for Light {
    fn default() -> Self {
        Self {
            intensity: 1.0,
            color: Rgb::one(),
            color_texture: None,
            two_sided: false,
        }
    }
}

impl Light {
    pub fn new(intensity: f64, color: Rgb) -> Self {
        let mut l = Self::default();
        l.set_intensity(intensity);
        l.set_color(color);
        l
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn color(&self) -> Rgb {
        self.color
    }

    /// Negative or NaN intensities are stored as 0.
    pub fn set_intensity(&mut self, intensity: f64) {
        self.intensity = if intensity > 0.0 { intensity } else { 0.0 };
    }

    pub fn set_color(&mut self, color: Rgb) {
        self.color = color.map(|c| if c > 0.0 { c } else { 0.0 });
    }

    pub fn resolve<F>(&self, mut lookup: F) -> Result<ShadingLight, MaterialError>
    where
        F: FnMut(&str) -> Option<Arc<Texture>>,
    {
        let texture = match &self.color_texture {
            None => None,
            Some(name) => Some(lookup(name).ok_or_else(|| MaterialError::UnknownTexture(name.clone()))?),
        };
        Ok(ShadingLight {
            intensity: self.intensity,
            color: self.color,
            texture,
            two_sided: self.two_sided,
        })
    }
}

/// A light with its color texture resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadingLight {
    pub intensity: f64,
    pub color: Rgb,
    pub texture: Option<Arc<Texture>>,
    pub two_sided: bool,
}

impl ShadingLight {
    /// Radiance leaving the surface toward `w_out` (pointing away from the
    /// surface). The front side is the one the geometric normal faces.
    pub fn emitted_radiance(&self, uv: Vec2f, normal: Vec3f, w_out: Vec3f) -> Rgb {
        let cos = normal.dot(w_out);
        if cos == 0.0 || (cos < 0.0 && !self.two_sided) {
            return Rgb::zero();
        }
        let color = match &self.texture {
            Some(t) => t.lookup_rgb(uv),
            None => self.color,
        };
        color * self.intensity
    }
}

/// Which emitter a sample came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LightId {
    Area(u32),
    Environment,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LightSample {
    /// Unit direction from the shading point toward the emitter.
    pub wi: Vec3f,
    pub radiance: Rgb,
    /// Solid-angle density, including the light-selection probability.
    pub pdf: f64,
    /// Distance to the sampled point (infinite for the environment).
    pub distance: f64,
    /// Sampled point and its geometric normal (area lights only).
    pub point: Vec3f,
    pub normal: Vec3f,
    pub light: LightId,
}

/// An emissive instance and its triangle-selection table.
#[derive(Clone, Debug)]
pub struct AreaLight {
    pub instance: u32,
    pub emission: ShadingLight,
    triangles: Distribution1D,
}

/// All emitters of a snapshot. Lights are picked uniformly, with the
/// environment counted as one more light when it emits.
#[derive(Clone, Debug, Default)]
pub struct LightTable {
    lights: Vec<AreaLight>,
    by_instance: Vec<Option<u32>>,
    environment: Option<Arc<Environment>>,
}

fn world_triangle_area(ias: &Ias<f64>, instance: u32, tri: usize, time: f64) -> f64 {
    let inst = &ias.instances()[instance as usize];
    let m = inst.matrix_at(time);
    let [a, b, c] = inst.mesh().triangle(tri).map(|p| m.transform_point(p));
    0.5 * (b - a).cross(c - a).length()
}

impl LightTable {
    /// `emitters` pairs IAS instance indices with their light parameters.
    pub fn build(ias: &Ias<f64>, emitters: Vec<(u32, ShadingLight)>, environment: Option<Arc<Environment>>) -> Self {
        let mut by_instance = vec![None; ias.instances().len()];
        let mut lights = Vec::new();
        for (instance, emission) in emitters {
            let mesh = ias.instances()[instance as usize].mesh();
            let areas: Vec<f64> = (0..mesh.triangle_count())
                .map(|t| world_triangle_area(ias, instance, t, 1.0))
                .collect();
            by_instance[instance as usize] = Some(lights.len() as u32);
            lights.push(AreaLight {
                instance,
                emission,
                triangles: Distribution1D::new(&areas),
            });
        }
        let environment = environment.filter(|e| e.emits());
        Self {
            lights,
            by_instance,
            environment,
        }
    }

    pub fn lights(&self) -> &[AreaLight] {
        &self.lights
    }

    pub fn environment(&self) -> Option<&Arc<Environment>> {
        self.environment.as_ref()
    }

    /// Number of pickable emitters.
    pub fn count(&self) -> usize {
        self.lights.len() + usize::from(self.environment.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn light_for_instance(&self, instance: u32) -> Option<&AreaLight> {
        self.by_instance
            .get(instance as usize)
            .copied()
            .flatten()
            .map(|i| &self.lights[i as usize])
    }

    fn pick_probability(&self) -> f64 {
        1.0 / self.count() as f64
    }

    /// Samples an emitter as seen from `p` at shutter time `time`.
    /// Consumes one 1D and one 2D sample. Returns `None` when there is
    /// nothing to sample or the sample carries no energy.
    pub fn sample<S: Sampler + ?Sized>(&self, ias: &Ias<f64>, p: Vec3f, time: f64, sampler: &mut S) -> Option<LightSample> {
        let u_pick = sampler.next_1d();
        let u = sampler.next_2d();
        let n = self.count();
        if n == 0 {
            return None;
        }
        let pick = ((u_pick * n as f64) as usize).min(n - 1);
        let pick_pdf = self.pick_probability();
        if pick == self.lights.len() {
            let env = self.environment.as_ref()?;
            let (wi, radiance, pdf) = env.sample(u)?;
            return Some(LightSample {
                wi,
                radiance,
                pdf: pdf * pick_pdf,
                distance: f64::INFINITY,
                point: Vec3f::zero(),
                normal: Vec3f::zero(),
                light: LightId::Environment,
            });
        }
        let light = &self.lights[pick];
        // reuse the pick remainder to choose the triangle
        let u_tri = (u_pick * n as f64 - pick as f64).clamp(0.0, 1.0 - f64::EPSILON);
        let (tri, p_tri, _) = light.triangles.sample_discrete(u_tri);
        let inst = &ias.instances()[light.instance as usize];
        let mesh = inst.mesh();
        let m = inst.matrix_at(time);
        let [a, b, c] = mesh.triangle(tri).map(|q| m.transform_point(q));
        let (bu, bv) = uniform_triangle(u);
        let point = a * (1.0 - bu - bv) + b * bu + c * bv;
        let cross = (b - a).cross(c - a);
        let area = 0.5 * cross.length();
        let normal = cross.try_normalize()?;
        let to_light = point - p;
        let dist2 = to_light.length_squared();
        let distance = dist2.sqrt();
        if !(distance > 0.0) || !(area > 0.0) {
            return None;
        }
        let wi = to_light / distance;
        let cos_light = normal.dot(-wi).abs();
        if cos_light == 0.0 {
            return None;
        }
        let uv = mesh.uvs().map_or(Vec2f::zero(), |uvs| {
            let [i0, i1, i2] = mesh.indices()[tri];
            uvs[i0 as usize] * (1.0 - bu - bv) + uvs[i1 as usize] * bu + uvs[i2 as usize] * bv
        });
        let radiance = light.emission.emitted_radiance(uv, normal, -wi);
        if radiance.is_zero() {
            return None;
        }
        Some(LightSample {
            wi,
            radiance,
            pdf: pick_pdf * p_tri / area * dist2 / cos_light,
            distance,
            point,
            normal,
            light: LightId::Area(pick as u32),
        })
    }

    /// Solid-angle density with which [`LightTable::sample`] would produce
    /// the direction from `from` to `point` on triangle `tri` of instance
    /// `instance`, at shutter time `time`.
    pub fn pdf_area(&self, ias: &Ias<f64>, instance: u32, tri: u32, from: Vec3f, point: Vec3f, normal: Vec3f, time: f64) -> f64 {
        let Some(light) = self.light_for_instance(instance) else {
            return 0.0;
        };
        let area = world_triangle_area(ias, instance, tri as usize, time);
        let d = point - from;
        let dist2 = d.length_squared();
        let cos = normal.dot(d).abs() / dist2.sqrt();
        if area <= 0.0 || cos == 0.0 {
            return 0.0;
        }
        self.pick_probability() * light.triangles.prob(tri as usize) / area * dist2 / cos
    }

    /// Solid-angle density of sampling direction `wi` from the environment.
    pub fn pdf_environment(&self, wi: Vec3f) -> f64 {
        match &self.environment {
            Some(env) => self.pick_probability() * env.pdf(wi),
            None => 0.0,
        }
    }
}
