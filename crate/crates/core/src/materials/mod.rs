//! Textures, the principled material component, and its BSDF.

mod bsdf;
pub mod microfacet;

use std::sync::Arc;

pub use bsdf::{eval_bsdf, sample_bsdf, BsdfParams, BsdfSample};

use crate::math::Frame;
use crate::{Rgb, Vec2f, Vec3f};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MaterialError {
    #[error("texture must be at least 1x1 (got {width}x{height})")]
    EmptyTexture { width: u32, height: u32 },
    #[error("texture has {got} pixels, expected {expected}")]
    PixelCount { expected: usize, got: usize },
    #[error("texture pixel {index} is not finite")]
    NonFinitePixel { index: usize },
    #[error("unknown texture '{0}'")]
    UnknownTexture(String),
}

/// Row-major RGBA image in linear light, sampled bilinearly with repeat
/// wrapping. Row 0 is the top of the image (v = 1).
#[derive(Clone, Debug, PartialEq)]
pub struct Texture {
    width: u32,
    height: u32,
    pixels: Vec<[f32; 4]>,
}

impl Texture {
    pub fn new(width: u32, height: u32, pixels: Vec<[f32; 4]>) -> Result<Self, MaterialError> {
        if width == 0 || height == 0 {
            return Err(MaterialError::EmptyTexture { width, height });
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(MaterialError::PixelCount {
                expected,
                got: pixels.len(),
            });
        }
        if let Some(index) = pixels.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(MaterialError::NonFinitePixel { index });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn constant(rgba: [f32; 4]) -> Self {
        Self {
            width: 1,
            height: 1,
            pixels: vec![rgba],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[f32; 4]] {
        &self.pixels
    }

    #[inline]
    pub fn texel(&self, x: u32, y: u32) -> [f32; 4] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Bilinear lookup; texel centers sit at half-integer pixel coordinates.
    pub fn lookup(&self, uv: Vec2f) -> [f64; 4] {
        let u = uv.x - uv.x.floor();
        let v = uv.y - uv.y.floor();
        let x = u * self.width as f64 - 0.5;
        let y = (1.0 - v) * self.height as f64 - 0.5;
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let wrap = |i: f64, n: u32| (i as i64).rem_euclid(n as i64) as u32;
        let (xa, xb) = (wrap(x0, self.width), wrap(x0 + 1.0, self.width));
        let (ya, yb) = (wrap(y0, self.height), wrap(y0 + 1.0, self.height));
        let (p00, p10, p01, p11) = (self.texel(xa, ya), self.texel(xb, ya), self.texel(xa, yb), self.texel(xb, yb));
        let mut out = [0.0; 4];
        for c in 0..4 {
            let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
            let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
            out[c] = top * (1.0 - fy) + bottom * fy;
        }
        out
    }

    pub fn lookup_rgb(&self, uv: Vec2f) -> Rgb {
        let [r, g, b, _] = self.lookup(uv);
        Rgb::new(r, g, b)
    }
}

/// Texture names driving material parameters. A bound texture overrides
/// the constant; scalar parameters read the red channel.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MaterialTextures {
    pub base_color: Option<String>,
    pub roughness: Option<String>,
    pub metallic: Option<String>,
    pub transmission: Option<String>,
    pub normal_map: Option<String>,
}

impl MaterialTextures {
    pub fn names(&self) -> impl Iterator<Item = &str> {
        [
            &self.base_color,
            &self.roughness,
            &self.metallic,
            &self.transmission,
            &self.normal_map,
        ]
        .into_iter()
        .flatten()
        .map(String::as_str)
    }
}

pub const DEFAULT_IOR: f64 = 1.45;

/// Principled material component. Setters clamp to the valid ranges.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipledMaterial {
    base_color: Rgb,
    roughness: f64,
    metallic: f64,
    transmission: f64,
    ior: f64,
    pub textures: MaterialTextures,
}

impl Default for PrincipledMaterial {
    fn default() -> Self {
        let p = BsdfParams::default();
        Self {
            base_color: p.base_color,
            roughness: p.roughness,
            metallic: p.metallic,
            transmission: p.transmission,
            ior: DEFAULT_IOR,
            textures: MaterialTextures::default(),
        }
    }
}

fn unit(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

impl PrincipledMaterial {
    pub fn base_color(&self) -> Rgb {
        self.base_color
    }

    pub fn roughness(&self) -> f64 {
        self.roughness
    }

    pub fn metallic(&self) -> f64 {
        self.metallic
    }

    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    pub fn ior(&self) -> f64 {
        self.ior
    }

    pub fn set_base_color(&mut self, c: Rgb) {
        self.base_color = c.map(unit);
    }

    pub fn set_roughness(&mut self, r: f64) {
        self.roughness = unit(r);
    }

    pub fn set_metallic(&mut self, m: f64) {
        self.metallic = unit(m);
    }

    pub fn set_transmission(&mut self, t: f64) {
        self.transmission = unit(t);
    }

    /// Values below 1 (or NaN) are raised to 1.
    pub fn set_ior(&mut self, ior: f64) {
        self.ior = if ior.is_nan() { 1.0 } else { ior.max(1.0) };
    }

    pub fn with_base_color(mut self, c: Rgb) -> Self {
        self.set_base_color(c);
        self
    }

    pub fn with_roughness(mut self, r: f64) -> Self {
        self.set_roughness(r);
        self
    }

    pub fn with_metallic(mut self, m: f64) -> Self {
        self.set_metallic(m);
        self
    }

    pub fn with_transmission(mut self, t: f64) -> Self {
        self.set_transmission(t);
        self
    }

    pub fn with_ior(mut self, ior: f64) -> Self {
        self.set_ior(ior);
        self
    }

    /// Binds texture names to the textures they refer to.
    pub fn resolve<F>(&self, mut lookup: F) -> Result<ShadingMaterial, MaterialError>
    where
        F: FnMut(&str) -> Option<Arc<Texture>>,
    {
        let mut get = |slot: &Option<String>| -> Result<Option<Arc<Texture>>, MaterialError> {
            match slot {
                None => Ok(None),
                Some(name) => lookup(name)
                    .map(Some)
                    .ok_or_else(|| MaterialError::UnknownTexture(name.clone())),
            }
        };
        Ok(ShadingMaterial {
            base_color_texture: get(&self.textures.base_color)?,
            roughness_texture: get(&self.textures.roughness)?,
            metallic_texture: get(&self.textures.metallic)?,
            transmission_texture: get(&self.textures.transmission)?,
            normal_map: get(&self.textures.normal_map)?,
            constants: BsdfParams {
                base_color: self.base_color,
                roughness: self.roughness,
                metallic: self.metallic,
                transmission: self.transmission,
                ior: self.ior,
            },
        })
    }
}

/// A material with its textures resolved, as stored in render snapshots.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadingMaterial {
    pub constants: BsdfParams,
    pub base_color_texture: Option<Arc<Texture>>,
    pub roughness_texture: Option<Arc<Texture>>,
    pub metallic_texture: Option<Arc<Texture>>,
    pub transmission_texture: Option<Arc<Texture>>,
    pub normal_map: Option<Arc<Texture>>,
}

impl ShadingMaterial {
    pub fn constant(params: BsdfParams) -> Self {
        Self {
            constants: params,
            base_color_texture: None,
            roughness_texture: None,
            metallic_texture: None,
            transmission_texture: None,
            normal_map: None,
        }
    }

    /// Parameters at `uv`; textured values are clamped like the setters.
    pub fn resolve_params(&self, uv: Vec2f) -> BsdfParams {
        let mut p = self.constants;
        let red = |t: &Option<Arc<Texture>>, fallback: f64| t.as_ref().map_or(fallback, |t| unit(t.lookup(uv)[0]));
        if let Some(t) = &self.base_color_texture {
            p.base_color = t.lookup_rgb(uv).map(unit);
        }
        p.roughness = red(&self.roughness_texture, p.roughness);
        p.metallic = red(&self.metallic_texture, p.metallic);
        p.transmission = red(&self.transmission_texture, p.transmission);
        p
    }

    /// Base color at `uv`, as written to the albedo layer.
    pub fn albedo(&self, uv: Vec2f) -> Rgb {
        match &self.base_color_texture {
            Some(t) => t.lookup_rgb(uv).map(unit),
            None => self.constants.base_color,
        }
    }
}

/// Result of [`apply_normal_map`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MappedFrame {
    pub frame: Frame<f64>,
    /// The map could not be applied (no texture-space tangent).
    pub fell_back: bool,
}

/// Perturbs the shading frame around `normal` with the material's normal
/// map. The tangent-space basis comes from `dpdu`; without it the
/// unperturbed frame is returned and the fallback is flagged.
pub fn apply_normal_map(material: &ShadingMaterial, normal: Vec3f, dpdu: Option<Vec3f>, uv: Vec2f) -> MappedFrame {
    let Some(map) = &material.normal_map else {
        return MappedFrame {
            frame: Frame::from_normal(normal),
            fell_back: false,
        };
    };
    let basis = dpdu.and_then(|t| Frame::from_normal_tangent(normal, t));
    let Some(basis) = basis else {
        return MappedFrame {
            frame: Frame::from_normal(normal),
            fell_back: true,
        };
    };
    let c = map.lookup_rgb(uv);
    let local = Vec3f::new(2.0 * c.x - 1.0, 2.0 * c.y - 1.0, 2.0 * c.z - 1.0);
    let mapped = local
        .try_normalize()
        .filter(|n| n.z > 0.0)
        .map(|n| basis.to_world(n));
    match mapped.and_then(|n| Frame::from_normal_tangent(n, basis.t)) {
        Some(frame) => MappedFrame { frame, fell_back: false },
        None => MappedFrame {
            frame: basis,
            fell_back: true,
        },
    }
}
