//! JSON scene documents.
//!
//! A document lists named components per kind plus entities binding them
//! by name. Unknown keys are an error in strict mode and a warning
//! otherwise. [`export_scene`] writes the canonical form: every component
//! inline with all fields explicit, so `export ∘ build` is a fixpoint.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::image::load_texture;
use super::IoError;
use crate::camera::Camera;
use crate::geometry::{load_obj, Mesh};
use crate::lights::Light;
use crate::materials::{PrincipledMaterial, Texture};
use crate::math::{Quat, Transform};
use crate::scene::{ComponentKind, EntityComponents, EnvironmentSettings, MeshComponent, Registry, RegistryError};
use crate::volumes::{load_volg, VolumeGrid};
use crate::{Rgb, Transformf, Vec2f, Vec3f};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("scene JSON at `{path}`: {message}")]
    Json { path: String, message: String },
    #[error("unknown scene keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("{referenced_by} references unknown {kind} `{name}`")]
    Unresolved {
        kind: &'static str,
        name: String,
        referenced_by: String,
    },
    #[error("{item}: {message}")]
    Invalid { item: String, message: String },
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("{item}: {source}")]
    File { item: String, source: IoError },
}

fn invalid(item: impl Into<String>, message: impl ToString) -> SceneError {
    SceneError::Invalid {
        item: item.into(),
        message: message.to_string(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneDocument {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub textures: Vec<TextureDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub meshes: Vec<MeshDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub materials: Vec<MaterialDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lights: Vec<LightDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub volumes: Vec<VolumeDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transforms: Vec<TransformDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cameras: Vec<CameraDesc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entities: Vec<EntityDesc>,
    /// Entity whose camera renders; defaults to the only camera entity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_camera: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<EnvironmentDesc>,
    /// Randomization directives, interpreted by the frame driver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub randomization: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub render: Option<RenderDesc>,
}

/// Exactly one source: `path` (PNG, PFM or HDR), `constant`, or inline
/// `width` × `height` `pixels` (linear RGBA, top row first).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TextureDesc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<[f32; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pixels: Option<Vec<[f32; 4]>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereDesc {
    pub radius: f64,
    #[serde(default = "default_segments")]
    pub segments: u32,
}

fn default_segments() -> u32 {
    64
}

/// Exactly one source: an OBJ `path`, a primitive (`sphere`, `cuboid`
/// full extents, `plane` width and height), or inline arrays.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeshDesc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere: Option<SphereDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cuboid: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<[u32; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normals: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uvs: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MaterialDesc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_color: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roughness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metallic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmission: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ior: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_color_texture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roughness_texture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metallic_texture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmission_texture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_map: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LightDesc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_texture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_sided: Option<bool>,
}

/// Density from a VOLG `path` or inline `dims` + `density` (x fastest).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VolumeDesc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[u32; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<f32>>,
    pub sigma_t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub albedo: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
}

/// Translation, rotation quaternion `[x, y, z, w]` and scale.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PoseDesc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<[f64; 3]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LookAtDesc {
    pub eye: [f64; 3],
    pub at: [f64; 3],
    #[serde(default = "default_up")]
    pub up: [f64; 3],
}

fn default_up() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

/// A pose, or `look_at` which replaces translation and rotation.
/// `previous` sets the shutter-open key; it defaults to the pose itself.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformDesc {
    pub name: String,
    #[serde(flatten)]
    pub pose: PoseDesc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub look_at: Option<LookAtDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub previous: Option<PoseDesc>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CameraDesc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fov_y_degrees: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aperture_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub near: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub far: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityDesc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub light: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentDesc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub texture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<f64>,
    /// Turn about +z, in degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_degrees: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hemisphere_only: Option<bool>,
}

/// Render settings; command-line flags override them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RenderDesc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spp: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Indirect radiance cap; zero or negative disables clamping.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clamp: Option<f64>,
}

/// A parsed document with the unknown keys seen in lenient mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedScene {
    pub document: SceneDocument,
    pub warnings: Vec<String>,
}

/// Formats an ignored-key path like type-error paths: `a[0].b`.
fn json_path(p: &serde_ignored::Path) -> String {
    use serde_ignored::Path;
    match p {
        Path::Root => String::new(),
        Path::Seq { parent, index } => format!("{}[{index}]", json_path(parent)),
        Path::Map { parent, key } => match json_path(parent) {
            s if s.is_empty() => key.clone(),
            s => format!("{s}.{key}"),
        },
        Path::Some { parent } | Path::NewtypeStruct { parent } | Path::NewtypeVariant { parent } => json_path(parent),
    }
}

fn deserialize_checked<'de, D, T>(de: D, strict: bool) -> Result<(T, Vec<String>), SceneError>
where
    D: serde::Deserializer<'de>,
    D::Error: std::fmt::Display,
    T: Deserialize<'de>,
{
    let mut unknown = Vec::new();
    let value: T = serde_path_to_error::deserialize(serde_ignored::Deserializer::new(de, &mut |p: serde_ignored::Path| {
        unknown.push(json_path(&p))
    }))
    .map_err(|e| SceneError::Json {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })?;
    if strict && !unknown.is_empty() {
        return Err(SceneError::UnknownKeys(unknown));
    }
    Ok((value, unknown.into_iter().map(|k| format!("ignoring unknown key `{k}`")).collect()))
}

/// Parses a scene document. Unknown keys fail in `strict` mode and become
/// warnings otherwise; type errors name the offending JSON path.
pub fn parse_scene(text: &str, strict: bool) -> Result<ParsedScene, SceneError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let (document, warnings) = deserialize_checked(&mut de, strict)?;
    de.end().map_err(|e| SceneError::Json {
        path: ".".into(),
        message: e.to_string(),
    })?;
    Ok(ParsedScene { document, warnings })
}

/// Decodes an embedded JSON value (such as the randomization block) with
/// the same strictness rules as [`parse_scene`].
pub fn parse_value<T: DeserializeOwned>(value: &serde_json::Value, strict: bool) -> Result<(T, Vec<String>), SceneError> {
    deserialize_checked(value, strict)
}

pub fn to_json(doc: &SceneDocument) -> String {
    serde_json::to_string_pretty(doc).expect("scene documents always serialize")
}

fn v3(a: [f64; 3]) -> Vec3f {
    Vec3f::new(a[0], a[1], a[2])
}

fn arr3(v: Vec3f) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn quat(a: [f64; 4]) -> Quat<f64> {
    Quat {
        x: a[0],
        y: a[1],
        z: a[2],
        w: a[3],
    }
}

fn count_some(xs: &[bool]) -> usize {
    xs.iter().filter(|&&b| b).count()
}

impl SceneDocument {
    fn names<'a>(items: impl Iterator<Item = &'a String>) -> BTreeSet<&'a str> {
        items.map(String::as_str).collect()
    }

    /// Checks every by-name reference, reporting the first unresolved one.
    pub fn check_references(&self) -> Result<(), SceneError> {
        let textures = Self::names(self.textures.iter().map(|t| &t.name));
        let sets = [
            ("transform", Self::names(self.transforms.iter().map(|t| &t.name))),
            ("mesh", Self::names(self.meshes.iter().map(|t| &t.name))),
            ("material", Self::names(self.materials.iter().map(|t| &t.name))),
            ("light", Self::names(self.lights.iter().map(|t| &t.name))),
            ("camera", Self::names(self.cameras.iter().map(|t| &t.name))),
            ("volume", Self::names(self.volumes.iter().map(|t| &t.name))),
        ];
        let check = |kind: &'static str, set: &BTreeSet<&str>, name: &Option<String>, by: String| match name {
            Some(n) if !set.contains(n.as_str()) => Err(SceneError::Unresolved {
                kind,
                name: n.clone(),
                referenced_by: by,
            }),
            _ => Ok(()),
        };
        for m in &self.materials {
            for t in [
                &m.base_color_texture,
                &m.roughness_texture,
                &m.metallic_texture,
                &m.transmission_texture,
                &m.normal_map,
            ] {
                check("texture", &textures, t, format!("material `{}`", m.name))?;
            }
        }
        for l in &self.lights {
            check("texture", &textures, &l.color_texture, format!("light `{}`", l.name))?;
        }
        if let Some(env) = &self.environment {
            check("texture", &textures, &env.texture, "environment".into())?;
        }
        for e in &self.entities {
            let by = format!("entity `{}`", e.name);
            let refs = [&e.transform, &e.mesh, &e.material, &e.light, &e.camera, &e.volume];
            for ((kind, set), r) in sets.iter().zip(refs) {
                check(kind, set, r, by.clone())?;
            }
        }
        if let Some(cam) = &self.active_camera {
            if !self.entities.iter().any(|e| &e.name == cam) {
                return Err(SceneError::Unresolved {
                    kind: "entity",
                    name: cam.clone(),
                    referenced_by: "active_camera".into(),
                });
            }
        }
        Ok(())
    }

    /// Constructs a registry. Relative file paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<Registry, SceneError> {
        self.check_references()?;
        let resolve = |p: &str| -> PathBuf { base_dir.join(p) };
        let mut reg = Registry::new();

        for t in &self.textures {
            let item = format!("texture `{}`", t.name);
            let shape = [t.path.is_some(), t.constant.is_some(), t.pixels.is_some()];
            let tex = match (count_some(&shape), &t.path, t.constant, &t.pixels) {
                (1, Some(p), _, _) => load_texture(resolve(p)).map_err(|source| SceneError::File { item, source })?,
                (1, _, Some(c), _) => Texture::constant(c),
                (1, _, _, Some(px)) => {
                    let (Some(w), Some(h)) = (t.width, t.height) else {
                        return Err(invalid(item, "inline pixels need width and height"));
                    };
                    Texture::new(w, h, px.clone()).map_err(|e| invalid(item, e))?
                }
                _ => return Err(invalid(item, "needs exactly one of path, constant, pixels")),
            };
            reg.create(&t.name, tex)?;
        }

        for m in &self.meshes {
            let item = format!("mesh `{}`", m.name);
            let shape = [
                m.path.is_some(),
                m.sphere.is_some(),
                m.cuboid.is_some(),
                m.plane.is_some(),
                m.positions.is_some(),
            ];
            if count_some(&shape) != 1 {
                return Err(invalid(item, "needs exactly one of path, sphere, cuboid, plane, positions"));
            }
            let mesh = if let Some(p) = &m.path {
                load_obj(resolve(p)).map(|o| o.mesh)
            } else if let Some(s) = m.sphere {
                Mesh::sphere(s.radius, s.segments)
            } else if let Some(c) = m.cuboid {
                Mesh::cuboid(v3(c))
            } else if let Some([w, h]) = m.plane {
                Mesh::plane(w, h)
            } else {
                let positions = m.positions.as_ref().expect("checked").iter().map(|&p| v3(p)).collect();
                let Some(indices) = &m.indices else {
                    return Err(invalid(item, "inline positions need indices"));
                };
                Mesh::from_arrays(
                    positions,
                    indices.clone(),
                    m.normals.as_ref().map(|n| n.iter().map(|&p| v3(p)).collect()),
                    m.uvs.as_ref().map(|u| u.iter().map(|&[a, b]| Vec2f::new(a, b)).collect()),
                )
            }
            .map_err(|e| invalid(&item, e))?;
            reg.create_mesh(&m.name, mesh)?;
        }

        for m in &self.materials {
            let mut mat = PrincipledMaterial::default();
            if let Some(c) = m.base_color {
                mat.set_base_color(v3(c));
            }
            if let Some(r) = m.roughness {
                mat.set_roughness(r);
            }
            if let Some(x) = m.metallic {
                mat.set_metallic(x);
            }
            if let Some(x) = m.transmission {
                mat.set_transmission(x);
            }
            if let Some(x) = m.ior {
                mat.set_ior(x);
            }
            mat.textures.base_color = m.base_color_texture.clone();
            mat.textures.roughness = m.roughness_texture.clone();
            mat.textures.metallic = m.metallic_texture.clone();
            mat.textures.transmission = m.transmission_texture.clone();
            mat.textures.normal_map = m.normal_map.clone();
            reg.create(&m.name, mat)?;
        }

        for l in &self.lights {
            let mut light = Light::default();
            if let Some(i) = l.intensity {
                light.set_intensity(i);
            }
            if let Some(c) = l.color {
                light.set_color(v3(c));
            }
            light.color_texture = l.color_texture.clone();
            light.two_sided = l.two_sided.unwrap_or(false);
            reg.create(&l.name, light)?;
        }

        for v in &self.volumes {
            let item = format!("volume `{}`", v.name);
            let albedo = v.albedo.map_or(Rgb::one(), v3);
            let g = v.g.unwrap_or(0.0);
            let grid = match (&v.path, v.dims, &v.density) {
                (Some(p), None, None) => {
                    let (dims, density) = load_volg(&resolve(p)).map_err(|e| invalid(&item, e))?;
                    VolumeGrid::from_array(dims, density, v.sigma_t, albedo, g)
                }
                (None, Some(dims), Some(d)) => VolumeGrid::from_array(dims, d.clone(), v.sigma_t, albedo, g),
                _ => return Err(invalid(item, "needs either path or dims + density")),
            }
            .map_err(|e| invalid(&item, e))?;
            reg.create(&v.name, grid)?;
        }

        for t in &self.transforms {
            let item = format!("transform `{}`", t.name);
            reg.create(&t.name, transform_from_desc(t).map_err(|m| invalid(item, m))?)?;
        }

        for c in &self.cameras {
            let item = format!("camera `{}`", c.name);
            let mut cam = Camera::default();
            let r: Result<(), crate::camera::CameraError> = (|| {
                if let Some(f) = c.fov_y_degrees {
                    cam.set_field_of_view_y(f.to_radians())?;
                }
                if let Some(a) = c.aperture_radius {
                    cam.set_aperture_radius(a)?;
                }
                if let Some(d) = c.focus_distance {
                    cam.set_focus_distance(d)?;
                }
                if c.near.is_some() || c.far.is_some() {
                    cam.set_clip(c.near.unwrap_or(cam.near()), c.far.unwrap_or(cam.far()))?;
                }
                Ok(())
            })();
            r.map_err(|e| invalid(item, e))?;
            reg.create(&c.name, cam)?;
        }

        let mut camera_entities = Vec::new();
        for e in &self.entities {
            let h = |kind, name: &Option<String>| name.as_ref().map(|n| reg.handle(kind, n)).transpose();
            let components = EntityComponents {
                transform: h(ComponentKind::Transform, &e.transform)?,
                mesh: h(ComponentKind::Mesh, &e.mesh)?,
                material: h(ComponentKind::Material, &e.material)?,
                light: h(ComponentKind::Light, &e.light)?,
                camera: h(ComponentKind::Camera, &e.camera)?,
                volume: h(ComponentKind::Volume, &e.volume)?,
            };
            let id = reg.create_entity(&e.name, components)?;
            if !e.tags.is_empty() {
                reg.set_tags(id, e.tags.clone())?;
            }
            if e.camera.is_some() {
                camera_entities.push(id);
            }
        }
        match &self.active_camera {
            Some(name) => reg.set_camera_entity(reg.entity_id(name)?)?,
            None if camera_entities.len() == 1 => reg.set_camera_entity(camera_entities[0])?,
            None => {}
        }

        if let Some(env) = &self.environment {
            reg.set_environment(Some(EnvironmentSettings {
                color: env.color.map_or(Rgb::zero(), v3),
                texture: env.texture.clone(),
                intensity: env.intensity.unwrap_or(1.0),
                rotation: env.rotation_degrees.unwrap_or(0.0).to_radians(),
                hemisphere_only: env.hemisphere_only.unwrap_or(false),
            }));
        }
        Ok(reg)
    }
}

fn pose_parts(p: &PoseDesc, base: (Vec3f, Quat<f64>, Vec3f)) -> (Vec3f, Quat<f64>, Vec3f) {
    (
        p.translation.map_or(base.0, v3),
        p.rotation.map_or(base.1, quat),
        p.scale.map_or(base.2, v3),
    )
}

fn transform_from_desc(t: &TransformDesc) -> Result<Transformf, String> {
    let (mut tr, mut rot, scale) = pose_parts(&t.pose, (Vec3f::zero(), Quat::identity(), Vec3f::one()));
    if let Some(la) = t.look_at {
        if t.pose.translation.is_some() || t.pose.rotation.is_some() {
            return Err("look_at replaces translation and rotation; give only one".into());
        }
        rot = crate::math::look_at_rotation(v3(la.eye), v3(la.at), v3(la.up)).map_err(|e| e.to_string())?;
        tr = v3(la.eye);
    }
    let mut out = Transform::from_trs(tr, rot, scale).map_err(|e| e.to_string())?;
    if let Some(prev) = &t.previous {
        let (pt, pr, ps) = pose_parts(prev, (tr, rot, scale));
        out.set_previous(pt, pr, ps).map_err(|e| e.to_string())?;
    }
    Ok(out)
}

fn pose_desc(t: Vec3f, r: Quat<f64>, s: Vec3f) -> PoseDesc {
    PoseDesc {
        translation: Some(arr3(t)),
        rotation: Some([r.x, r.y, r.z, r.w]),
        scale: Some(arr3(s)),
    }
}

/// Canonical document for the registry's current state. Render settings
/// and randomization directives are not part of the registry and are left
/// empty for the caller to fill in.
pub fn export_scene(reg: &Registry) -> SceneDocument {
    let mut doc = SceneDocument::default();
    for name in reg.names(ComponentKind::Texture) {
        let t = reg.get_by_name::<Texture>(&name).expect("listed");
        doc.textures.push(TextureDesc {
            name,
            width: Some(t.width()),
            height: Some(t.height()),
            pixels: Some(t.pixels().to_vec()),
            ..Default::default()
        });
    }
    for name in reg.names(ComponentKind::Mesh) {
        let m = reg.get_by_name::<MeshComponent>(&name).expect("listed").mesh();
        doc.meshes.push(MeshDesc {
            name,
            positions: Some(m.positions().iter().map(|&p| arr3(p)).collect()),
            indices: Some(m.indices().to_vec()),
            normals: Some(m.normals().iter().map(|&n| arr3(n)).collect()),
            uvs: m.uvs().map(|u| u.iter().map(|p| [p.x, p.y]).collect()),
            ..Default::default()
        });
    }
    for name in reg.names(ComponentKind::Material) {
        let m = reg.get_by_name::<PrincipledMaterial>(&name).expect("listed");
        doc.materials.push(MaterialDesc {
            base_color: Some(arr3(m.base_color())),
            roughness: Some(m.roughness()),
            metallic: Some(m.metallic()),
            transmission: Some(m.transmission()),
            ior: Some(m.ior()),
            base_color_texture: m.textures.base_color.clone(),
            roughness_texture: m.textures.roughness.clone(),
            metallic_texture: m.textures.metallic.clone(),
            transmission_texture: m.textures.transmission.clone(),
            normal_map: m.textures.normal_map.clone(),
            name,
        });
    }
    for name in reg.names(ComponentKind::Light) {
        let l = reg.get_by_name::<Light>(&name).expect("listed");
        doc.lights.push(LightDesc {
            intensity: Some(l.intensity()),
            color: Some(arr3(l.color())),
            color_texture: l.color_texture.clone(),
            two_sided: Some(l.two_sided),
            name,
        });
    }
    for name in reg.names(ComponentKind::Volume) {
        let v = reg.get_by_name::<VolumeGrid>(&name).expect("listed");
        doc.volumes.push(VolumeDesc {
            dims: Some(v.dims()),
            density: Some(v.densities().to_vec()),
            sigma_t: v.sigma_t(),
            albedo: Some(arr3(v.albedo())),
            g: Some(v.g()),
            path: None,
            name,
        });
    }
    for name in reg.names(ComponentKind::Transform) {
        let t = reg.get_by_name::<Transformf>(&name).expect("listed");
        doc.transforms.push(TransformDesc {
            pose: pose_desc(t.translation(), t.rotation(), t.scale()),
            look_at: None,
            previous: (!t.is_static()).then(|| pose_desc(t.prev_translation(), t.prev_rotation(), t.prev_scale())),
            name,
        });
    }
    for name in reg.names(ComponentKind::Camera) {
        let c = reg.get_by_name::<Camera>(&name).expect("listed");
        doc.cameras.push(CameraDesc {
            fov_y_degrees: Some(c.field_of_view_y().to_degrees()),
            aperture_radius: Some(c.aperture_radius()),
            focus_distance: Some(c.focus_distance()),
            near: Some(c.near()),
            far: Some(c.far()),
            name,
        });
    }
    for e in reg.entities() {
        let n = |kind| e.components.get(kind).map(|h| h.name.clone());
        doc.entities.push(EntityDesc {
            name: e.name.clone(),
            transform: n(ComponentKind::Transform),
            mesh: n(ComponentKind::Mesh),
            material: n(ComponentKind::Material),
            light: n(ComponentKind::Light),
            camera: n(ComponentKind::Camera),
            volume: n(ComponentKind::Volume),
            tags: e.tags.clone(),
        });
    }
    doc.active_camera = reg
        .camera_entity()
        .and_then(|id| reg.entity(id).ok())
        .map(|e| e.name.clone());
    doc.environment = reg.environment().map(|s| EnvironmentDesc {
        color: Some(arr3(s.color)),
        texture: s.texture.clone(),
        intensity: Some(s.intensity),
        rotation_degrees: Some(s.rotation.to_degrees()),
        hemisphere_only: Some(s.hemisphere_only),
    });
    doc
}
