//! Per-frame domain randomization.
//!
//! Every mutation draws from one ChaCha8 stream selected by the frame
//! index, so a frame's scene depends only on the seed, the frame number and
//! the registry it starts from.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use vistrace::geometry::Mesh;
use vistrace::materials::PrincipledMaterial;
use vistrace::math::{Quat, Transform};
use vistrace::scene::{randomize_lights, ComponentKind, EntityComponents, EntityId, LightRecipe, Registry, RegistryError};
use vistrace::{Rgb, Transformf, Vec3f};

/// Entity name prefix of generated distractors.
pub const DISTRACTOR_PREFIX: &str = "distractor";
/// Entity name prefix of generated lights.
pub const LIGHT_PREFIX: &str = "random_light";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DirectiveError {
    #[error("no entity is tagged `{0}`")]
    UnknownTag(String),
    #[error("entity `{entity}` has no {kind} to randomize")]
    MissingComponent { entity: String, kind: ComponentKind },
    #[error("no texture named `{0}` for the dome list")]
    UnknownTexture(String),
    #[error("{what}: lower bound {lo} exceeds upper bound {hi}")]
    BadRange { what: String, lo: f64, hi: f64 },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Directives {
    /// Stream seed; the command-line seed takes precedence.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub poses: Vec<PoseJitter>,
    /// Constant per-frame translation, for driving motion across frames.
    #[serde(default)]
    pub motion: Vec<Motion>,
    #[serde(default)]
    pub materials: Vec<MaterialJitter>,
    #[serde(default)]
    pub distractors: Option<Distractors>,
    #[serde(default)]
    pub lights: Option<LightDirective>,
    #[serde(default)]
    pub dome: Option<Dome>,
}

/// Uniform position inside an axis-aligned box and uniform XYZ Euler
/// angles (degrees) for every entity carrying `tag`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseJitter {
    pub tag: String,
    pub aabb_min: [f64; 3],
    pub aabb_max: [f64; 3],
    #[serde(default)]
    pub euler_min_degrees: [f64; 3],
    #[serde(default)]
    pub euler_max_degrees: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Motion {
    pub tag: String,
    pub velocity: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialJitter {
    pub tag: String,
    #[serde(default)]
    pub roughness: Option<[f64; 2]>,
    #[serde(default)]
    pub metallic: Option<[f64; 2]>,
    #[serde(default)]
    pub transmission: Option<[f64; 2]>,
    #[serde(default)]
    pub base_color_min: Option<[f64; 3]>,
    #[serde(default)]
    pub base_color_max: Option<[f64; 3]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Primitive {
    Sphere,
    Cuboid,
}

/// Flying clutter: random primitives with random diffuse colors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distractors {
    pub count: [u32; 2],
    pub primitives: Vec<Primitive>,
    /// Uniform scale range applied to unit-sized primitives.
    pub scale: [f64; 2],
    pub aabb_min: [f64; 3],
    pub aabb_max: [f64; 3],
}

/// Quad lights behind the camera, re-rolled every frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightDirective {
    #[serde(default = "default_light_count")]
    pub count: [u32; 2],
    #[serde(default)]
    pub intensity: Option<[f64; 2]>,
    #[serde(default)]
    pub color_min: Option<[f64; 3]>,
    #[serde(default)]
    pub color_max: Option<[f64; 3]>,
}

fn default_light_count() -> [u32; 2] {
    [2, 6]
}

/// Environment texture picked uniformly per frame, with a random turn
/// about +z.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dome {
    pub textures: Vec<String>,
    #[serde(default)]
    pub hemisphere_only: bool,
    #[serde(default)]
    pub intensity: Option<[f64; 2]>,
}

/// What one application changed, for logging and tests.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrameMutations {
    pub poses: Vec<(EntityId, Vec3f, Quat<f64>)>,
    pub distractors: Vec<EntityId>,
    pub lights: Vec<EntityId>,
    pub dome_texture: Option<String>,
}

fn check_range(what: impl Into<String>, lo: f64, hi: f64) -> Result<(), DirectiveError> {
    if lo <= hi && lo.is_finite() && hi.is_finite() {
        Ok(())
    } else {
        Err(DirectiveError::BadRange {
            what: what.into(),
            lo,
            hi,
        })
    }
}

fn check_box(what: &str, lo: [f64; 3], hi: [f64; 3]) -> Result<(), DirectiveError> {
    (0..3).try_for_each(|i| check_range(format!("{what}[{i}]"), lo[i], hi[i]))
}

fn check_tag(reg: &Registry, tag: &str) -> Result<Vec<EntityId>, DirectiveError> {
    match reg.tagged(tag) {
        ids if ids.is_empty() => Err(DirectiveError::UnknownTag(tag.to_string())),
        ids => Ok(ids),
    }
}

impl Directives {
    /// Checks ranges and that every tag and texture exists in `reg`.
    pub fn validate(&self, reg: &Registry) -> Result<(), DirectiveError> {
        for p in &self.poses {
            check_tag(reg, &p.tag)?;
            check_box("pose aabb", p.aabb_min, p.aabb_max)?;
            check_box("pose euler", p.euler_min_degrees, p.euler_max_degrees)?;
        }
        for m in &self.motion {
            check_tag(reg, &m.tag)?;
        }
        for m in &self.materials {
            check_tag(reg, &m.tag)?;
            for (what, r) in [("roughness", m.roughness), ("metallic", m.metallic), ("transmission", m.transmission)] {
                if let Some([lo, hi]) = r {
                    check_range(what, lo, hi)?;
                    check_range(what, 0.0, lo)?;
                    check_range(what, hi, 1.0)?;
                }
            }
            match (m.base_color_min, m.base_color_max) {
                (Some(lo), Some(hi)) => check_box("base color", lo, hi)?,
                (None, None) => {}
                _ => return Err(DirectiveError::Invalid("base_color_min and base_color_max go together".into())),
            }
        }
        if let Some(d) = &self.distractors {
            check_range("distractor count", d.count[0] as f64, d.count[1] as f64)?;
            check_range("distractor scale", d.scale[0], d.scale[1])?;
            check_box("distractor aabb", d.aabb_min, d.aabb_max)?;
            if !(d.scale[0] > 0.0) {
                return Err(DirectiveError::Invalid("distractor scale must be positive".into()));
            }
            if d.primitives.is_empty() && d.count[1] > 0 {
                return Err(DirectiveError::Invalid("distractors need at least one primitive".into()));
            }
        }
        if let Some(l) = &self.lights {
            check_range("light count", l.count[0] as f64, l.count[1] as f64)?;
            if let Some([lo, hi]) = l.intensity {
                check_range("light intensity", lo, hi)?;
            }
            check_box(
                "light color",
                l.color_min.unwrap_or([0.0; 3]),
                l.color_max.unwrap_or([f64::MAX; 3]),
            )?;
        }
        if let Some(d) = &self.dome {
            if d.textures.is_empty() {
                return Err(DirectiveError::Invalid("dome needs at least one texture".into()));
            }
            for t in &d.textures {
                reg.handle(ComponentKind::Texture, t)
                    .map_err(|_| DirectiveError::UnknownTexture(t.clone()))?;
            }
            if let Some([lo, hi]) = d.intensity {
                check_range("dome intensity", lo, hi)?;
            }
        }
        Ok(())
    }

    fn light_recipe(&self, l: &LightDirective) -> LightRecipe {
        let base = LightRecipe::default();
        let v = |a: [f64; 3]| Rgb::new(a[0], a[1], a[2]);
        LightRecipe {
            count: l.count,
            intensity: l.intensity.unwrap_or(base.intensity),
            color_min: l.color_min.map_or(base.color_min, v),
            color_max: l.color_max.map_or(base.color_max, v),
            ..base
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

fn uniform3(rng: &mut ChaCha8Rng, lo: [f64; 3], hi: [f64; 3]) -> Vec3f {
    Vec3f::new(
        uniform(rng, [lo[0], hi[0]]),
        uniform(rng, [lo[1], hi[1]]),
        uniform(rng, [lo[2], hi[2]]),
    )
}

fn count(rng: &mut ChaCha8Rng, [lo, hi]: [u32; 2]) -> u32 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// The random stream for `frame`.
pub fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

fn transform_of(reg: &Registry, id: EntityId) -> Result<vistrace::scene::Handle, DirectiveError> {
    let e = reg.entity(id)?;
    e.components.transform.clone().ok_or_else(|| DirectiveError::MissingComponent {
        entity: e.name.clone(),
        kind: ComponentKind::Transform,
    })
}

/// Deletes the previous frame's generated entities named `{prefix}_*`.
fn clear_generated(reg: &mut Registry, prefix: &str) -> Result<(), DirectiveError> {
    let stem = format!("{prefix}_");
    let ids: Vec<EntityId> = reg.entities().filter(|e| e.name.starts_with(&stem)).map(|e| e.id).collect();
    for id in ids {
        reg.delete_entity_and_components(id)?;
    }
    Ok(())
}

fn spawn_distractors(reg: &mut Registry, d: &Distractors, rng: &mut ChaCha8Rng) -> Result<Vec<EntityId>, DirectiveError> {
    let n = count(rng, d.count);
    let mut ids = Vec::with_capacity(n as usize);
    for k in 0..n {
        let prim = d.primitives[rng.random_range(0..d.primitives.len())];
        let scale = uniform(rng, d.scale);
        let pos = uniform3(rng, d.aabb_min, d.aabb_max);
        let rot = Quat::from_euler_xyz(rng.random_range(0.0..TAU), rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
        let color = uniform3(rng, [0.05; 3], [0.95; 3]);
        let roughness = uniform(rng, [0.1, 1.0]);

        let (mesh_name, mesh) = match prim {
            Primitive::Sphere => (format!("{DISTRACTOR_PREFIX}_sphere"), Mesh::sphere(0.5, 24)),
            Primitive::Cuboid => (format!("{DISTRACTOR_PREFIX}_cuboid"), Mesh::cuboid(Vec3f::one())),
        };
        let mesh = match reg.handle(ComponentKind::Mesh, &mesh_name) {
            Ok(h) => h,
            Err(_) => reg.create_mesh(&mesh_name, mesh.expect("valid unit primitive"))?,
        };
        let name = format!("{DISTRACTOR_PREFIX}_{k}");
        let tf: Transformf = Transform::from_trs(pos, rot, Vec3f::splat(scale)).expect("positive scale");
        let tf = reg.create(&format!("{name}_tfm"), tf)?;
        let mat = PrincipledMaterial::default().with_base_color(color).with_roughness(roughness);
        let mat = reg.create(&format!("{name}_mat"), mat)?;
        ids.push(reg.create_entity(
            &name,
            EntityComponents {
                transform: Some(tf),
                mesh: Some(mesh),
                material: Some(mat),
                ..Default::default()
            },
        )?);
    }
    Ok(ids)
}

/// Applies the directives for `frame`. Poses and materials change in
/// place (only the current transform key moves); distractors and lights
/// from the previous application are replaced.
pub fn apply_directives(
    reg: &mut Registry,
    directives: &Directives,
    seed: u64,
    frame: u64,
) -> Result<FrameMutations, DirectiveError> {
    directives.validate(reg)?;
    let mut rng = frame_rng(seed, frame);
    let mut out = FrameMutations::default();

    for m in &directives.motion {
        for id in check_tag(reg, &m.tag)? {
            let h = transform_of(reg, id)?;
            let t = reg.get_mut::<Transformf>(&h)?;
            let v = Vec3f::new(m.velocity[0], m.velocity[1], m.velocity[2]);
            t.set_translation(t.translation() + v);
        }
    }

    for p in &directives.poses {
        for id in check_tag(reg, &p.tag)? {
            let pos = uniform3(&mut rng, p.aabb_min, p.aabb_max);
            let e = uniform3(&mut rng, p.euler_min_degrees, p.euler_max_degrees);
            let rot = Quat::from_euler_xyz(e.x.to_radians(), e.y.to_radians(), e.z.to_radians());
            let h = transform_of(reg, id)?;
            let t = reg.get_mut::<Transformf>(&h)?;
            t.set_translation(pos);
            t.set_rotation(rot);
            out.poses.push((id, pos, rot));
        }
    }

    for m in &directives.materials {
        for id in check_tag(reg, &m.tag)? {
            let e = reg.entity(id)?;
            let h = e.components.material.clone().ok_or_else(|| DirectiveError::MissingComponent {
                entity: e.name.clone(),
                kind: ComponentKind::Material,
            })?;
            let roughness = m.roughness.map(|r| uniform(&mut rng, r));
            let metallic = m.metallic.map(|r| uniform(&mut rng, r));
            let transmission = m.transmission.map(|r| uniform(&mut rng, r));
            let color = m.base_color_min.zip(m.base_color_max).map(|(lo, hi)| uniform3(&mut rng, lo, hi));
            let mat = reg.get_mut::<PrincipledMaterial>(&h)?;
            if let Some(r) = roughness {
                mat.set_roughness(r);
            }
            if let Some(x) = metallic {
                mat.set_metallic(x);
            }
            if let Some(x) = transmission {
                mat.set_transmission(x);
            }
            if let Some(c) = color {
                mat.set_base_color(c);
            }
        }
    }

    if let Some(d) = &directives.distractors {
        clear_generated(reg, DISTRACTOR_PREFIX)?;
        out.distractors = spawn_distractors(reg, d, &mut rng)?;
    }

    if let Some(l) = &directives.lights {
        clear_generated(reg, LIGHT_PREFIX)?;
        out.lights = randomize_lights(reg, LIGHT_PREFIX, &directives.light_recipe(l), &mut rng)?;
    }

    if let Some(d) = &directives.dome {
        let texture = d.textures[rng.random_range(0..d.textures.len())].clone();
        let rotation = rng.random_range(0.0..TAU);
        let mut env = reg.environment().cloned().unwrap_or_default();
        if let Some(r) = d.intensity {
            env.intensity = uniform(&mut rng, r);
        } else if reg.environment().is_none() {
            env.intensity = 1.0;
        }
        env.texture = Some(texture.clone());
        env.rotation = rotation;
        env.hemisphere_only = d.hemisphere_only;
        reg.set_environment(Some(env));
        out.dome_texture = Some(texture);
    }
    Ok(out)
}
