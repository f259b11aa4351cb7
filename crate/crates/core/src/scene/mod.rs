//! Entity-component scene registry and immutable render snapshots.
//!
//! Components live in per-kind namespaces and are addressed by handles.
//! Entities bind at most one component of each kind; an entity is rendered
//! when its bindings form a drawable set (see [`RenderSnapshot`]).

mod randomize;
mod snapshot;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

pub use randomize::{randomize_lights, LightRecipe};
pub use snapshot::{CameraState, InstanceShading, RenderSnapshot, VolumeInstance};

use crate::camera::Camera;
use crate::geometry::{Blas, GeometryError, Mesh};
use crate::lights::{Environment, Light};
use crate::materials::{MaterialError, PrincipledMaterial, Texture};
use crate::volumes::VolumeGrid;
use crate::{Blasf, Meshf, Rgb, Transformf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentKind {
    Transform,
    Mesh,
    Material,
    Light,
    Camera,
    Volume,
    Texture,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 7] = [
        ComponentKind::Transform,
        ComponentKind::Mesh,
        ComponentKind::Material,
        ComponentKind::Light,
        ComponentKind::Camera,
        ComponentKind::Volume,
        ComponentKind::Texture,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Transform => "transform",
            ComponentKind::Mesh => "mesh",
            ComponentKind::Material => "material",
            ComponentKind::Light => "light",
            ComponentKind::Camera => "camera",
            ComponentKind::Volume => "volume",
            ComponentKind::Texture => "texture",
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegistryError {
    #[error("{kind} named '{name}' already exists")]
    DuplicateComponent { kind: ComponentKind, name: String },
    #[error("entity named '{0}' already exists")]
    DuplicateEntity(String),
    #[error("no {kind} named '{name}'")]
    UnknownComponent { kind: ComponentKind, name: String },
    #[error("handle to {kind} '{name}' refers to a deleted component")]
    StaleHandle { kind: ComponentKind, name: String },
    #[error("expected a {expected} handle, got a {got} handle")]
    WrongKind { expected: ComponentKind, got: ComponentKind },
    #[error("no entity {0}")]
    UnknownEntity(String),
    #[error("entity '{0}' cannot hold both a mesh and a volume")]
    MeshVolumeConflict(String),
    #[error("{kind} '{name}' is still used by '{user}'")]
    InUse { kind: ComponentKind, name: String, user: String },
    #[error("textures cannot be bound to entities")]
    TextureBinding,
    #[error("no active camera entity")]
    NoActiveCamera,
    #[error("camera entity '{0}' needs both a camera and a transform")]
    IncompleteCamera(String),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Reference to a component: kind, name, and the component's creation
/// serial. `generation` records the mutation count when the handle was
/// issued; the live count is [`Registry::generation`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Handle {
    pub kind: ComponentKind,
    pub name: String,
    pub generation: u64,
    serial: u64,
}

/// Mesh component: geometry with its prebuilt BLAS.
#[derive(Clone, Debug)]
pub struct MeshComponent {
    blas: Arc<Blasf>,
}

impl MeshComponent {
    pub fn new(mesh: Meshf) -> Result<Self, GeometryError> {
        Ok(Self {
            blas: Arc::new(Blas::build(Arc::new(mesh))?),
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh<f64>> {
        self.blas.mesh()
    }

    pub fn blas(&self) -> &Arc<Blasf> {
        &self.blas
    }
}

/// Dome light settings; `texture` names a lat-long texture component and
/// overrides `color` when set.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentSettings {
    pub color: Rgb,
    pub texture: Option<String>,
    pub intensity: f64,
    pub rotation: f64,
    pub hemisphere_only: bool,
}

impl Default for EnvironmentSettings {
    fn default() -> Self {
        Self {
            color: Rgb::zero(),
            texture: None,
            intensity: 1.0,
            rotation: 0.0,
            hemisphere_only: false,
        }
    }
}

#[derive(Clone, Debug)]
struct Slot<T> {
    serial: u64,
    generation: u64,
    value: Arc<T>,
}

/// Name-keyed storage for one component kind.
#[derive(Clone, Debug)]
pub struct Store<T> {
    slots: BTreeMap<String, Slot<T>>,
}

impl<T> Default for Store<T> {
    fn default() -> Self {
        Self { slots: BTreeMap::new() }
    }
}

/// Types that can be stored as registry components.
pub trait Component: Clone + Sized {
    const KIND: ComponentKind;
    fn store(r: &Registry) -> &Store<Self>;
    fn store_mut(r: &mut Registry) -> &mut Store<Self>;
}

macro_rules! component {
    ($ty:ty, $kind:ident, $field:ident) => {
        impl Component for $ty {
            const KIND: ComponentKind = ComponentKind::$kind;
            fn store(r: &Registry) -> &Store<Self> {
                &r.$field
            }
            fn store_mut(r: &mut Registry) -> &mut Store<Self> {
                &mut r.$field
            }
        }
    };
}

component!(Transformf, Transform, transforms);
component!(MeshComponent, Mesh, meshes);
component!(PrincipledMaterial, Material, materials);
component!(Light, Light, lights);
component!(Camera, Camera, cameras);
component!(VolumeGrid, Volume, volumes);
component!(Texture, Texture, textures);

/// Dense entity identifier, never reused.
pub type EntityId = u32;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EntityComponents {
    pub transform: Option<Handle>,
    pub mesh: Option<Handle>,
    pub material: Option<Handle>,
    pub light: Option<Handle>,
    pub camera: Option<Handle>,
    pub volume: Option<Handle>,
}

impl EntityComponents {
    pub fn get(&self, kind: ComponentKind) -> Option<&Handle> {
        match kind {
            ComponentKind::Transform => self.transform.as_ref(),
            ComponentKind::Mesh => self.mesh.as_ref(),
            ComponentKind::Material => self.material.as_ref(),
            ComponentKind::Light => self.light.as_ref(),
            ComponentKind::Camera => self.camera.as_ref(),
            ComponentKind::Volume => self.volume.as_ref(),
            ComponentKind::Texture => None,
        }
    }

    fn slot(&mut self, kind: ComponentKind) -> Result<&mut Option<Handle>, RegistryError> {
        Ok(match kind {
            ComponentKind::Transform => &mut self.transform,
            ComponentKind::Mesh => &mut self.mesh,
            ComponentKind::Material => &mut self.material,
            ComponentKind::Light => &mut self.light,
            ComponentKind::Camera => &mut self.camera,
            ComponentKind::Volume => &mut self.volume,
            ComponentKind::Texture => return Err(RegistryError::TextureBinding),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = &Handle> {
        [&self.transform, &self.mesh, &self.material, &self.light, &self.camera, &self.volume]
            .into_iter()
            .flatten()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entity {
    pub name: String,
    pub id: EntityId,
    pub components: EntityComponents,
    /// Free-form labels that randomization directives select on.
    pub tags: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct Registry {
    transforms: Store<Transformf>,
    meshes: Store<MeshComponent>,
    materials: Store<PrincipledMaterial>,
    lights: Store<Light>,
    cameras: Store<Camera>,
    volumes: Store<VolumeGrid>,
    textures: Store<Texture>,
    entities: Vec<Option<Entity>>,
    entity_names: HashMap<String, EntityId>,
    next_serial: u64,
    active_camera: Option<EntityId>,
    environment: Option<EnvironmentSettings>,
    environment_generation: u64,
    snapshot_sequence: u64,
    environment_cache: Option<(EnvironmentKey, Arc<Environment>)>,
}

#[derive(Clone, Debug, PartialEq)]
struct EnvironmentKey {
    settings: EnvironmentSettings,
    texture: Option<(u64, u64)>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a component under a name unique within its kind.
    pub fn create<T: Component>(&mut self, name: &str, value: T) -> Result<Handle, RegistryError> {
        let serial = self.next_serial;
        let store = T::store_mut(self);
        if store.slots.contains_key(name) {
            return Err(RegistryError::DuplicateComponent {
                kind: T::KIND,
                name: name.to_string(),
            });
        }
        store.slots.insert(
            name.to_string(),
            Slot {
                serial,
                generation: 0,
                value: Arc::new(value),
            },
        );
        self.next_serial += 1;
        Ok(Handle {
            kind: T::KIND,
            name: name.to_string(),
            generation: 0,
            serial,
        })
    }

    /// Convenience for meshes: builds the BLAS.
    pub fn create_mesh(&mut self, name: &str, mesh: Meshf) -> Result<Handle, RegistryError> {
        let m = MeshComponent::new(mesh)?;
        self.create(name, m)
    }

    fn slot_info(&self, kind: ComponentKind, name: &str) -> Option<(u64, u64)> {
        fn info<T>(s: &Store<T>, name: &str) -> Option<(u64, u64)> {
            s.slots.get(name).map(|s| (s.serial, s.generation))
        }
        match kind {
            ComponentKind::Transform => info(&self.transforms, name),
            ComponentKind::Mesh => info(&self.meshes, name),
            ComponentKind::Material => info(&self.materials, name),
            ComponentKind::Light => info(&self.lights, name),
            ComponentKind::Camera => info(&self.cameras, name),
            ComponentKind::Volume => info(&self.volumes, name),
            ComponentKind::Texture => info(&self.textures, name),
        }
    }

    /// Looks up a live component by kind and name.
    pub fn handle(&self, kind: ComponentKind, name: &str) -> Result<Handle, RegistryError> {
        let (serial, generation) = self.slot_info(kind, name).ok_or_else(|| RegistryError::UnknownComponent {
            kind,
            name: name.to_string(),
        })?;
        Ok(Handle {
            kind,
            name: name.to_string(),
            generation,
            serial,
        })
    }

    /// Errors if the handle no longer refers to a live component.
    pub fn check(&self, h: &Handle) -> Result<(), RegistryError> {
        match self.slot_info(h.kind, &h.name) {
            Some((serial, _)) if serial == h.serial => Ok(()),
            _ => Err(RegistryError::StaleHandle {
                kind: h.kind,
                name: h.name.clone(),
            }),
        }
    }

    /// Current mutation count of the component.
    pub fn generation(&self, h: &Handle) -> Result<u64, RegistryError> {
        self.check(h)?;
        Ok(self.slot_info(h.kind, &h.name).map(|(_, g)| g).unwrap_or(0))
    }

    fn slot<T: Component>(&self, h: &Handle) -> Result<&Slot<T>, RegistryError> {
        if h.kind != T::KIND {
            return Err(RegistryError::WrongKind {
                expected: T::KIND,
                got: h.kind,
            });
        }
        match T::store(self).slots.get(&h.name) {
            Some(s) if s.serial == h.serial => Ok(s),
            _ => Err(RegistryError::StaleHandle {
                kind: h.kind,
                name: h.name.clone(),
            }),
        }
    }

    pub fn get<T: Component>(&self, h: &Handle) -> Result<&T, RegistryError> {
        Ok(&self.slot::<T>(h)?.value)
    }

    pub(crate) fn get_arc<T: Component>(&self, h: &Handle) -> Result<Arc<T>, RegistryError> {
        Ok(self.slot::<T>(h)?.value.clone())
    }

    /// Mutable access; bumps the generation. Snapshots holding the old value
    /// keep it (copy on write).
    pub fn get_mut<T: Component>(&mut self, h: &Handle) -> Result<&mut T, RegistryError> {
        self.slot::<T>(h)?;
        let slot = T::store_mut(self).slots.get_mut(&h.name).expect("checked above");
        slot.generation += 1;
        Ok(Arc::make_mut(&mut slot.value))
    }

    pub fn get_by_name<T: Component>(&self, name: &str) -> Result<&T, RegistryError> {
        let h = self.handle(T::KIND, name)?;
        self.get(&h)
    }

    pub fn names(&self, kind: ComponentKind) -> Vec<String> {
        fn keys<T>(s: &Store<T>) -> Vec<String> {
            s.slots.keys().cloned().collect()
        }
        match kind {
            ComponentKind::Transform => keys(&self.transforms),
            ComponentKind::Mesh => keys(&self.meshes),
            ComponentKind::Material => keys(&self.materials),
            ComponentKind::Light => keys(&self.lights),
            ComponentKind::Camera => keys(&self.cameras),
            ComponentKind::Volume => keys(&self.volumes),
            ComponentKind::Texture => keys(&self.textures),
        }
    }

    fn users_of(&self, h: &Handle) -> Option<String> {
        if h.kind == ComponentKind::Texture {
            for (name, m) in &self.materials.slots {
                if m.value.textures.names().any(|n| n == h.name) {
                    return Some(format!("material '{name}'"));
                }
            }
            for (name, l) in &self.lights.slots {
                if l.value.color_texture.as_deref() == Some(&h.name) {
                    return Some(format!("light '{name}'"));
                }
            }
            if let Some(env) = &self.environment {
                if env.texture.as_deref() == Some(&h.name) {
                    return Some("environment".to_string());
                }
            }
            return None;
        }
        self.entities
            .iter()
            .flatten()
            .find(|e| e.components.get(h.kind).is_some_and(|b| b.name == h.name))
            .map(|e| format!("entity '{}'", e.name))
    }

    /// Removes a component that nothing refers to.
    pub fn delete(&mut self, h: &Handle) -> Result<(), RegistryError> {
        self.check(h)?;
        if let Some(user) = self.users_of(h) {
            return Err(RegistryError::InUse {
                kind: h.kind,
                name: h.name.clone(),
                user,
            });
        }
        fn remove<T>(s: &mut Store<T>, name: &str) {
            s.slots.remove(name);
        }
        match h.kind {
            ComponentKind::Transform => remove(&mut self.transforms, &h.name),
            ComponentKind::Mesh => remove(&mut self.meshes, &h.name),
            ComponentKind::Material => remove(&mut self.materials, &h.name),
            ComponentKind::Light => remove(&mut self.lights, &h.name),
            ComponentKind::Camera => remove(&mut self.cameras, &h.name),
            ComponentKind::Volume => remove(&mut self.volumes, &h.name),
            ComponentKind::Texture => remove(&mut self.textures, &h.name),
        }
        Ok(())
    }

    fn validate_bindings(&self, name: &str, c: &EntityComponents) -> Result<(), RegistryError> {
        for kind in ComponentKind::ALL {
            if let Some(h) = c.get(kind) {
                if h.kind != kind {
                    return Err(RegistryError::WrongKind { expected: kind, got: h.kind });
                }
                self.check(h)?;
            }
        }
        if c.mesh.is_some() && c.volume.is_some() {
            return Err(RegistryError::MeshVolumeConflict(name.to_string()));
        }
        Ok(())
    }

    /// Registers an entity; ids are assigned densely in creation order.
    pub fn create_entity(&mut self, name: &str, components: EntityComponents) -> Result<EntityId, RegistryError> {
        if self.entity_names.contains_key(name) {
            return Err(RegistryError::DuplicateEntity(name.to_string()));
        }
        self.validate_bindings(name, &components)?;
        let id = self.entities.len() as EntityId;
        self.entities.push(Some(Entity {
            name: name.to_string(),
            id,
            components,
            tags: Vec::new(),
        }));
        self.entity_names.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn entity(&self, id: EntityId) -> Result<&Entity, RegistryError> {
        self.entities
            .get(id as usize)
            .and_then(|e| e.as_ref())
            .ok_or_else(|| RegistryError::UnknownEntity(id.to_string()))
    }

    pub fn entity_id(&self, name: &str) -> Result<EntityId, RegistryError> {
        self.entity_names
            .get(name)
            .copied()
            .ok_or_else(|| RegistryError::UnknownEntity(name.to_string()))
    }

    /// Replaces the entity's tags, sorted and deduplicated.
    pub fn set_tags(&mut self, id: EntityId, mut tags: Vec<String>) -> Result<(), RegistryError> {
        tags.sort();
        tags.dedup();
        self.entity(id)?;
        self.entities[id as usize].as_mut().expect("live").tags = tags;
        Ok(())
    }

    /// Ids of live entities carrying `tag`, in id order.
    pub fn tagged(&self, tag: &str) -> Vec<EntityId> {
        self.entities().filter(|e| e.tags.iter().any(|t| t == tag)).map(|e| e.id).collect()
    }

    /// Live entities in id order.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.iter().flatten()
    }

    /// Binds `handle` in its kind's slot, replacing any previous binding.
    pub fn attach(&mut self, id: EntityId, handle: Handle) -> Result<(), RegistryError> {
        let entity = self.entity(id)?;
        let name = entity.name.clone();
        let mut components = entity.components.clone();
        let kind = handle.kind;
        *components.slot(kind)? = Some(handle);
        self.validate_bindings(&name, &components)?;
        self.entities[id as usize].as_mut().expect("live").components = components;
        Ok(())
    }

    pub fn detach(&mut self, id: EntityId, kind: ComponentKind) -> Result<Option<Handle>, RegistryError> {
        self.entity(id)?;
        let e = self.entities[id as usize].as_mut().expect("live");
        Ok(e.components.slot(kind)?.take())
    }

    /// Removes the entity. Its id is not reused; its components remain.
    pub fn delete_entity(&mut self, id: EntityId) -> Result<Entity, RegistryError> {
        self.entity(id)?;
        let e = self.entities[id as usize].take().expect("live");
        self.entity_names.remove(&e.name);
        if self.active_camera == Some(id) {
            self.active_camera = None;
        }
        Ok(e)
    }

    /// Removes the entity and every component it bound that no other
    /// entity still uses.
    pub fn delete_entity_and_components(&mut self, id: EntityId) -> Result<(), RegistryError> {
        let e = self.delete_entity(id)?;
        for h in e.components.iter() {
            if self.users_of(h).is_none() {
                self.delete(h)?;
            }
        }
        Ok(())
    }

    /// Designates the entity whose camera renders the scene.
    pub fn set_camera_entity(&mut self, id: EntityId) -> Result<(), RegistryError> {
        let e = self.entity(id)?;
        if e.components.camera.is_none() || e.components.transform.is_none() {
            return Err(RegistryError::IncompleteCamera(e.name.clone()));
        }
        self.active_camera = Some(id);
        Ok(())
    }

    pub fn camera_entity(&self) -> Option<EntityId> {
        self.active_camera
    }

    pub fn set_environment(&mut self, env: Option<EnvironmentSettings>) {
        self.environment = env;
        self.environment_generation += 1;
    }

    pub fn environment(&self) -> Option<&EnvironmentSettings> {
        self.environment.as_ref()
    }

    /// Moves every transform's current pose into its previous-pose key, so
    /// the next snapshot starts a new shutter interval.
    pub fn commit_motion(&mut self) {
        for slot in self.transforms.slots.values_mut() {
            if !slot.value.is_static() {
                Arc::make_mut(&mut slot.value).commit_motion();
                slot.generation += 1;
            }
        }
    }

    /// Number of snapshots taken so far.
    pub fn snapshot_sequence(&self) -> u64 {
        self.snapshot_sequence
    }

    fn resolved_environment(&mut self) -> Result<Option<Arc<Environment>>, RegistryError> {
        let Some(settings) = self.environment.clone() else {
            return Ok(None);
        };
        let texture = match &settings.texture {
            Some(name) => {
                let h = self.handle(ComponentKind::Texture, name)?;
                Some((h.serial, h.generation))
            }
            None => None,
        };
        let key = EnvironmentKey {
            settings: settings.clone(),
            texture,
        };
        if let Some((k, env)) = &self.environment_cache {
            if *k == key {
                return Ok(Some(env.clone()));
            }
        }
        let source = match &settings.texture {
            Some(name) => {
                let h = self.handle(ComponentKind::Texture, name)?;
                crate::lights::EnvironmentSource::Map(self.get_arc::<Texture>(&h)?)
            }
            None => crate::lights::EnvironmentSource::Constant(settings.color),
        };
        let env = Arc::new(Environment::new(
            source,
            settings.intensity,
            settings.rotation,
            settings.hemisphere_only,
        ));
        self.environment_cache = Some((key, env.clone()));
        Ok(Some(env))
    }

    /// Flattens the current state into an immutable snapshot.
    pub fn take_snapshot(&mut self) -> Result<RenderSnapshot, RegistryError> {
        let environment = self.resolved_environment()?;
        let snap = snapshot::build(self, self.snapshot_sequence + 1, environment)?;
        self.snapshot_sequence += 1;
        Ok(snap)
    }

    pub(crate) fn texture_lookup(&self) -> impl Fn(&str) -> Option<Arc<Texture>> + '_ {
        move |name| {
            let h = self.handle(ComponentKind::Texture, name).ok()?;
            self.get_arc::<Texture>(&h).ok()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Transform;
    use crate::Vec3f;

    fn sphere_scene() -> (Registry, EntityId) {
        let mut r = Registry::new();
        let cam = r.create("camera", Camera::default()).unwrap();
        let mut t = Transform::identity();
        t.look_at(Vec3f::splat(3.0), Vec3f::zero(), Vec3f::unit_z()).unwrap();
        let ct = r.create("camera_tfm", t).unwrap();
        let c = r
            .create_entity(
                "camera",
                EntityComponents {
                    camera: Some(cam),
                    transform: Some(ct),
                    ..Default::default()
                },
            )
            .unwrap();
        r.set_camera_entity(c).unwrap();
        let tf = r.create("o_tfm", Transform::identity()).unwrap();
        let mesh = r.create_mesh("o_mesh", Mesh::sphere(1.0, 16).unwrap()).unwrap();
        let mat = r.create("o_mat", PrincipledMaterial::default()).unwrap();
        let obj = r
            .create_entity(
                "obj",
                EntityComponents {
                    transform: Some(tf),
                    mesh: Some(mesh),
                    material: Some(mat),
                    ..Default::default()
                },
            )
            .unwrap();
        (r, obj)
    }

    #[test]
    fn entity_ids_follow_creation_order() {
        let (r, obj) = sphere_scene();
        assert_eq!(obj, 1);
        assert_eq!(r.entity(obj).unwrap().name, "obj");
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let (mut r, _) = sphere_scene();
        assert_eq!(
            r.create_entity("obj", EntityComponents::default()),
            Err(RegistryError::DuplicateEntity("obj".into()))
        );
        assert!(matches!(
            r.create("o_mat", PrincipledMaterial::default()),
            Err(RegistryError::DuplicateComponent { .. })
        ));
        // namespaces are per kind
        r.create("o_mat", Light::default()).unwrap();
    }

    #[test]
    fn lookups_are_namespaced() {
        let (r, _) = sphere_scene();
        let h = r.handle(ComponentKind::Material, "o_mat").unwrap();
        assert!(r.get::<PrincipledMaterial>(&h).is_ok());
        assert!(matches!(
            r.handle(ComponentKind::Material, "nope"),
            Err(RegistryError::UnknownComponent { .. })
        ));
        assert!(r.handle(ComponentKind::Mesh, "o_mat").is_err());
        assert!(matches!(r.get::<Light>(&h), Err(RegistryError::WrongKind { .. })));
    }

    #[test]
    fn ids_are_not_reused() {
        let (mut r, obj) = sphere_scene();
        r.delete_entity(obj).unwrap();
        let again = r.create_entity("obj", EntityComponents::default()).unwrap();
        assert_eq!(again, 2);
        assert!(r.entity(obj).is_err());
    }

    #[test]
    fn mesh_and_volume_are_exclusive() {
        let (mut r, obj) = sphere_scene();
        let v = r
            .create("smoke", VolumeGrid::from_array([1, 1, 1], vec![1.0], 1.0, Rgb::one(), 0.0).unwrap())
            .unwrap();
        assert_eq!(r.attach(obj, v.clone()), Err(RegistryError::MeshVolumeConflict("obj".into())));
        let both = EntityComponents {
            mesh: Some(r.handle(ComponentKind::Mesh, "o_mesh").unwrap()),
            volume: Some(v),
            ..Default::default()
        };
        assert!(r.create_entity("bad", both).is_err());
    }

    #[test]
    fn bound_components_cannot_be_deleted() {
        let (mut r, obj) = sphere_scene();
        let mat = r.handle(ComponentKind::Material, "o_mat").unwrap();
        assert!(matches!(r.delete(&mat), Err(RegistryError::InUse { .. })));
        r.detach(obj, ComponentKind::Material).unwrap();
        r.delete(&mat).unwrap();
        assert!(matches!(r.get::<PrincipledMaterial>(&mat), Err(RegistryError::StaleHandle { .. })));
        // a recreated component with the same name is a different component
        r.create("o_mat", PrincipledMaterial::default()).unwrap();
        assert!(r.check(&mat).is_err());
    }

    #[test]
    fn textures_in_use_cannot_be_deleted() {
        let mut r = Registry::new();
        let t = r.create("tex", Texture::constant([1.0; 4])).unwrap();
        let mut m = PrincipledMaterial::default();
        m.textures.base_color = Some("tex".into());
        let mh = r.create("m", m).unwrap();
        assert!(r.delete(&t).is_err());
        r.delete(&mh).unwrap();
        r.delete(&t).unwrap();
    }

    #[test]
    fn generation_increases_under_mutation() {
        let (mut r, _) = sphere_scene();
        let h = r.handle(ComponentKind::Material, "o_mat").unwrap();
        let g0 = r.generation(&h).unwrap();
        r.get_mut::<PrincipledMaterial>(&h).unwrap().set_roughness(0.1);
        r.get_mut::<PrincipledMaterial>(&h).unwrap().set_metallic(1.0);
        assert_eq!(r.generation(&h).unwrap(), g0 + 2);
    }

    #[test]
    fn camera_entity_needs_camera() {
        let (mut r, obj) = sphere_scene();
        assert!(matches!(r.set_camera_entity(obj), Err(RegistryError::IncompleteCamera(_))));
    }

    #[test]
    fn commit_motion_moves_current_pose_into_previous() {
        let (mut r, _) = sphere_scene();
        let h = r.handle(ComponentKind::Transform, "o_tfm").unwrap();
        r.get_mut::<Transformf>(&h).unwrap().set_translation(Vec3f::new(1.0, 0.0, 0.0));
        assert!(!r.get::<Transformf>(&h).unwrap().is_static());
        r.commit_motion();
        let t = r.get::<Transformf>(&h).unwrap();
        assert!(t.is_static());
        assert_eq!(t.prev_translation(), Vec3f::new(1.0, 0.0, 0.0));
    }
}
