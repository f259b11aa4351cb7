use std::collections::HashMap;
use std::sync::Arc;

use super::{EntityId, MeshComponent, Registry, RegistryError};
use crate::camera::Camera;
use crate::geometry::{Ias, Instance};
use crate::lights::{Environment, Light, LightTable};
use crate::materials::{PrincipledMaterial, ShadingMaterial};
use crate::volumes::VolumeGrid;
use crate::{Iasf, Mat4f, Transformf};

/// Shading data for one IAS instance (same index as in the IAS).
#[derive(Clone, Debug)]
pub struct InstanceShading {
    pub entity_id: EntityId,
    /// `None` for light-only entities, which emit but do not reflect.
    pub material: Option<Arc<ShadingMaterial>>,
    pub is_light: bool,
}

#[derive(Clone, Debug)]
pub struct VolumeInstance {
    pub entity_id: EntityId,
    pub grid: Arc<VolumeGrid>,
    pub transform: Transformf,
}

impl VolumeInstance {
    /// World-from-local matrix at shutter time `time`.
    pub fn matrix_at(&self, time: f64) -> Mat4f {
        self.transform.interpolate(time)
    }
}

/// Active camera with both shutter keys of its pose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraState {
    pub entity_id: EntityId,
    pub camera: Camera,
    pub transform: Transformf,
}

impl CameraState {
    pub fn world_from_camera(&self, time: f64) -> Mat4f {
        self.transform.interpolate(time)
    }
}

/// Immutable flattened scene consumed by the renderer.
///
/// An entity is instanced when it binds transform + mesh + material or
/// transform + mesh + light; it is a volume when it binds transform +
/// volume. Everything else is left out.
#[derive(Clone, Debug)]
pub struct RenderSnapshot {
    pub sequence: u64,
    pub ias: Iasf,
    pub shading: Vec<InstanceShading>,
    pub lights: LightTable,
    pub volumes: Vec<VolumeInstance>,
    pub camera: CameraState,
    pub environment: Option<Arc<Environment>>,
    /// Names of all live entities, by id.
    pub entity_names: Vec<Option<String>>,
}

impl RenderSnapshot {
    pub fn instance_count(&self) -> usize {
        self.shading.len()
    }

    pub fn entity_name(&self, id: EntityId) -> Option<&str> {
        self.entity_names.get(id as usize)?.as_deref()
    }
}

pub(super) fn build(
    reg: &Registry,
    sequence: u64,
    environment: Option<Arc<Environment>>,
) -> Result<RenderSnapshot, RegistryError> {
    let cam_id = reg.active_camera.ok_or(RegistryError::NoActiveCamera)?;
    let cam_entity = reg.entity(cam_id)?;
    let (Some(ch), Some(th)) = (&cam_entity.components.camera, &cam_entity.components.transform) else {
        return Err(RegistryError::IncompleteCamera(cam_entity.name.clone()));
    };
    let camera = CameraState {
        entity_id: cam_id,
        camera: *reg.get::<Camera>(ch)?,
        transform: *reg.get::<Transformf>(th)?,
    };

    let lookup = reg.texture_lookup();
    let mut materials: HashMap<&str, Arc<ShadingMaterial>> = HashMap::new();
    let mut instances = Vec::new();
    let mut shading = Vec::new();
    let mut emitters = Vec::new();
    let mut volumes = Vec::new();

    for e in reg.entities() {
        let c = &e.components;
        let Some(th) = &c.transform else { continue };
        if let Some(vh) = &c.volume {
            volumes.push(VolumeInstance {
                entity_id: e.id,
                grid: reg.get_arc::<VolumeGrid>(vh)?,
                transform: *reg.get::<Transformf>(th)?,
            });
            continue;
        }
        let Some(mh) = &c.mesh else { continue };
        if c.material.is_none() && c.light.is_none() {
            continue;
        }
        let material = match &c.material {
            Some(h) => Some(match materials.get(h.name.as_str()) {
                Some(m) => m.clone(),
                None => {
                    let m = Arc::new(reg.get::<PrincipledMaterial>(h)?.resolve(&lookup)?);
                    materials.insert(&h.name, m.clone());
                    m
                }
            }),
            None => None,
        };
        let index = instances.len() as u32;
        if let Some(lh) = &c.light {
            emitters.push((index, reg.get::<Light>(lh)?.resolve(&lookup)?));
        }
        let mesh = reg.get::<MeshComponent>(mh)?;
        instances.push(Instance::new(mesh.blas().clone(), *reg.get::<Transformf>(th)?, e.id));
        shading.push(InstanceShading {
            entity_id: e.id,
            material,
            is_light: c.light.is_some(),
        });
    }

    let ias = Ias::build(instances);
    let lights = LightTable::build(&ias, emitters, environment.clone());
    let entity_names = reg.entities.iter().map(|e| e.as_ref().map(|e| e.name.clone())).collect();
    Ok(RenderSnapshot {
        sequence,
        ias,
        shading,
        lights,
        volumes,
        camera,
        environment,
        entity_names,
    })
}
