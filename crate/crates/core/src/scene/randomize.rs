use rand::Rng;

use super::{EntityComponents, EntityId, Registry, RegistryError};
use crate::geometry::Mesh;
use crate::lights::Light;
use crate::math::{look_at_rotation, Quat, Transform};
use crate::{Rgb, Transformf, Vec3f};

/// Ranges for randomly placed quad lights behind the camera.
#[derive(Clone, Debug, PartialEq)]
pub struct LightRecipe {
    /// Inclusive light count range.
    pub count: [u32; 2],
    pub intensity: [f64; 2],
    pub color_min: Rgb,
    pub color_max: Rgb,
    /// Distance behind the camera plane.
    pub distance: [f64; 2],
    /// Half-width of the lateral placement square.
    pub spread: f64,
    /// Quad edge length.
    pub size: f64,
}

impl Default for LightRecipe {
    fn default() -> Self {
        Self {
            count: [2, 6],
            intensity: [2.0, 10.0],
            color_min: Rgb::splat(0.5),
            color_max: Rgb::one(),
            distance: [0.5, 2.0],
            spread: 2.0,
            size: 0.5,
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Creates a random number of quad lights in the half-space behind the
/// active camera, each facing the point one unit in front of it. Entities
/// are named `{prefix}_{k}`; they share one quad mesh `{prefix}_quad`.
pub fn randomize_lights<R: Rng + ?Sized>(
    reg: &mut Registry,
    prefix: &str,
    recipe: &LightRecipe,
    rng: &mut R,
) -> Result<Vec<EntityId>, RegistryError> {
    let cam = reg.camera_entity().ok_or(RegistryError::NoActiveCamera)?;
    let th = reg
        .entity(cam)?
        .components
        .transform
        .clone()
        .ok_or(RegistryError::NoActiveCamera)?;
    let cam_t = *reg.get::<Transformf>(&th)?;
    let (eye, forward) = (cam_t.translation(), cam_t.forward());
    let right = cam_t.rotation().rotate(Vec3f::unit_x());
    let up = cam_t.rotation().rotate(Vec3f::unit_y());

    let [lo, hi] = recipe.count;
    let count = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    let mesh_name = format!("{prefix}_quad");
    let mesh = match reg.handle(super::ComponentKind::Mesh, &mesh_name) {
        Ok(h) => h,
        Err(_) => reg.create_mesh(&mesh_name, Mesh::plane(recipe.size, recipe.size)?)?,
    };

    let mut ids = Vec::with_capacity(count as usize);
    for k in 0..count {
        let d = uniform(rng, recipe.distance).max(1e-3);
        let a = uniform(rng, [-recipe.spread, recipe.spread]);
        let b = uniform(rng, [-recipe.spread, recipe.spread]);
        let intensity = uniform(rng, recipe.intensity);
        let color = Rgb::new(
            uniform(rng, [recipe.color_min.x, recipe.color_max.x]),
            uniform(rng, [recipe.color_min.y, recipe.color_max.y]),
            uniform(rng, [recipe.color_min.z, recipe.color_max.z]),
        );
        let pos = eye - forward * d + right * a + up * b;
        // the quad's +z normal should face the target, so aim local −z away from it
        let target = eye + forward;
        let away = pos + (pos - target);
        let rotation = look_at_rotation(pos, away, up)
            .or_else(|_| look_at_rotation(pos, away, right))
            .unwrap_or_else(|_| Quat::identity());
        let name = format!("{prefix}_{k}");
        let tf = reg.create(&format!("{name}_tfm"), Transform::from_trs(pos, rotation, Vec3f::one()).expect("unit scale"))?;
        let light = reg.create(&format!("{name}_light"), Light::new(intensity, color))?;
        ids.push(reg.create_entity(
            &name,
            EntityComponents {
                transform: Some(tf),
                mesh: Some(mesh.clone()),
                light: Some(light),
                ..Default::default()
            },
        )?);
    }
    Ok(ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::Camera;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn registry() -> Registry {
        let mut r = Registry::new();
        let c = r.create("cam", Camera::default()).unwrap();
        let mut t = Transform::identity();
        t.look_at(Vec3f::new(1.0, -4.0, 2.0), Vec3f::zero(), Vec3f::unit_z()).unwrap();
        let t = r.create("cam_tfm", t).unwrap();
        let id = r
            .create_entity(
                "cam",
                EntityComponents {
                    camera: Some(c),
                    transform: Some(t),
                    ..Default::default()
                },
            )
            .unwrap();
        r.set_camera_entity(id).unwrap();
        r
    }

    #[test]
    fn lights_sit_behind_the_camera() {
        let mut r = registry();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ids = randomize_lights(&mut r, "rl", &LightRecipe::default(), &mut rng).unwrap();
        assert!((2..=6).contains(&ids.len()));
        let cam = *r.get_by_name::<Transformf>("cam_tfm").unwrap();
        for id in ids {
            let h = r.entity(id).unwrap().components.transform.clone().unwrap();
            let t = r.get::<Transformf>(&h).unwrap();
            assert!((t.translation() - cam.translation()).dot(cam.forward()) < 0.0);
            // the emitting side faces forward of the camera
            let n = t.rotation().rotate(Vec3f::unit_z());
            assert!(n.dot(cam.translation() + cam.forward() - t.translation()) > 0.0);
        }
    }

    #[test]
    fn fixed_count_and_determinism() {
        let recipe = LightRecipe {
            count: [1, 1],
            ..Default::default()
        };
        let mut r = registry();
        let ids = randomize_lights(&mut r, "rl", &recipe, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(ids.len(), 1);
        let mut a = registry();
        let mut b = registry();
        randomize_lights(&mut a, "rl", &LightRecipe::default(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        randomize_lights(&mut b, "rl", &LightRecipe::default(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let poses = |r: &Registry| {
            r.names(super::super::ComponentKind::Transform)
                .iter()
                .map(|n| *r.get_by_name::<Transformf>(n).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(poses(&a), poses(&b));
    }

    #[test]
    fn requires_camera() {
        let mut r = Registry::new();
        assert!(randomize_lights(&mut r, "rl", &LightRecipe::default(), &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }
}
