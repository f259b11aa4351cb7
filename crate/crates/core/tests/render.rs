use std::f64::consts::{FRAC_PI_4, PI};

use vistrace::camera::Camera;
use vistrace::geometry::Mesh;
use vistrace::lights::Light;
use vistrace::materials::PrincipledMaterial;
use vistrace::math::{Quat, Transform};
use vistrace::render::{render, LightStrategy, RenderConfig};
use vistrace::sampling::SamplePattern;
use vistrace::scene::{EntityComponents, EnvironmentSettings, Registry};
use vistrace::{Rgb, Transformf, Vec3f};

fn registry_with_camera(camera: Camera, eye: Vec3f, at: Vec3f, up: Vec3f) -> Registry {
    let mut r = Registry::new();
    let c = r.create("cam", camera).unwrap();
    let t = r.create("cam_tfm", Transform::looking_at(eye, at, up).unwrap()).unwrap();
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

fn add_object(r: &mut Registry, name: &str, mesh: vistrace::Meshf, tf: Transformf, material: PrincipledMaterial) {
    let mesh = r.create_mesh(&format!("{name}_mesh"), mesh).unwrap();
    let tf = r.create(&format!("{name}_tfm"), tf).unwrap();
    let mat = r.create(&format!("{name}_mat"), material).unwrap();
    r.create_entity(
        name,
        EntityComponents {
            transform: Some(tf),
            mesh: Some(mesh),
            material: Some(mat),
            ..Default::default()
        },
    )
    .unwrap();
}

fn constant_env(r: &mut Registry, value: f64) {
    r.set_environment(Some(EnvironmentSettings {
        color: Rgb::splat(value),
        ..Default::default()
    }));
}

fn config(width: u32, height: u32, spp: u32) -> RenderConfig {
    RenderConfig {
        width,
        height,
        samples_per_pixel: spp,
        clamp_radiance: None,
        ..Default::default()
    }
}

#[test]
fn empty_scene_shows_the_environment_exactly() {
    let mut r = registry_with_camera(Camera::default(), Vec3f::zero(), -Vec3f::unit_z(), Vec3f::unit_y());
    constant_env(&mut r, 0.5);
    let fb = render(&r.take_snapshot().unwrap(), &config(16, 12, 4)).unwrap();
    for p in &fb.pixels {
        assert_eq!(*p, Rgb::splat(0.5));
    }
    assert_eq!(fb.dropped_samples, 0);
}

fn furnace_mean(roughness: f64, metallic: f64, size: u32, spp: u32) -> (f64, f64) {
    let mut r = registry_with_camera(Camera::default(), Vec3f::new(0.0, 0.0, 4.0), Vec3f::zero(), Vec3f::unit_y());
    constant_env(&mut r, 1.0);
    let m = PrincipledMaterial::default()
        .with_base_color(Rgb::one())
        .with_roughness(roughness)
        .with_metallic(metallic);
    add_object(&mut r, "ball", Mesh::sphere(1.0, 64).unwrap(), Transform::identity(), m);
    let mut cfg = config(size, size, spp);
    cfg.max_depth = 32;
    let fb = render(&r.take_snapshot().unwrap(), &cfg).unwrap();
    assert_eq!(fb.dropped_samples, 0);
    let (mut sum, mut worst) = (0.0, 0.0f64);
    for p in &fb.pixels {
        sum += p.y;
        worst = worst.max((p.y - 1.0).abs());
    }
    (sum / fb.pixels.len() as f64, worst)
}

#[test]
fn white_lambert_furnace_is_invisible() {
    let (mean, worst) = furnace_mean(1.0, 0.0, 24, 128);
    assert!((mean - 1.0).abs() < 0.005, "{mean}");
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn white_glossy_furnace_conserves_energy() {
    let (mean, _) = furnace_mean(0.25, 0.0, 24, 128);
    assert!((mean - 1.0).abs() < 0.02, "{mean}");
}

/// Irradiance at `p` (normal +z) from a unit-radiance polygon above it.
fn polygon_irradiance(p: Vec3f, corners: &[Vec3f]) -> f64 {
    let mut sum = 0.0;
    for i in 0..corners.len() {
        let a = (corners[i] - p).normalize();
        let b = (corners[(i + 1) % corners.len()] - p).normalize();
        let gamma = a.dot(b).clamp(-1.0, 1.0).acos();
        sum += gamma * a.cross(b).normalize().z;
    }
    0.5 * sum.abs()
}

/// Floor lit by a 1x1 quad at height 1, seen obliquely so the light stays
/// out of frame.
fn quad_over_floor(albedo: f64, roughness: f64) -> (Registry, Transformf) {
    let camera = Camera::new(30f64.to_radians()).unwrap();
    let mut r = registry_with_camera(camera, Vec3f::new(0.0, -3.0, 2.0), Vec3f::zero(), Vec3f::unit_z());
    add_object(
        &mut r,
        "floor",
        Mesh::plane(20.0, 20.0).unwrap(),
        Transform::identity(),
        PrincipledMaterial::default()
            .with_base_color(Rgb::splat(albedo))
            .with_roughness(roughness),
    );
    let mesh = r.create_mesh("quad", Mesh::plane(1.0, 1.0).unwrap()).unwrap();
    let tf = r
        .create(
            "quad_tfm",
            Transform::from_trs(Vec3f::new(0.0, 0.0, 1.0), Quat::from_axis_angle(Vec3f::unit_x(), PI), Vec3f::one()).unwrap(),
        )
        .unwrap();
    let light = r.create("quad_light", Light::new(1.0, Rgb::one())).unwrap();
    r.create_entity(
        "quad",
        EntityComponents {
            transform: Some(tf),
            mesh: Some(mesh),
            light: Some(light),
            ..Default::default()
        },
    )
    .unwrap();
    let cam_t = *r.get_by_name::<Transformf>("cam_tfm").unwrap();
    (r, cam_t)
}

/// Expected pixel value: outgoing Lambert radiance averaged over the pixel
/// footprint on the floor.
fn floor_pixel_oracle(cam_t: &Transformf, w: u32, h: u32, x: u32, y: u32, albedo: f64) -> f64 {
    let camera = Camera::new(30f64.to_radians()).unwrap();
    let m = cam_t.to_matrix();
    let corners = [
        Vec3f::new(-0.5, -0.5, 1.0),
        Vec3f::new(0.5, -0.5, 1.0),
        Vec3f::new(0.5, 0.5, 1.0),
        Vec3f::new(-0.5, 0.5, 1.0),
    ];
    let n = 8;
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            let px = x as f64 + (i as f64 + 0.5) / n as f64;
            let py = y as f64 + (j as f64 + 0.5) / n as f64;
            let o = m.transform_point(Vec3f::zero());
            let d = m.transform_direction(camera.camera_direction(w, h, px, py));
            let q = o + d * (-o.z / d.z);
            sum += albedo / PI * polygon_irradiance(q, &corners);
        }
    }
    sum / (n * n) as f64
}

#[test]
fn direct_light_on_lambert_floor_matches_form_factor() {
    let (mut r, cam_t) = quad_over_floor(0.8, 1.0);
    let (w, h) = (33, 33);
    let mut cfg = config(w, h, 1024);
    cfg.max_depth = 1;
    let fb = render(&r.take_snapshot().unwrap(), &cfg).unwrap();
    for (x, y) in [(16, 16), (10, 20), (24, 8)] {
        let est = fb.pixel(x, y).y;
        let exact = floor_pixel_oracle(&cam_t, w, h, x, y, 0.8);
        assert!((est - exact).abs() / exact < 0.03, "pixel ({x},{y}): {est} vs {exact}");
    }
}

#[test]
fn light_only_bsdf_only_and_mis_agree() {
    // glossy floor: the regime where the two strategies differ most
    let (mut r, _) = quad_over_floor(0.8, 0.3);
    let snap = r.take_snapshot().unwrap();
    let mean = |strategy| {
        let mut cfg = config(16, 16, 256);
        cfg.max_depth = 1;
        cfg.strategy = strategy;
        let fb = render(&snap, &cfg).unwrap();
        fb.pixels.iter().map(|p| p.y).sum::<f64>() / fb.pixels.len() as f64
    };
    let mis = mean(LightStrategy::Mis);
    let light = mean(LightStrategy::LightOnly);
    let bsdf = mean(LightStrategy::BsdfOnly);
    assert!(mis > 0.0);
    assert!((light - mis).abs() / mis < 0.02, "{light} vs {mis}");
    assert!((bsdf - mis).abs() / mis < 0.03, "{bsdf} vs {mis}");
}

#[test]
fn worker_count_does_not_change_the_image() {
    let (mut r, _) = quad_over_floor(0.8, 0.5);
    constant_env(&mut r, 0.2);
    let snap = r.take_snapshot().unwrap();
    let mut cfg = config(40, 36, 8);
    cfg.clamp_radiance = Some(10.0);
    cfg.workers = Some(1);
    let one = render(&snap, &cfg).unwrap();
    cfg.workers = Some(3);
    let three = render(&snap, &cfg).unwrap();
    assert_eq!(one, three);
    cfg.seed = 1;
    assert_ne!(render(&snap, &cfg).unwrap(), one);
}

#[test]
fn doubling_samples_halves_variance() {
    let (mut r, _) = quad_over_floor(0.8, 1.0);
    constant_env(&mut r, 0.3);
    let snap = r.take_snapshot().unwrap();
    // a small patch where the true image is nearly flat
    let variance = |spp: u32| {
        let mut samples = Vec::new();
        for seed in 0..200 {
            let mut cfg = config(33, 33, spp);
            cfg.pattern = SamplePattern::Independent;
            cfg.seed = seed;
            let px = vistrace::render::render_pixel(&snap, &cfg, 16, 16).0.y;
            samples.push(px);
        }
        let m = samples.iter().sum::<f64>() / samples.len() as f64;
        samples.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (samples.len() - 1) as f64
    };
    let ratio = variance(16) / variance(32);
    // 200 replicas give the variance ratio a spread of roughly 14%
    assert!((ratio - 2.0).abs() < 0.6, "{ratio}");
}

#[test]
fn mirrored_motion_gives_a_mirrored_image() {
    let render_moving = |from: f64, to: f64| {
        let mut r = registry_with_camera(Camera::default(), Vec3f::new(0.0, 0.0, 4.0), Vec3f::zero(), Vec3f::unit_y());
        constant_env(&mut r, 1.0);
        let mut tf = Transform::identity();
        tf.set_translation(Vec3f::new(from, 0.0, 0.0));
        tf.commit_motion();
        tf.set_translation(Vec3f::new(to, 0.0, 0.0));
        add_object(
            &mut r,
            "ball",
            Mesh::sphere(1.0, 32).unwrap(),
            tf,
            PrincipledMaterial::default().with_base_color(Rgb::splat(0.2)),
        );
        let mut cfg = config(32, 16, 256);
        cfg.max_depth = 2;
        render(&r.take_snapshot().unwrap(), &cfg).unwrap()
    };
    let a = render_moving(-1.0, 1.0);
    let b = render_moving(1.0, -1.0);
    let (mut diff, mut total) = (0.0, 0.0);
    for y in 0..16 {
        for x in 0..32 {
            diff += (a.pixel(x, y).y - b.pixel(31 - x, y).y).abs();
            total += 1.0 - a.pixel(x, y).y;
        }
    }
    // the blurred ball darkens the frame; mirroring it matches up to noise
    assert!(total > 30.0, "{total}");
    assert!(diff / total < 0.05, "{diff} / {total}");
    // and differs clearly from a static ball
    let c = render_moving(0.0, 0.0);
    let static_diff: f64 = (0..16)
        .flat_map(|y| (0..32).map(move |x| (x, y)))
        .map(|(x, y)| (a.pixel(x, y).y - c.pixel(x, y).y).abs())
        .sum();
    assert!(static_diff > 5.0 * diff, "{static_diff} vs {diff}");
}

#[test]
fn thin_lens_converges_on_the_focus_plane() {
    let cam = Camera::new(FRAC_PI_4).unwrap().with_aperture(0.2, 3.0).unwrap();
    let m = Transform::<f64>::identity().to_matrix();
    for (x, y) in [(0, 0), (10, 7), (63, 47)] {
        let d = cam.camera_direction(64, 48, x as f64 + 0.5, y as f64 + 0.5);
        let focus = d * 3.0;
        for lens in [[0.1, 0.9], [0.5, 0.5], [0.99, 0.01], [0.3, 0.7]] {
            let ray = cam.generate_ray(&m, 64, 48, x, y, [0.5, 0.5], lens, 0.0);
            let t = (focus.z - ray.origin.z) / ray.direction.z;
            assert!((ray.at(t) - focus).length() < 1e-5);
        }
    }
}
