//! Deterministic ray-tracing fixture scenes, each at most 10k triangles,
//! plus a ray generator that mixes aimed and random rays.

use std::f64::consts::TAU;
use std::fmt::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vistrace::geometry::{parse_obj, Blas, Instance, Mesh};
use vistrace::math::{Quat, Transform};
use vistrace::{Iasf, Instancef, Meshf, Rayf, Transformf, Vec3f};

pub const MAX_TRIANGLES: usize = 10_000;

pub struct Fixture {
    pub name: &'static str,
    pub instances: Vec<Instancef>,
}

impl Fixture {
    pub fn triangles(&self) -> usize {
        self.instances.iter().map(|i| i.mesh().indices().len()).sum()
    }

    pub fn ias(&self) -> Iasf {
        Iasf::build(self.instances.clone())
    }
}

fn blas(mesh: Meshf) -> Arc<vistrace::Blasf> {
    Arc::new(Blas::build(Arc::new(mesh)).unwrap())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn v(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec3f {
    Vec3f::new(rng.random_range(lo..hi), rng.random_range(lo..hi), rng.random_range(lo..hi))
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Quat<f64> {
    Quat::from_euler_xyz(rng.random_range(0.0..TAU), rng.random_range(0.0..TAU), rng.random_range(0.0..TAU))
}

fn tf(t: Vec3f, r: Quat<f64>, s: Vec3f) -> Transformf {
    Transform::from_trs(t, r, s).unwrap()
}

/// Overlapping spheres of assorted sizes sharing one mesh.
fn sphere_field() -> Fixture {
    let mut r = rng(1);
    let mesh = blas(Mesh::sphere(1.0, 16).unwrap());
    let instances = (0..36)
        .map(|i| {
            let s = r.random_range(0.2..1.2);
            Instance::new(mesh.clone(), tf(v(&mut r, -4.0, 4.0), random_rotation(&mut r), Vec3f::splat(s)), i)
        })
        .collect();
    Fixture {
        name: "sphere field",
        instances,
    }
}

/// Closed room of boxes and quads with many shared edges.
fn room() -> Fixture {
    let mut r = rng(2);
    let cube = blas(Mesh::cuboid(Vec3f::one()).unwrap());
    let quad = blas(Mesh::plane(1.0, 1.0).unwrap());
    let mut instances = vec![Instance::new(
        cube.clone(),
        tf(Vec3f::zero(), Quat::identity(), Vec3f::new(10.0, 8.0, 6.0)),
        0,
    )];
    for i in 1..40 {
        let mesh = if i % 3 == 0 { quad.clone() } else { cube.clone() };
        let t = tf(v(&mut r, -3.5, 3.5), random_rotation(&mut r), v(&mut r, 0.1, 1.5));
        instances.push(Instance::new(mesh, t, i));
    }
    Fixture { name: "room", instances }
}

/// Height field loaded through the OBJ parser: 70 × 70 quads.
fn terrain() -> Fixture {
    let n = 70;
    let mut obj = String::new();
    for j in 0..=n {
        for i in 0..=n {
            let (x, y) = (i as f64 / n as f64 * 8.0 - 4.0, j as f64 / n as f64 * 8.0 - 4.0);
            let z = 0.6 * (1.3 * x).sin() * (0.9 * y).cos() + 0.15 * (5.0 * x + 3.0 * y).sin();
            writeln!(obj, "v {x} {y} {z}").unwrap();
        }
    }
    for j in 0..n {
        for i in 0..n {
            let a = j * (n + 1) + i + 1;
            writeln!(obj, "f {} {} {} {}", a, a + 1, a + n + 2, a + n + 1).unwrap();
        }
    }
    let mesh = parse_obj(&obj).unwrap().mesh;
    Fixture {
        name: "terrain",
        instances: vec![Instance::new(blas(mesh), Transform::identity(), 0)],
    }
}

/// Unstructured soup of thin and large random triangles.
fn soup() -> Fixture {
    let mut r = rng(4);
    let count = 3000;
    let mut positions = Vec::with_capacity(3 * count);
    for _ in 0..count {
        let c = v(&mut r, -2.0, 2.0);
        let size = if r.random_bool(0.1) { 1.5 } else { 0.2 };
        for _ in 0..3 {
            positions.push(c + v(&mut r, -size, size));
        }
    }
    let indices = (0..count as u32).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect();
    let mesh = Mesh::from_arrays(positions, indices, None, None).unwrap();
    Fixture {
        name: "triangle soup",
        instances: vec![Instance::new(blas(mesh), Transform::identity(), 0)],
    }
}

/// Instanced, anisotropically scaled and moving cuboids and spheres.
fn moving_instances() -> Fixture {
    let mut r = rng(5);
    let cube = blas(Mesh::cuboid(Vec3f::one()).unwrap());
    let ball = blas(Mesh::sphere(0.5, 12).unwrap());
    let instances = (0..60)
        .map(|i| {
            let mesh = if i % 2 == 0 { cube.clone() } else { ball.clone() };
            let mut t = tf(v(&mut r, -4.0, 4.0), random_rotation(&mut r), v(&mut r, 0.2, 1.4));
            if i % 3 != 0 {
                t.set_translation(t.translation() + v(&mut r, -1.0, 1.0));
                t.set_rotation(random_rotation(&mut r));
            }
            Instance::new(mesh, t, i)
        })
        .collect();
    Fixture {
        name: "moving instances",
        instances,
    }
}

pub fn fixtures() -> Vec<Fixture> {
    vec![sphere_field(), room(), terrain(), soup(), moving_instances()]
}

/// Rays for a fixture: half aimed at random surface points of random
/// instances, half with random origins and directions, all at random times.
pub fn rays(fixture: &Fixture, count: usize, seed: u64) -> Vec<Rayf> {
    let mut r = rng(seed);
    let ias = fixture.ias();
    let b = ias.bounds();
    let (lo, hi) = (b.min - Vec3f::splat(1.0), b.max + Vec3f::splat(1.0));
    (0..count)
        .map(|k| {
            let time = if r.random_bool(0.5) { r.random_range(0.0..=1.0) } else { 1.0 };
            let origin = Vec3f::new(
                r.random_range(lo.x..hi.x),
                r.random_range(lo.y..hi.y),
                r.random_range(lo.z..hi.z),
            );
            let dir = if k % 2 == 0 {
                let inst = &fixture.instances[r.random_range(0..fixture.instances.len())];
                let mesh = inst.mesh();
                let tri = mesh.indices()[r.random_range(0..mesh.indices().len())];
                let (a, b) = (r.random_range(0.0..1.0f64), r.random_range(0.0..1.0f64));
                let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
                let p = mesh.positions();
                let local = p[tri[0] as usize] * (1.0 - a - b) + p[tri[1] as usize] * a + p[tri[2] as usize] * b;
                inst.matrix_at(time).transform_point(local) - origin
            } else {
                v(&mut r, -1.0, 1.0)
            };
            Rayf::new(origin, dir.normalize(), time)
        })
        .collect()
}
