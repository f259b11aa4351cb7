use std::sync::Arc;

use crate::math::{Mat4, Ray, Real, Transform, Vec2, Vec3};

use super::{intersect_triangle, reciprocal, Aabb, Blas, Bvh, Mesh};

/// A placed copy of a BLAS with shutter-open and shutter-close poses.
#[derive(Clone, Debug)]
pub struct Instance<T> {
    blas: Arc<Blas<T>>,
    transform: Transform<T>,
    entity_id: u32,
    prev: Mat4<T>,
    curr: Mat4<T>,
    prev_inv: Mat4<T>,
    curr_inv: Mat4<T>,
    world_bounds: Aabb<T>,
}

impl<T: Real> Instance<T> {
    pub fn new(blas: Arc<Blas<T>>, transform: Transform<T>, entity_id: u32) -> Self {
        let prev = transform.prev_matrix();
        let curr = transform.to_matrix();
        // scale is positive by construction, so both keys are invertible
        let prev_inv = prev.inverse().unwrap_or_else(|_| Mat4::identity());
        let curr_inv = curr.inverse().unwrap_or_else(|_| Mat4::identity());
        let world_bounds = motion_bounds(&blas.bounds(), &transform, &prev, &curr);
        Self {
            blas,
            transform,
            entity_id,
            prev,
            curr,
            prev_inv,
            curr_inv,
            world_bounds,
        }
    }

    pub fn blas(&self) -> &Arc<Blas<T>> {
        &self.blas
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        self.blas.mesh()
    }

    pub fn transform(&self) -> &Transform<T> {
        &self.transform
    }

    pub fn entity_id(&self) -> u32 {
        self.entity_id
    }

    /// World matrix at shutter-open.
    pub fn prev_matrix(&self) -> &Mat4<T> {
        &self.prev
    }

    /// World matrix at shutter-close.
    pub fn curr_matrix(&self) -> &Mat4<T> {
        &self.curr
    }

    pub fn is_static(&self) -> bool {
        self.transform.is_static()
    }

    /// World bounds covering both time keys.
    pub fn world_bounds(&self) -> Aabb<T> {
        self.world_bounds
    }

    /// Object-to-world matrix at shutter time `time`.
    pub fn matrix_at(&self, time: T) -> Mat4<T> {
        if self.is_static() || time >= T::one() {
            self.curr
        } else if time <= T::zero() {
            self.prev
        } else {
            self.transform.interpolate(time)
        }
    }

    /// World-to-object matrix at shutter time `time`.
    pub fn inverse_at(&self, time: T) -> Mat4<T> {
        if self.is_static() || time >= T::one() {
            self.curr_inv
        } else if time <= T::zero() {
            self.prev_inv
        } else {
            self.transform
                .interpolate(time)
                .inverse()
                .unwrap_or_else(|_| Mat4::identity())
        }
    }

    /// Ray origin and (unnormalized) direction in object space. Parametric
    /// distances along the object ray equal world distances.
    #[inline]
    fn object_ray(&self, ray: &Ray<T>) -> (Vec3<T>, Vec3<T>) {
        let inv = self.inverse_at(ray.time);
        (inv.transform_point(ray.origin), inv.transform_direction(ray.direction))
    }
}

/// Bounds over the shutter interval. Translation and scale move corners
/// linearly, so the union of both keys suffices; a changing rotation can
/// sweep outside that union, so a bounding sphere around the swept center
/// is added in that case.
fn motion_bounds<T: Real>(local: &Aabb<T>, transform: &Transform<T>, prev: &Mat4<T>, curr: &Mat4<T>) -> Aabb<T> {
    let keys = local.transformed(prev).union(local.transformed(curr));
    if transform.prev_rotation() == transform.rotation() {
        return keys;
    }
    let reach = local
        .corners()
        .iter()
        .fold(T::zero(), |r, c| r.max(c.length()));
    let max_scale = transform.scale().max_component().max(transform.prev_scale().max_component());
    let r = Vec3::splat(reach * max_scale);
    let (t0, t1) = (transform.prev_translation(), transform.translation());
    let sweep = Aabb::new(t0.min(t1) - r, t0.max(t1) + r);
    keys.union(sweep)
}

/// Closest intersection in world space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit<T> {
    pub t: T,
    pub instance: u32,
    pub triangle: u32,
    /// Barycentric weights of the second and third vertex.
    pub u: T,
    pub v: T,
    pub position: Vec3<T>,
    /// Unit normal from the triangle winding, in world space.
    pub geometric_normal: Vec3<T>,
    /// Unit interpolated vertex normal, in world space.
    pub shading_normal: Vec3<T>,
    /// Interpolated texture coordinates (zero when the mesh has none).
    pub uv: Vec2<T>,
    /// World-space ∂p/∂u, present when the mesh has non-degenerate texture coordinates.
    pub dpdu: Option<Vec3<T>>,
    pub entity_id: u32,
    pub time: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Candidate<T> {
    t: T,
    instance: u32,
    triangle: u32,
    u: T,
    v: T,
}

/// Strict total order on hits: nearer first, then lower (instance, triangle).
#[inline]
fn better<T: Real>(t: T, instance: u32, triangle: u32, best: &Option<Candidate<T>>) -> bool {
    match best {
        None => true,
        Some(b) => t < b.t || (t == b.t && (instance, triangle) < (b.instance, b.triangle)),
    }
}

/// Instance-level acceleration structure over a list of instances.
#[derive(Clone, Debug)]
pub struct Ias<T> {
    instances: Vec<Instance<T>>,
    tlas: Bvh<T>,
}

impl<T: Real> Ias<T> {
    pub fn build(instances: Vec<Instance<T>>) -> Self {
        let bounds: Vec<Aabb<T>> = instances.iter().map(|i| i.world_bounds()).collect();
        let tlas = Bvh::build(&bounds);
        Self { instances, tlas }
    }

    pub fn instances(&self) -> &[Instance<T>] {
        &self.instances
    }

    pub fn tlas(&self) -> &Bvh<T> {
        &self.tlas
    }

    pub fn bounds(&self) -> Aabb<T> {
        self.tlas.bounds()
    }

    pub fn intersect(&self, ray: &Ray<T>) -> Option<Hit<T>> {
        let mut best: Option<Candidate<T>> = None;
        let mut t_max = ray.t_max;
        let inv_dir = reciprocal(ray.direction);
        self.tlas.traverse(ray.origin, inv_dir, ray.t_min, &mut t_max, |inst_idx, t_max| {
            let inst = &self.instances[inst_idx as usize];
            let (o, d) = inst.object_ray(ray);
            let mesh = inst.mesh();
            let inv_d = reciprocal(d);
            let mut local_max = *t_max;
            inst.blas().bvh().traverse(o, inv_d, ray.t_min, &mut local_max, |tri, local_max| {
                let [p0, p1, p2] = mesh.triangle(tri as usize);
                if let Some((t, u, v)) = intersect_triangle(o, d, p0, p1, p2, ray.t_min, *local_max) {
                    if better(t, inst_idx, tri, &best) {
                        best = Some(Candidate {
                            t,
                            instance: inst_idx,
                            triangle: tri,
                            u,
                            v,
                        });
                        *local_max = t;
                    }
                }
                false
            });
            *t_max = local_max;
            false
        });
        best.map(|c| self.finish(ray, c))
    }

    /// True if anything blocks the ray within its `[t_min, t_max]` range.
    pub fn occluded_ray(&self, ray: &Ray<T>) -> bool {
        let mut blocked = false;
        let mut t_max = ray.t_max;
        let inv_dir = reciprocal(ray.direction);
        self.tlas.traverse(ray.origin, inv_dir, ray.t_min, &mut t_max, |inst_idx, t_max| {
            let inst = &self.instances[inst_idx as usize];
            let (o, d) = inst.object_ray(ray);
            let mesh = inst.mesh();
            let mut local_max = *t_max;
            inst.blas()
                .bvh()
                .traverse(o, reciprocal(d), ray.t_min, &mut local_max, |tri, local_max| {
                    let [p0, p1, p2] = mesh.triangle(tri as usize);
                    blocked = intersect_triangle(o, d, p0, p1, p2, ray.t_min, *local_max).is_some();
                    blocked
                });
            blocked
        });
        blocked
    }

    /// Visibility between two points at shutter time `time`, excluding a
    /// relative sliver at both ends so the test is symmetric in its endpoints.
    pub fn occluded(&self, p0: Vec3<T>, p1: Vec3<T>, time: T) -> bool {
        let delta = p1 - p0;
        let dist = delta.length();
        if !(dist > T::zero()) {
            return false;
        }
        let margin = dist * T::lit(1e-7);
        let ray = Ray::new(p0, delta / dist, time).with_range(margin, dist - margin);
        self.occluded_ray(&ray)
    }

    fn finish(&self, ray: &Ray<T>, c: Candidate<T>) -> Hit<T> {
        finish_hit(&self.instances, ray, c)
    }
}

fn finish_hit<T: Real>(instances: &[Instance<T>], ray: &Ray<T>, c: Candidate<T>) -> Hit<T> {
    let inst = &instances[c.instance as usize];
    let mesh = inst.mesh();
    let tri = c.triangle as usize;
    let [i0, i1, i2] = mesh.indices()[tri].map(|i| i as usize);
    let [p0, p1, p2] = mesh.triangle(tri);
    let w = T::one() - c.u - c.v;
    let m = inst.matrix_at(ray.time);
    let normal_m = m.normal_matrix().unwrap_or_else(|_| m.linear());

    let e1 = p1 - p0;
    let e2 = p2 - p0;
    let geometric_normal = normal_m.mul_vec(e1.cross(e2)).try_normalize().unwrap_or(Vec3::unit_z());
    let n = mesh.normals();
    let interp = n[i0] * w + n[i1] * c.u + n[i2] * c.v;
    let shading_normal = normal_m.mul_vec(interp).try_normalize().unwrap_or(geometric_normal);

    let (uv, dpdu) = match mesh.uvs() {
        Some(uvs) => {
            let (t0, t1, t2) = (uvs[i0], uvs[i1], uvs[i2]);
            let uv = t0 * w + t1 * c.u + t2 * c.v;
            let (du1, dv1) = (t1.x - t0.x, t1.y - t0.y);
            let (du2, dv2) = (t2.x - t0.x, t2.y - t0.y);
            let det = du1 * dv2 - dv1 * du2;
            let dpdu = if det.abs() > T::lit(1e-12) {
                let local = (e1 * dv2 - e2 * dv1) / det;
                m.transform_direction(local).try_normalize()
            } else {
                None
            };
            (uv, dpdu)
        }
        None => (Vec2::zero(), None),
    };

    Hit {
        t: c.t,
        instance: c.instance,
        triangle: c.triangle,
        u: c.u,
        v: c.v,
        position: ray.at(c.t),
        geometric_normal,
        shading_normal,
        uv,
        dpdu,
        entity_id: inst.entity_id(),
        time: ray.time,
    }
}

/// Reference intersector: tests every triangle of every instance. Uses the
/// same triangle test and tie-breaking as [`Ias::intersect`].
pub fn brute_force_intersect<T: Real>(instances: &[Instance<T>], ray: &Ray<T>) -> Option<Hit<T>> {
    let mut best: Option<Candidate<T>> = None;
    for (i, inst) in instances.iter().enumerate() {
        let (o, d) = inst.object_ray(ray);
        let mesh = inst.mesh();
        for tri in 0..mesh.triangle_count() {
            let [p0, p1, p2] = mesh.triangle(tri);
            if let Some((t, u, v)) = intersect_triangle(o, d, p0, p1, p2, ray.t_min, ray.t_max) {
                if better(t, i as u32, tri as u32, &best) {
                    best = Some(Candidate {
                        t,
                        instance: i as u32,
                        triangle: tri as u32,
                        u,
                        v,
                    });
                }
            }
        }
    }
    best.map(|c| finish_hit(instances, ray, c))
}
