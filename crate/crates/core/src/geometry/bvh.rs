use std::sync::Arc;

use crate::math::{Real, Vec3};

use super::{Aabb, GeometryError, Mesh};

pub const BVH_BINS: usize = 16;
pub const BVH_MAX_LEAF: usize = 4;
pub const BVH_MAX_DEPTH: usize = 64;
pub const COST_TRAVERSE: f64 = 1.0;
pub const COST_INTERSECT: f64 = 1.5;

/// Flattened BVH node. Leaves (`count > 0`) cover `order[first..first + count]`;
/// interior nodes have children at `first` and `first + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BvhNode<T> {
    pub bounds: Aabb<T>,
    pub first: u32,
    pub count: u32,
}

impl<T> BvhNode<T> {
    #[inline]
    pub fn is_leaf(&self) -> bool {
        self.count > 0
    }
}

/// Binned-SAH bounding volume hierarchy over a set of primitive bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct Bvh<T> {
    nodes: Vec<BvhNode<T>>,
    order: Vec<u32>,
    depth: usize,
}

struct Build<T> {
    node: usize,
    start: usize,
    end: usize,
    depth: usize,
    _t: std::marker::PhantomData<T>,
}

impl<T: Real> Bvh<T> {
    /// Builds over `bounds`. Deterministic for a given input; an empty input
    /// yields an empty tree.
    pub fn build(bounds: &[Aabb<T>]) -> Self {
        let mut order: Vec<u32> = (0..bounds.len() as u32).collect();
        if bounds.is_empty() {
            return Self {
                nodes: Vec::new(),
                order,
                depth: 0,
            };
        }
        let centroids: Vec<Vec3<T>> = bounds.iter().map(|b| b.centroid()).collect();
        let mut nodes = vec![BvhNode {
            bounds: Aabb::empty(),
            first: 0,
            count: 0,
        }];
        let mut depth = 0;
        let mut stack = vec![Build::<T> {
            node: 0,
            start: 0,
            end: bounds.len(),
            depth: 1,
            _t: Default::default(),
        }];
        while let Some(job) = stack.pop() {
            depth = depth.max(job.depth);
            let items = &mut order[job.start..job.end];
            let node_bounds = items
                .iter()
                .fold(Aabb::empty(), |b, &i| b.union(bounds[i as usize]));
            nodes[job.node].bounds = node_bounds;
            let count = items.len();
            if count <= BVH_MAX_LEAF || job.depth >= BVH_MAX_DEPTH {
                nodes[job.node].first = job.start as u32;
                nodes[job.node].count = count as u32;
                continue;
            }
            let mid = job.start + split(items, bounds, &centroids, &node_bounds);
            let left = nodes.len();
            nodes.push(BvhNode {
                bounds: Aabb::empty(),
                first: 0,
                count: 0,
            });
            nodes.push(BvhNode {
                bounds: Aabb::empty(),
                first: 0,
                count: 0,
            });
            nodes[job.node].first = left as u32;
            nodes[job.node].count = 0;
            // right first so the left subtree is laid out next in depth-first order
            stack.push(Build {
                node: left + 1,
                start: mid,
                end: job.end,
                depth: job.depth + 1,
                _t: Default::default(),
            });
            stack.push(Build {
                node: left,
                start: job.start,
                end: mid,
                depth: job.depth + 1,
                _t: Default::default(),
            });
        }
        Self { nodes, order, depth }
    }

    pub fn nodes(&self) -> &[BvhNode<T>] {
        &self.nodes
    }

    /// Primitive permutation referenced by leaf ranges.
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn bounds(&self) -> Aabb<T> {
        self.nodes.first().map(|n| n.bounds).unwrap_or_else(Aabb::empty)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Visits leaf primitives in near-to-far node order. `visit` receives the
    /// primitive index and may shrink `t_max`; returning `true` stops the walk.
    #[inline]
    pub fn traverse<F>(&self, origin: Vec3<T>, inv_dir: Vec3<T>, t_min: T, t_max: &mut T, mut visit: F)
    where
        F: FnMut(u32, &mut T) -> bool,
    {
        if self.nodes.is_empty() {
            return;
        }
        if self.nodes[0].bounds.intersect(origin, inv_dir, t_min, *t_max).is_none() {
            return;
        }
        let mut stack = [0u32; BVH_MAX_DEPTH * 2];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if node.is_leaf() {
                let first = node.first as usize;
                for &prim in &self.order[first..first + node.count as usize] {
                    if visit(prim, t_max) {
                        return;
                    }
                }
                continue;
            }
            let l = node.first as usize;
            let hit_l = self.nodes[l].bounds.intersect(origin, inv_dir, t_min, *t_max);
            let hit_r = self.nodes[l + 1].bounds.intersect(origin, inv_dir, t_min, *t_max);
            match (hit_l, hit_r) {
                (Some((tl, _)), Some((tr, _))) => {
                    // push the farther child first
                    let (near, far) = if tr < tl { (l + 1, l) } else { (l, l + 1) };
                    stack[sp] = far as u32;
                    stack[sp + 1] = near as u32;
                    sp += 2;
                }
                (Some(_), None) => {
                    stack[sp] = l as u32;
                    sp += 1;
                }
                (None, Some(_)) => {
                    stack[sp] = (l + 1) as u32;
                    sp += 1;
                }
                (None, None) => {}
            }
        }
    }
}

/// Reorders `items` and returns the split position (exclusive end of the left half).
fn split<T: Real>(items: &mut [u32], bounds: &[Aabb<T>], centroids: &[Vec3<T>], node_bounds: &Aabb<T>) -> usize {
    let cbounds = Aabb::from_points(items.iter().map(|&i| centroids[i as usize]));
    let extent = cbounds.diagonal();
    let parent_area = node_bounds.surface_area();

    let mut best: Option<(T, usize, usize)> = None; // (cost, axis, last bin of the left side)
    for axis in 0..3 {
        if !(extent[axis] > T::zero()) {
            continue;
        }
        let mut bin_bounds = [Aabb::<T>::empty(); BVH_BINS];
        let mut bin_counts = [0usize; BVH_BINS];
        for &i in items.iter() {
            let b = bin_of(centroids[i as usize][axis], cbounds.min[axis], extent[axis]);
            bin_counts[b] += 1;
            bin_bounds[b] = bin_bounds[b].union(bounds[i as usize]);
        }
        let mut right_area = [T::zero(); BVH_BINS];
        let mut right_count = [0usize; BVH_BINS];
        let mut acc = Aabb::empty();
        let mut n = 0;
        for b in (1..BVH_BINS).rev() {
            acc = acc.union(bin_bounds[b]);
            n += bin_counts[b];
            right_area[b] = acc.surface_area();
            right_count[b] = n;
        }
        let mut acc = Aabb::empty();
        let mut n = 0;
        for b in 0..BVH_BINS - 1 {
            acc = acc.union(bin_bounds[b]);
            n += bin_counts[b];
            let nr = right_count[b + 1];
            if n == 0 || nr == 0 {
                continue;
            }
            let cost = T::lit(COST_TRAVERSE)
                + T::lit(COST_INTERSECT)
                    * (acc.surface_area() * T::lit(n as f64) + right_area[b + 1] * T::lit(nr as f64))
                    / parent_area.max(T::min_positive_value());
            if best.is_none_or(|(c, _, _)| cost < c) {
                best = Some((cost, axis, b));
            }
        }
    }

    match best {
        Some((_, axis, last_left)) => {
            let (lo, ext) = (cbounds.min[axis], extent[axis]);
            let (left, right): (Vec<u32>, Vec<u32>) = items
                .iter()
                .partition(|&&i| bin_of(centroids[i as usize][axis], lo, ext) <= last_left);
            let mid = left.len();
            items[..mid].copy_from_slice(&left);
            items[mid..].copy_from_slice(&right);
            mid
        }
        // all centroids coincide: split the range in half
        None => items.len() / 2,
    }
}

#[inline]
fn bin_of<T: Real>(c: T, lo: T, extent: T) -> usize {
    let b = ((c - lo) * T::lit(BVH_BINS as f64) / extent).to_usize().unwrap_or(0);
    b.min(BVH_BINS - 1)
}

/// Bottom-level structure: a mesh and the BVH over its triangles.
#[derive(Clone, Debug)]
pub struct Blas<T> {
    mesh: Arc<Mesh<T>>,
    bvh: Bvh<T>,
}

impl<T: Real> Blas<T> {
    pub fn build(mesh: Arc<Mesh<T>>) -> Result<Self, GeometryError> {
        if mesh.triangle_count() == 0 {
            return Err(GeometryError::EmptyMesh);
        }
        let bounds: Vec<Aabb<T>> = (0..mesh.triangle_count()).map(|i| mesh.triangle_bounds(i)).collect();
        let bvh = Bvh::build(&bounds);
        Ok(Self { mesh, bvh })
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn bvh(&self) -> &Bvh<T> {
        &self.bvh
    }

    pub fn bounds(&self) -> Aabb<T> {
        self.bvh.bounds()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;

    #[test]
    fn single_triangle_is_one_leaf() {
        let mesh = Arc::new(
            Mesh::<f64>::from_arrays(
                vec![Vec3::zero(), Vec3::new(1.0, 0.0, 0.5), Vec3::new(0.0, 2.0, 0.0)],
                vec![[0, 1, 2]],
                None,
                None,
            )
            .unwrap(),
        );
        let blas = Blas::build(mesh.clone()).unwrap();
        let nodes = blas.bvh().nodes();
        assert_eq!(nodes.len(), 1);
        assert!(nodes[0].is_leaf());
        assert_eq!(nodes[0].bounds, mesh.triangle_bounds(0));
    }

    #[test]
    fn leaves_partition_primitives_and_contain_them() {
        let mesh = Arc::new(Mesh::<f64>::sphere(1.0, 40).unwrap());
        let blas = Blas::build(mesh.clone()).unwrap();
        let bvh = blas.bvh();
        let mut seen = vec![0usize; mesh.triangle_count()];
        for (i, node) in bvh.nodes().iter().enumerate() {
            if node.is_leaf() {
                assert!(node.count as usize <= BVH_MAX_LEAF);
                for &p in &bvh.order()[node.first as usize..(node.first + node.count) as usize] {
                    seen[p as usize] += 1;
                    assert!(node.bounds.contains(&mesh.triangle_bounds(p as usize)), "leaf {i}");
                }
            } else {
                let l = node.first as usize;
                assert!(node.bounds.contains(&bvh.nodes()[l].bounds));
                assert!(node.bounds.contains(&bvh.nodes()[l + 1].bounds));
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert!(bvh.depth() <= BVH_MAX_DEPTH);
    }

    #[test]
    fn coincident_centroids_still_split() {
        let b = Aabb::new(Vec3::<f64>::zero(), Vec3::one());
        let bvh = Bvh::build(&vec![b; 37]);
        for node in bvh.nodes() {
            if node.is_leaf() {
                assert!(node.count as usize <= BVH_MAX_LEAF);
            }
        }
    }

    #[test]
    fn build_is_deterministic() {
        let mesh = Arc::new(Mesh::<f32>::sphere(1.0, 24).unwrap());
        let a = Blas::build(mesh.clone()).unwrap();
        let b = Blas::build(mesh).unwrap();
        assert_eq!(a.bvh(), b.bvh());
    }
}
