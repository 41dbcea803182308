//! Bounding volume hierarchy over scene triangles.
//!
//! Median split on the longest centroid axis, leaves hold at most four
//! triangles. Traversal prunes a node only when its entry distance exceeds
//! the current best hit, and leaf tests use the same comparator as the
//! brute-force scan (nearest t, ties to the lowest triangle index), so BVH
//! and brute-force intersection agree exactly.

use crate::error::{Error, Result};
use crate::math::{vec3, Aabb, Vec3};
use crate::scene::SceneTriangle;

use super::{ray_triangle, Hit, Ray};

/// Absolute box padding; swamps floating-point rounding in the slab test
/// so a box never excludes a triangle it geometrically contains.
const BOX_PAD: f64 = 1e-9;

/// Leaf capacity.
const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct BvhNode {
    bounds: Aabb,
    /// Leaf: index into `order`. Internal: right child (left child is the
    /// node right after this one).
    arg: u32,
    /// Leaf triangle count; 0 marks an internal node.
    count: u32,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<BvhNode>,
    order: Vec<u32>,
}

fn triangle_bounds(t: &SceneTriangle) -> Aabb {
    let mut b = Aabb::EMPTY;
    for v in t.vertices {
        b.grow(v);
    }
    let pad = vec3(BOX_PAD, BOX_PAD, BOX_PAD);
    Aabb {
        min: b.min - pad,
        max: b.max + pad,
    }
}

fn centroid(t: &SceneTriangle) -> Vec3 {
    (t.vertices[0] + t.vertices[1] + t.vertices[2]) / 3.0
}

pub fn build_bvh(triangles: &[SceneTriangle]) -> Result<Bvh> {
    if triangles.is_empty() {
        return Err(Error::Assembly(
            "cannot build a BVH over zero triangles".into(),
        ));
    }
    let mut indices: Vec<u32> = (0..triangles.len() as u32).collect();
    let mut bvh = Bvh {
        nodes: Vec::with_capacity(triangles.len() / LEAF_SIZE * 2 + 1),
        order: Vec::with_capacity(triangles.len()),
    };
    build_range(triangles, &mut indices, &mut bvh);
    Ok(bvh)
}

fn build_range(triangles: &[SceneTriangle], idx: &mut [u32], bvh: &mut Bvh) -> u32 {
    let node_id = bvh.nodes.len() as u32;
    bvh.nodes.push(BvhNode {
        bounds: Aabb::EMPTY,
        arg: 0,
        count: 0,
    });

    let mut bounds = Aabb::EMPTY;
    let mut centroid_bounds = Aabb::EMPTY;
    for &i in idx.iter() {
        bounds = bounds.union(triangle_bounds(&triangles[i as usize]));
        centroid_bounds.grow(centroid(&triangles[i as usize]));
    }

    if idx.len() <= LEAF_SIZE {
        let start = bvh.order.len() as u32;
        bvh.order.extend_from_slice(idx);
        bvh.nodes[node_id as usize] = BvhNode {
            bounds,
            arg: start,
            count: idx.len() as u32,
        };
        return node_id;
    }

    let axis = centroid_bounds.longest_axis();
    let mid = idx.len() / 2;
    // Total order (coordinate, then index) keeps the split deterministic.
    idx.select_nth_unstable_by(mid, |&a, &b| {
        let ca = centroid(&triangles[a as usize]).axis(axis);
        let cb = centroid(&triangles[b as usize]).axis(axis);
        ca.partial_cmp(&cb)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let (lo, hi) = idx.split_at_mut(mid);
    build_range(triangles, lo, bvh);
    let right = build_range(triangles, hi, bvh);
    bvh.nodes[node_id as usize] = BvhNode {
        bounds,
        arg: right,
        count: 0,
    };
    node_id
}

/// Slab test returning the parametric entry/exit interval, or None.
#[inline]
fn slab(bounds: &Aabb, origin: Vec3, inv_dir: Vec3) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for axis in 0..3 {
        let a = (bounds.min.axis(axis) - origin.axis(axis)) * inv_dir.axis(axis);
        let b = (bounds.max.axis(axis) - origin.axis(axis)) * inv_dir.axis(axis);
        // f64::min/max drop a NaN operand (0 * inf at a slab touch).
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    if t0 <= t1 {
        Some((t0, t1))
    } else {
        None
    }
}

impl Bvh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn intersect(&self, triangles: &[SceneTriangle], ray: &Ray) -> Option<Hit> {
        let inv_dir = vec3(
            1.0 / ray.direction.x,
            1.0 / ray.direction.y,
            1.0 / ray.direction.z,
        );
        let mut best: Option<Hit> = None;
        let mut best_t = ray.t_max;
        let mut stack = [0u32; 64];
        let mut depth = 1usize;
        stack[0] = 0;
        while depth > 0 {
            depth -= 1;
            let node = &self.nodes[stack[depth] as usize];
            // Prune only when the box cannot contain a hit at or before the
            // current best (entry strictly beyond best_t, or exit before
            // t_min); never on an equal-t boundary, which ties must inspect.
            let Some((t0, t1)) = slab(&node.bounds, ray.origin, inv_dir) else {
                continue;
            };
            if t0 > best_t || t1 < ray.t_min {
                continue;
            }
            if node.count > 0 {
                for &tri_index in &self.order[node.arg as usize..(node.arg + node.count) as usize] {
                    test_triangle(triangles, tri_index as usize, ray, &mut best, &mut best_t);
                }
            } else {
                let left = stack[depth] + 1;
                let right = node.arg;
                // Descend into the nearer child first.
                let tl = slab(&self.nodes[left as usize].bounds, ray.origin, inv_dir);
                let tr = slab(&self.nodes[right as usize].bounds, ray.origin, inv_dir);
                let (first, second) = match (tl, tr) {
                    (Some((a, _)), Some((b, _))) if b < a => (right, left),
                    _ => (left, right),
                };
                stack[depth] = second;
                stack[depth + 1] = first;
                depth += 2;
                debug_assert!(depth < stack.len());
            }
        }
        best
    }

    /// Structural checks used by tests: parent boxes contain child boxes
    /// and every triangle index appears in exactly one leaf.
    pub fn check_invariants(&self, triangle_count: usize) -> Result<()> {
        let mut seen = vec![false; triangle_count];
        for (i, node) in self.nodes.iter().enumerate() {
            if node.count > 0 {
                for &t in &self.order[node.arg as usize..(node.arg + node.count) as usize] {
                    if seen[t as usize] {
                        return Err(Error::Assembly(format!("triangle {t} in two leaves")));
                    }
                    seen[t as usize] = true;
                }
            } else {
                for child in [i as u32 + 1, node.arg] {
                    let cb = self.nodes[child as usize].bounds;
                    if !node.bounds.contains(cb) {
                        return Err(Error::Assembly(format!(
                            "node {i} does not contain child {child}"
                        )));
                    }
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Assembly(format!(
                "triangle {missing} not in any leaf"
            )));
        }
        Ok(())
    }
}

/// Brute-force nearest hit; the oracle the BVH must agree with exactly.
pub fn intersect_brute(triangles: &[SceneTriangle], ray: &Ray) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    let mut best_t = ray.t_max;
    for index in 0..triangles.len() {
        test_triangle(triangles, index, ray, &mut best, &mut best_t);
    }
    best
}

#[inline]
fn test_triangle(
    triangles: &[SceneTriangle],
    index: usize,
    ray: &Ray,
    best: &mut Option<Hit>,
    best_t: &mut f64,
) {
    let tri = &triangles[index];
    if let Some((t, u, v)) = ray_triangle(ray, tri) {
        let closer = match best {
            Some(b) => t < b.t || (t == b.t && index < b.triangle_index),
            None => true,
        };
        if closer && t <= *best_t {
            *best_t = t;
            *best = Some(Hit {
                t,
                triangle_index: index,
                barycentrics: [1.0 - u - v, u, v],
                normal: tri.normal,
                class: tri.class,
            });
        }
    }
}
