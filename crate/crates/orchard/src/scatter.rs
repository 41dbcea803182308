//! Fruit and leaf placement on a naked skeleton.
//!
//! Counts are Poisson in (density x eligible branch length) so the
//! statistical tests have exact known variance; positions are uniform over
//! eligible arc length. No collision resolution is attempted — ground truth
//! is per-primitive, so overlaps cost nothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{vec3, Quat, Vec3};
use crate::mesh::{LabeledMesh, LabeledTriangle, SemanticClass};
use crate::rng::RandomStream;
use crate::treegen::TreeSkeleton;

/// Densities are per meter of eligible branch length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatterParams {
    pub fruit_density: f64,
    pub leaf_density: f64,
    pub fruit_radius_mean: f64,
    /// Relative radius jitter in [0, 1).
    pub fruit_radius_jitter: f64,
    pub leaf_size_mean: f64,
    pub leaf_size_jitter: f64,
    /// Lowest branch level that may carry attachments.
    pub eligible_min_level: u32,
    /// Fruits hang this far below their anchor, along world -Z.
    pub fruit_stem_length: f64,
}

impl Default for ScatterParams {
    fn default() -> Self {
        ScatterParams {
            fruit_density: 0.5,
            leaf_density: 6.0,
            fruit_radius_mean: 0.04,
            fruit_radius_jitter: 0.2,
            leaf_size_mean: 0.09,
            leaf_size_jitter: 0.3,
            eligible_min_level: 1,
            fruit_stem_length: 0.03,
        }
    }
}

impl ScatterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.fruit_density >= 0.0 && self.fruit_density.is_finite()) {
            return Err(Error::invalid_param(
                "scatter.fruit_density",
                "must be >= 0",
            ));
        }
        if !(self.leaf_density >= 0.0 && self.leaf_density.is_finite()) {
            return Err(Error::invalid_param("scatter.leaf_density", "must be >= 0"));
        }
        if !(self.fruit_radius_mean > 0.0) {
            return Err(Error::invalid_param(
                "scatter.fruit_radius_mean",
                "must be > 0",
            ));
        }
        if !(self.leaf_size_mean > 0.0) {
            return Err(Error::invalid_param(
                "scatter.leaf_size_mean",
                "must be > 0",
            ));
        }
        if !(0.0..1.0).contains(&self.fruit_radius_jitter) {
            return Err(Error::invalid_param(
                "scatter.fruit_radius_jitter",
                "must lie in [0, 1)",
            ));
        }
        if !(0.0..1.0).contains(&self.leaf_size_jitter) {
            return Err(Error::invalid_param(
                "scatter.leaf_size_jitter",
                "must lie in [0, 1)",
            ));
        }
        if !(self.fruit_stem_length >= 0.0) {
            return Err(Error::invalid_param(
                "scatter.fruit_stem_length",
                "must be >= 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttachmentKind {
    Fruit,
    Leaf,
}

/// One placed fruit or leaf, still abstract (no geometry yet).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attachment {
    pub kind: AttachmentKind,
    pub branch_id: usize,
    /// Arc-length fraction along the branch.
    pub t: f64,
    /// Point on the branch axis at `t`.
    pub anchor: Vec3,
    pub orientation: Quat,
    /// Fruit radius or leaf edge length, meters.
    pub scale: f64,
    /// Hang distance below the anchor along world -Z (zero for leaves).
    /// Recorded here so instantiation needs no scatter parameters.
    pub stem: f64,
}

/// Draw fruit and leaf placements from `stream`.
///
/// Fruit and leaf counts are `Poisson(density x eligible_length)`; each
/// placement is uniform over the eligible arc length. Leaves get uniformly
/// random orientations; fruits keep the identity orientation and hang along
/// world -Z when instantiated.
pub fn scatter_attachments(
    skeleton: &TreeSkeleton,
    params: &ScatterParams,
    stream: &mut RandomStream,
) -> Result<Vec<Attachment>> {
    params.validate()?;

    // Eligible branches and the cumulative-length table used to map a
    // uniform arc-length draw back to (branch, t).
    let eligible: Vec<(usize, f64)> = skeleton
        .branches
        .iter()
        .enumerate()
        .filter(|(_, b)| b.level >= params.eligible_min_level)
        .map(|(i, b)| (i, b.length()))
        .collect();
    let total: f64 = eligible.iter().map(|(_, l)| l).sum();
    if total <= 0.0 {
        return Ok(Vec::new());
    }
    let mut cumulative = Vec::with_capacity(eligible.len());
    let mut acc = 0.0;
    for &(_, len) in &eligible {
        acc += len;
        cumulative.push(acc);
    }

    let fruit_count = stream.poisson(params.fruit_density * total);
    let leaf_count = stream.poisson(params.leaf_density * total);

    let mut out = Vec::with_capacity((fruit_count + leaf_count) as usize);
    for i in 0..fruit_count + leaf_count {
        let kind = if i < fruit_count {
            AttachmentKind::Fruit
        } else {
            AttachmentKind::Leaf
        };
        let s = stream.uniform(0.0, total);
        let slot = cumulative
            .partition_point(|&c| c < s)
            .min(eligible.len() - 1);
        let (branch_id, branch_len) = eligible[slot];
        let offset = s - if slot == 0 { 0.0 } else { cumulative[slot - 1] };
        let t = if branch_len > 0.0 {
            (offset / branch_len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (anchor, _, _) = skeleton.branches[branch_id].sample(t);

        let (orientation, scale, stem) = match kind {
            AttachmentKind::Fruit => {
                let jitter =
                    stream.uniform(-params.fruit_radius_jitter, params.fruit_radius_jitter);
                (
                    Quat::IDENTITY,
                    params.fruit_radius_mean * (1.0 + jitter),
                    params.fruit_stem_length,
                )
            }
            AttachmentKind::Leaf => {
                let q = stream.unit_quaternion();
                let jitter = stream.uniform(-params.leaf_size_jitter, params.leaf_size_jitter);
                (q, params.leaf_size_mean * (1.0 + jitter), 0.0)
            }
        };
        out.push(Attachment {
            kind,
            branch_id,
            t,
            anchor,
            orientation,
            scale,
            stem,
        });
    }
    Ok(out)
}

/// Turn placements into labeled geometry: icospheres for fruits, two-triangle
/// cards for leaves.
pub fn instantiate_attachments(attachments: &[Attachment], subdivision: u32) -> LabeledMesh {
    let template = icosphere(subdivision);
    let mut mesh = LabeledMesh::new();
    for a in attachments {
        match a.kind {
            AttachmentKind::Fruit => {
                let center = a.anchor + vec3(0.0, 0.0, -a.stem);
                for tri in &template {
                    mesh.push(LabeledTriangle::new(
                        center + tri[0] * a.scale,
                        center + tri[1] * a.scale,
                        center + tri[2] * a.scale,
                        SemanticClass::Fruit,
                    ));
                }
            }
            AttachmentKind::Leaf => {
                // Card grows outward from the anchor along local +Y.
                let h = a.scale * 0.5;
                let corners = [
                    vec3(-h, 0.0, 0.0),
                    vec3(h, 0.0, 0.0),
                    vec3(h, a.scale, 0.0),
                    vec3(-h, a.scale, 0.0),
                ]
                .map(|c| a.anchor + a.orientation.rotate(c));
                mesh.push(LabeledTriangle::new(
                    corners[0],
                    corners[1],
                    corners[2],
                    SemanticClass::Leaf,
                ));
                mesh.push(LabeledTriangle::new(
                    corners[0],
                    corners[2],
                    corners[3],
                    SemanticClass::Leaf,
                ));
            }
        }
    }
    mesh
}

/// Unit icosphere triangles at the given subdivision level
/// (20 * 4^subdivision triangles, every vertex on the unit sphere).
pub fn icosphere(subdivision: u32) -> Vec<[Vec3; 3]> {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let verts: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .into_iter()
    .map(|(x, y, z)| vec3(x, y, z).normalized())
    .collect();
    #[rustfmt::skip]
    let faces: [[usize; 3]; 20] = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    let mut tris: Vec<[Vec3; 3]> = faces
        .iter()
        .map(|f| [verts[f[0]], verts[f[1]], verts[f[2]]])
        .collect();
    for _ in 0..subdivision {
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = ((a + b) * 0.5).normalized();
            let bc = ((b + c) * 0.5).normalized();
            let ca = ((c + a) * 0.5).normalized();
            next.push([a, ab, ca]);
            next.push([ab, b, bc]);
            next.push([ca, bc, c]);
            next.push([ab, bc, ca]);
        }
        tris = next;
    }
    tris
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::point_segment_distance;
    use crate::treegen::{generate_skeleton, TreeParams};

    fn test_skeleton() -> TreeSkeleton {
        generate_skeleton(
            &TreeParams {
                levels: 3,
                ..TreeParams::default()
            },
            77,
        )
        .unwrap()
    }

    #[test]
    fn zero_densities_empty() {
        let skel = test_skeleton();
        let params = ScatterParams {
            fruit_density: 0.0,
            leaf_density: 0.0,
            ..Default::default()
        };
        let mut stream = RandomStream::new(1);
        assert!(scatter_attachments(&skel, &params, &mut stream)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn determinism_per_stream() {
        let skel = test_skeleton();
        let params = ScatterParams::default();
        let a = scatter_attachments(&skel, &params, &mut RandomStream::new(5)).unwrap();
        let b = scatter_attachments(&skel, &params, &mut RandomStream::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn eligibility_respected() {
        let skel = test_skeleton();
        let params = ScatterParams {
            eligible_min_level: 2,
            ..Default::default()
        };
        let list = scatter_attachments(&skel, &params, &mut RandomStream::new(9)).unwrap();
        assert!(!list.is_empty());
        for a in &list {
            assert!(skel.branches[a.branch_id].level >= 2);
        }
    }

    #[test]
    fn anchors_sit_on_branch_axes() {
        let skel = test_skeleton();
        let list = scatter_attachments(&skel, &ScatterParams::default(), &mut RandomStream::new(2))
            .unwrap();
        assert!(!list.is_empty());
        for a in &list {
            // Oracle: distance from the anchor to the branch polyline.
            let d = skel.branches[a.branch_id]
                .segments
                .iter()
                .map(|s| point_segment_distance(a.anchor, s.start, s.end))
                .fold(f64::INFINITY, f64::min);
            assert!(d <= 1e-9, "anchor {d} off axis");
            assert!(a.scale > 0.0);
        }
    }

    #[test]
    fn poisson_mean_over_seeds() {
        // density 2/m on a known eligible length; mean count within 3 sigma.
        let skel = test_skeleton();
        let eligible: f64 = skel
            .branches
            .iter()
            .filter(|b| b.level >= 1)
            .map(|b| b.length())
            .sum();
        let params = ScatterParams {
            fruit_density: 2.0,
            leaf_density: 0.0,
            ..Default::default()
        };
        let n = 2000;
        let mut total = 0u64;
        for seed in 0..n {
            let list = scatter_attachments(&skel, &params, &mut RandomStream::new(seed)).unwrap();
            total += list.len() as u64;
        }
        let lambda = 2.0 * eligible;
        let mean = total as f64 / n as f64;
        let sigma = lambda.sqrt() / (n as f64).sqrt();
        assert!(
            (mean - lambda).abs() < 3.0 * sigma,
            "mean {mean} lambda {lambda}"
        );
    }

    #[test]
    fn icosahedron_fruit_triangles() {
        let a = Attachment {
            kind: AttachmentKind::Fruit,
            branch_id: 0,
            t: 0.5,
            anchor: vec3(0.0, 0.0, 1.0),
            orientation: Quat::IDENTITY,
            scale: 0.05,
            stem: 0.03,
        };
        let mesh = instantiate_attachments(&[a], 0);
        assert_eq!(mesh.len(), 20);
        assert!(mesh
            .triangles
            .iter()
            .all(|t| t.class == SemanticClass::Fruit));
    }

    #[test]
    fn fruit_subdivision_two() {
        let a = Attachment {
            kind: AttachmentKind::Fruit,
            branch_id: 0,
            t: 0.0,
            anchor: Vec3::ZERO,
            orientation: Quat::IDENTITY,
            scale: 0.1,
            stem: 0.05,
        };
        let mesh = instantiate_attachments(&[a], 2);
        assert_eq!(mesh.len(), 320);
        // Every vertex must sit on the sphere around the dropped center.
        let center = vec3(0.0, 0.0, -0.05);
        for t in &mesh.triangles {
            for v in t.vertices {
                assert!(((v - center).length() - 0.1).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn leaf_card_two_coplanar_triangles() {
        let mut stream = RandomStream::new(4);
        let a = Attachment {
            kind: AttachmentKind::Leaf,
            branch_id: 0,
            t: 0.2,
            anchor: vec3(1.0, 2.0, 3.0),
            orientation: stream.unit_quaternion(),
            scale: 0.08,
            stem: 0.0,
        };
        let mesh = instantiate_attachments(&[a], 0);
        assert_eq!(mesh.len(), 2);
        assert!(mesh
            .triangles
            .iter()
            .all(|t| t.class == SemanticClass::Leaf));
        let n0 = mesh.triangles[0].raw_normal().normalized();
        let n1 = mesh.triangles[1].raw_normal().normalized();
        assert!(n0.dot(n1).abs() > 1.0 - 1e-9, "normals not parallel");
    }

    #[test]
    fn label_purity() {
        let skel = test_skeleton();
        let list = scatter_attachments(&skel, &ScatterParams::default(), &mut RandomStream::new(6))
            .unwrap();
        let mesh = instantiate_attachments(&list, 1);
        for t in &mesh.triangles {
            assert!(matches!(
                t.class,
                SemanticClass::Fruit | SemanticClass::Leaf
            ));
        }
    }

    #[test]
    fn position_uniformity_ks() {
        // Single straight branch: the t values of many placements must be
        // uniform. KS threshold 0.0163 at n = 10^4 (alpha ~ 0.01).
        let p = TreeParams {
            levels: 2,
            children_min: 1,
            children_max: 1,
            curvature_deg: 0.0,
            ..TreeParams::default()
        };
        let skel = generate_skeleton(&p, 50).unwrap();
        let params = ScatterParams {
            fruit_density: 0.0,
            leaf_density: 10_000.0 / skel.branches[1].length(),
            ..Default::default()
        };
        let mut stream = RandomStream::new(123);
        let mut ts: Vec<f64> = Vec::new();
        while ts.len() < 10_000 {
            let list = scatter_attachments(&skel, &params, &mut stream).unwrap();
            ts.extend(list.iter().map(|a| a.t));
        }
        ts.truncate(10_000);
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = ts.len() as f64;
        let ks = ts
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let hi = ((i + 1) as f64 / n - t).abs();
                let lo = (t - i as f64 / n).abs();
                hi.max(lo)
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.0163, "KS statistic {ks}");
    }
}
