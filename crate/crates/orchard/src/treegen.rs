//! Parametric tree skeletons and their tube tessellation.
//!
//! A skeleton is grown recursively: the trunk is level 0, each branch spawns
//! a uniform number of children on its distal portion, and lengths/radii
//! shrink geometrically per level. The model keeps the classic recursive
//! parameter set (branching counts, length and radius ratios, branch angles,
//! per-branch curvature) and nothing more.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{orthonormal_basis, Vec3};
use crate::mesh::{LabeledMesh, LabeledTriangle, SemanticClass};
use crate::rng::RandomStream;

/// Fraction of a branch's base radius left at its tip (linear taper).
pub const TIP_TAPER: f64 = 0.25;

/// Relative length jitter applied per branch: lengths are scaled by a
/// uniform draw from `[1 - LENGTH_JITTER, 1 + LENGTH_JITTER]`.
pub const LENGTH_JITTER: f64 = 0.1;

/// Children attach on this distal fraction of the parent.
pub const ATTACH_RANGE: (f64, f64) = (0.3, 1.0);

/// Recursive growth parameters. Angles are degrees, lengths meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TreeParams {
    /// Recursion depth; the trunk alone is `levels = 1`.
    pub levels: u32,
    pub trunk_length: f64,
    /// Child length = parent-level length x this ratio.
    pub length_ratio: f64,
    pub trunk_radius: f64,
    /// Child base radius = parent radius at the attachment point x this ratio.
    pub radius_ratio: f64,
    pub children_min: u32,
    pub children_max: u32,
    /// Mean angle between a child and its parent axis. A negative sign aims
    /// branches upward instead of downward (see `generate_skeleton`).
    pub down_angle_deg: f64,
    pub down_angle_jitter_deg: f64,
    /// Total bend accumulated along one branch.
    pub curvature_deg: f64,
    pub segments_per_branch: u32,
    /// Azimuthal advance between successive children of one parent.
    pub phyllotaxis_deg: f64,
    /// Cross-section vertex count used by `tube_mesh`.
    pub sides: u32,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            levels: 4,
            trunk_length: 2.0,
            length_ratio: 0.6,
            trunk_radius: 0.12,
            radius_ratio: 0.65,
            children_min: 5,
            children_max: 7,
            down_angle_deg: 35.0,
            down_angle_jitter_deg: 10.0,
            curvature_deg: 25.0,
            segments_per_branch: 8,
            phyllotaxis_deg: 137.5,
            sides: 8,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.levels < 1 {
            return Err(Error::invalid_param("tree.levels", "must be >= 1"));
        }
        if !(self.trunk_length > 0.0) {
            return Err(Error::invalid_param("tree.trunk_length", "must be > 0"));
        }
        if !(self.length_ratio > 0.0 && self.length_ratio <= 1.0) {
            return Err(Error::invalid_param(
                "tree.length_ratio",
                "must lie in (0, 1]",
            ));
        }
        if !(self.trunk_radius > 0.0) {
            return Err(Error::invalid_param("tree.trunk_radius", "must be > 0"));
        }
        if !(self.radius_ratio > 0.0 && self.radius_ratio <= 1.0) {
            return Err(Error::invalid_param(
                "tree.radius_ratio",
                "must lie in (0, 1]",
            ));
        }
        if self.children_min < 1 {
            return Err(Error::invalid_param("tree.children_min", "must be >= 1"));
        }
        if self.children_min > self.children_max {
            return Err(Error::invalid_param(
                "tree.children_max",
                "must be >= children_min",
            ));
        }
        if self.segments_per_branch < 1 {
            return Err(Error::invalid_param(
                "tree.segments_per_branch",
                "must be >= 1",
            ));
        }
        if self.sides < 3 {
            return Err(Error::invalid_param("tree.sides", "must be >= 3"));
        }
        for (field, v) in [
            ("tree.down_angle_deg", self.down_angle_deg),
            ("tree.down_angle_jitter_deg", self.down_angle_jitter_deg),
            ("tree.curvature_deg", self.curvature_deg),
            ("tree.phyllotaxis_deg", self.phyllotaxis_deg),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid_param(field, "must be finite"));
            }
        }
        Ok(())
    }
}

/// One straight tapered piece of a branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSegment {
    pub start: Vec3,
    pub end: Vec3,
    pub radius_start: f64,
    pub radius_end: f64,
}

impl BranchSegment {
    pub fn length(&self) -> f64 {
        (self.end - self.start).length()
    }

    pub fn direction(&self) -> Vec3 {
        (self.end - self.start).normalized()
    }
}

/// A chain of segments plus its place in the hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub level: u32,
    pub segments: Vec<BranchSegment>,
    /// Index into `TreeSkeleton::branches`; `None` for the trunk.
    pub parent_id: Option<usize>,
    /// Arc-length fraction along the parent where this branch attaches.
    pub attach_t: f64,
}

impl Branch {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(BranchSegment::length).sum()
    }

    /// Point, tangent and interpolated radius at arc-length fraction `t`.
    pub fn sample(&self, t: f64) -> (Vec3, Vec3, f64) {
        let total = self.length();
        let mut remaining = t.clamp(0.0, 1.0) * total;
        let last = self.segments.len() - 1;
        for (i, seg) in self.segments.iter().enumerate() {
            let len = seg.length();
            if remaining <= len || i == last {
                let f = if len > 0.0 {
                    (remaining / len).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let p = seg.start + (seg.end - seg.start) * f;
                let r = seg.radius_start + (seg.radius_end - seg.radius_start) * f;
                return (p, seg.direction(), r);
            }
            remaining -= len;
        }
        unreachable!("branch has at least one segment");
    }
}

/// The geometric backbone of one tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSkeleton {
    pub branches: Vec<Branch>,
    pub params_echo: TreeParams,
    pub seed: u64,
}

/// Per-level totals; computed by exact traversal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkeletonStats {
    /// Branch count per level, index = level.
    pub count_per_level: Vec<usize>,
    /// Total polyline length per level, meters.
    pub length_per_level: Vec<f64>,
    pub max_radius: f64,
}

/// Grow a tree skeleton. Deterministic for a given `(params, seed)` pair.
///
/// The trunk starts at the origin pointing +Z. Each level-`l` branch has
/// length `trunk_length * length_ratio^l` scaled by the +-10% length jitter,
/// and a base radius equal to the parent's radius at the attachment point
/// times `radius_ratio`. Children leave their parent at the configured cone
/// angle; the sign of `down_angle_deg` anchors the azimuth sequence to the
/// downhill (positive) or uphill (negative) side of tilted parents, which is
/// what tips the crown downward or upward overall.
pub fn generate_skeleton(params: &TreeParams, seed: u64) -> Result<TreeSkeleton> {
    params.validate()?;
    let mut stream = RandomStream::new(seed);
    let mut branches = Vec::new();
    let trunk_len = params.trunk_length * (1.0 + stream.uniform(-LENGTH_JITTER, LENGTH_JITTER));
    grow(
        params,
        &mut stream,
        &mut branches,
        GrowSite {
            level: 0,
            base: Vec3::ZERO,
            direction: Vec3::Z,
            length: trunk_len,
            base_radius: params.trunk_radius,
            parent_id: None,
            attach_t: 0.0,
        },
    );
    Ok(TreeSkeleton {
        branches,
        params_echo: params.clone(),
        seed,
    })
}

struct GrowSite {
    level: u32,
    base: Vec3,
    direction: Vec3,
    length: f64,
    base_radius: f64,
    parent_id: Option<usize>,
    attach_t: f64,
}

fn grow(
    params: &TreeParams,
    stream: &mut RandomStream,
    branches: &mut Vec<Branch>,
    site: GrowSite,
) {
    let id = branches.len();
    let n = params.segments_per_branch as usize;
    let seg_len = site.length / n as f64;
    let tip_radius = site.base_radius * TIP_TAPER;

    // Curvature: equal rotation at every interior joint about one random
    // normal of the initial direction, so the first segment keeps the exact
    // attachment angle.
    let bend_step = params.curvature_deg.to_radians() / n as f64;
    let bend_axis = {
        let (u, v) = orthonormal_basis(site.direction);
        let phi = stream.uniform(0.0, std::f64::consts::TAU);
        u * phi.cos() + v * phi.sin()
    };

    let mut segments = Vec::with_capacity(n);
    let mut pos = site.base;
    let mut dir = site.direction;
    for i in 0..n {
        if i > 0 {
            dir = dir.rotate_about(bend_axis, bend_step).normalized();
        }
        let r0 = site.base_radius + (tip_radius - site.base_radius) * (i as f64 / n as f64);
        let r1 = site.base_radius + (tip_radius - site.base_radius) * ((i + 1) as f64 / n as f64);
        let end = pos + dir * seg_len;
        segments.push(BranchSegment {
            start: pos,
            end,
            radius_start: r0,
            radius_end: r1,
        });
        pos = end;
    }
    branches.push(Branch {
        level: site.level,
        segments,
        parent_id: site.parent_id,
        attach_t: site.attach_t,
    });

    if site.level + 1 >= params.levels {
        return;
    }

    let child_count = stream.uniform_u32(params.children_min, params.children_max);
    let child_len_nominal = params.trunk_length * params.length_ratio.powi(site.level as i32 + 1);
    for k in 0..child_count {
        let t = stream.uniform(ATTACH_RANGE.0, ATTACH_RANGE.1);
        let (point, tangent, parent_radius) = branches[id].sample(t);
        let theta = (params.down_angle_deg.abs()
            + stream.uniform(-params.down_angle_jitter_deg, params.down_angle_jitter_deg))
        .to_radians();
        let phi = azimuth_phase(params.down_angle_deg, tangent, stream)
            + k as f64 * params.phyllotaxis_deg.to_radians();
        let dir = cone_direction(tangent, theta, phi);
        let length = child_len_nominal * (1.0 + stream.uniform(-LENGTH_JITTER, LENGTH_JITTER));
        grow(
            params,
            stream,
            branches,
            GrowSite {
                level: site.level + 1,
                base: point,
                direction: dir,
                length,
                base_radius: parent_radius * params.radius_ratio,
                parent_id: Some(id),
                attach_t: t,
            },
        );
    }
}

/// Azimuth phase for the first child of a parent. For tilted parents the
/// phase anchors to the downhill azimuth (or uphill for negative
/// `down_angle_deg`); near-vertical parents get a random phase since every
/// azimuth is equivalent there.
fn azimuth_phase(down_angle_deg: f64, tangent: Vec3, stream: &mut RandomStream) -> f64 {
    let vertical = if down_angle_deg >= 0.0 {
        -Vec3::Z
    } else {
        Vec3::Z
    };
    let proj = vertical - tangent * vertical.dot(tangent);
    if proj.length() < 1e-6 {
        stream.uniform(0.0, std::f64::consts::TAU)
    } else {
        let (u, v) = orthonormal_basis(tangent);
        let p = proj.normalized();
        v.dot(p).atan2(u.dot(p))
    }
}

/// Direction at polar angle `theta` from `axis`, azimuth `phi` in the
/// orthonormal frame of `axis`.
fn cone_direction(axis: Vec3, theta: f64, phi: f64) -> Vec3 {
    let (u, v) = orthonormal_basis(axis);
    let (st, ct) = theta.sin_cos();
    (axis * ct + (u * phi.cos() + v * phi.sin()) * st).normalized()
}

/// Per-level branch counts, per-level total polyline length, max radius.
pub fn skeleton_stats(skeleton: &TreeSkeleton) -> SkeletonStats {
    let levels = skeleton.branches.iter().map(|b| b.level).max().unwrap_or(0) as usize + 1;
    let mut count = vec![0usize; levels];
    let mut length = vec![0.0f64; levels];
    let mut max_radius = 0.0f64;
    for b in &skeleton.branches {
        count[b.level as usize] += 1;
        length[b.level as usize] += b.length();
        for s in &b.segments {
            max_radius = max_radius.max(s.radius_start);
        }
    }
    SkeletonStats {
        count_per_level: count,
        length_per_level: length,
        max_radius,
    }
}

/// Tessellate every branch chain into a generalized cylinder.
///
/// One ring of `sides` vertices per chain joint, two triangles per side
/// between adjacent rings, and a triangle-fan cap at each chain end. Level-0
/// triangles are labeled `Trunk`, the rest `Branch`. Joints between parent
/// and child tubes are intentionally not stitched watertight.
pub fn tube_mesh(skeleton: &TreeSkeleton, sides: u32) -> Result<LabeledMesh> {
    if sides < 3 {
        return Err(Error::invalid_param("sides", "must be >= 3"));
    }
    let sides = sides as usize;
    let mut mesh = LabeledMesh::new();
    for branch in &skeleton.branches {
        let class = if branch.level == 0 {
            SemanticClass::Trunk
        } else {
            SemanticClass::Branch
        };
        let rings = chain_rings(branch, sides);
        // Side walls.
        for w in rings.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            for j in 0..sides {
                let jn = (j + 1) % sides;
                mesh.push(LabeledTriangle::new(a[j], a[jn], b[jn], class));
                mesh.push(LabeledTriangle::new(a[j], b[jn], b[j], class));
            }
        }
        // Fan caps at the chain ends.
        let start_center = branch.segments[0].start;
        let end_center = branch.segments.last().unwrap().end;
        let first = &rings[0];
        let last = rings.last().unwrap();
        for j in 0..sides {
            let jn = (j + 1) % sides;
            mesh.push(LabeledTriangle::new(
                start_center,
                first[jn],
                first[j],
                class,
            ));
            mesh.push(LabeledTriangle::new(end_center, last[j], last[jn], class));
        }
    }
    Ok(mesh)
}

/// Ring vertices at every joint of a branch chain, with frames parallel-
/// transported along the chain so tubes do not twist at bends.
fn chain_rings(branch: &Branch, sides: usize) -> Vec<Vec<Vec3>> {
    let segs = &branch.segments;
    let joint_count = segs.len() + 1;
    let mut rings = Vec::with_capacity(joint_count);

    let mut tangent = segs[0].direction();
    let (mut u, mut v) = orthonormal_basis(tangent);
    for joint in 0..joint_count {
        let (center, radius, next_tangent) = if joint == 0 {
            (segs[0].start, segs[0].radius_start, segs[0].direction())
        } else if joint == segs.len() {
            let s = &segs[joint - 1];
            (s.end, s.radius_end, s.direction())
        } else {
            let a = &segs[joint - 1];
            let b = &segs[joint];
            let avg = (a.direction() + b.direction()).normalized();
            (b.start, b.radius_start, avg)
        };
        // Transport the frame onto the new tangent by the minimal rotation.
        let axis = tangent.cross(next_tangent);
        let s = axis.length();
        if s > 1e-12 {
            let angle = s.min(1.0).asin().max(0.0);
            let angle = if tangent.dot(next_tangent) < 0.0 {
                std::f64::consts::PI - angle
            } else {
                angle
            };
            let axis = axis / s;
            u = u.rotate_about(axis, angle).normalized();
            v = v.rotate_about(axis, angle).normalized();
        }
        tangent = next_tangent;

        let ring: Vec<Vec3> = (0..sides)
            .map(|j| {
                let a = j as f64 / sides as f64 * std::f64::consts::TAU;
                center + (u * a.cos() + v * a.sin()) * radius
            })
            .collect();
        rings.push(ring);
    }
    rings
}
