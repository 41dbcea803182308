//! Camera pose sampling and trajectories.
//!
//! Poses are drawn from two coaxial cylinders: the origin from a hollow
//! external cylinder, the look-at target from a solid internal cylinder
//! around the model. Both draws are uniform by volume, so every vantage
//! ring is covered and the camera always points at the model region.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{vec3, Aabb, Vec3};
use crate::rng::RandomStream;

/// Annular cylinder; `inner_radius = 0` makes it solid. `z_min`/`z_max`
/// are relative to `center`. Degenerate regions (equal radii or equal z
/// bounds) are allowed and collapse to a surface, line, or point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderRegion {
    pub center: Vec3,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl CylinderRegion {
    pub fn validate(&self, label: &str) -> Result<()> {
        if !self.center.is_finite() {
            return Err(Error::invalid_param(
                format!("{label}.center"),
                "must be finite",
            ));
        }
        if !(self.inner_radius >= 0.0 && self.inner_radius.is_finite()) {
            return Err(Error::invalid_param(
                format!("{label}.inner_radius"),
                "must be >= 0",
            ));
        }
        if !(self.outer_radius >= self.inner_radius && self.outer_radius.is_finite()) {
            return Err(Error::invalid_param(
                format!("{label}.outer_radius"),
                "must be >= inner_radius",
            ));
        }
        if !(self.z_min <= self.z_max && self.z_min.is_finite() && self.z_max.is_finite()) {
            return Err(Error::invalid_param(
                format!("{label}.z_min"),
                "must be <= z_max",
            ));
        }
        Ok(())
    }

    pub fn contains(&self, p: Vec3) -> bool {
        let rel = p - self.center;
        let r = rel.radial_xy();
        r >= self.inner_radius - 1e-9
            && r <= self.outer_radius + 1e-9
            && rel.z >= self.z_min - 1e-9
            && rel.z <= self.z_max + 1e-9
    }

    /// Volume-uniform sample: radius via the annulus CDF
    /// r = sqrt(u (r2^2 - r1^2) + r1^2), azimuth and z uniform.
    /// Always consumes exactly three draws.
    pub fn sample(&self, stream: &mut RandomStream) -> Vec3 {
        let u = stream.next_f64();
        let r1 = self.inner_radius;
        let r2 = self.outer_radius;
        let r = (u * (r2 * r2 - r1 * r1) + r1 * r1).sqrt();
        let phi = stream.uniform(-std::f64::consts::PI, std::f64::consts::PI);
        let z = stream.uniform(self.z_min, self.z_max);
        self.center + vec3(r * phi.cos(), r * phi.sin(), z)
    }
}

/// Origin region (hollow) plus target region (solid, around the model).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSampler {
    pub external: CylinderRegion,
    pub internal: CylinderRegion,
}

impl CameraSampler {
    pub fn validate(&self) -> Result<()> {
        self.external.validate("camera.external")?;
        self.internal.validate("camera.internal")?;
        if self.internal.outer_radius > self.external.inner_radius {
            return Err(Error::invalid_param(
                "camera.external.inner_radius",
                "must be >= internal.outer_radius so origins stay outside the target region",
            ));
        }
        Ok(())
    }

    /// Regions derived from model bounds: the internal cylinder tightly
    /// encloses the box; the external one spans 1.5x to 3x its horizontal
    /// radius with z from 0.2 to 1.2 of the model height above its base.
    pub fn around_bounds(bounds: Aabb) -> CameraSampler {
        let center = bounds.center();
        let ext = bounds.extent();
        let radius = (ext.x * ext.x + ext.y * ext.y).sqrt() * 0.5;
        let radius = radius.max(0.1);
        let height = ext.z.max(0.1);
        let internal = CylinderRegion {
            center,
            inner_radius: 0.0,
            outer_radius: radius,
            z_min: -ext.z * 0.5,
            z_max: ext.z * 0.5,
        };
        let external = CylinderRegion {
            center,
            inner_radius: 1.5 * radius,
            outer_radius: 3.0 * radius,
            z_min: -0.3 * height,
            z_max: 0.7 * height,
        };
        CameraSampler { external, internal }
    }
}

/// Right-handed orthonormal orientation; `right x up = forward`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triad {
    pub right: Vec3,
    pub up: Vec3,
    pub forward: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub origin: Vec3,
    pub target: Vec3,
    pub orientation: Triad,
    pub vertical_fov_deg: f64,
}

/// Build the orientation triad looking from `origin` toward `target`.
/// Errors when the view direction is parallel to `up_hint`; callers fall
/// back to another hint axis.
pub fn look_at(origin: Vec3, target: Vec3, up_hint: Vec3) -> Result<Triad> {
    let offset = target - origin;
    if offset.length_squared() == 0.0 {
        return Err(Error::DegenerateLookAt);
    }
    let forward = offset.normalized();
    let right_raw = up_hint.cross(forward);
    if right_raw.length_squared() < 1e-16 {
        return Err(Error::DegenerateLookAt);
    }
    let right = right_raw.normalized();
    let up = forward.cross(right);
    Ok(Triad { right, up, forward })
}

/// Pose with origin in the external region and target in the internal one.
/// Consumes exactly six draws plus the fallback path's none.
pub fn sample_pose(
    sampler: &CameraSampler,
    stream: &mut RandomStream,
    vertical_fov_deg: f64,
) -> CameraPose {
    let origin = sampler.external.sample(stream);
    let target = sampler.internal.sample(stream);
    let orientation = look_at(origin, target, Vec3::Z)
        .or_else(|_| look_at(origin, target, Vec3::X))
        .unwrap_or(Triad {
            right: Vec3::X,
            up: Vec3::Y,
            forward: Vec3::Z,
        });
    CameraPose {
        origin,
        target,
        orientation,
        vertical_fov_deg,
    }
}

/// Linear path between two poses: origins and targets interpolated
/// independently at i/(n-1), orientation rebuilt per step.
pub fn trajectory(start: &CameraPose, end: &CameraPose, n: usize) -> Result<Vec<CameraPose>> {
    if n < 2 {
        return Err(Error::invalid_param(
            "trajectory.n",
            "needs at least 2 poses",
        ));
    }
    let mut poses = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        // a(1-t) + b t is exact at both endpoints.
        let origin = start.origin * (1.0 - t) + end.origin * t;
        let target = start.target * (1.0 - t) + end.target * t;
        let orientation = look_at(origin, target, Vec3::Z)
            .or_else(|_| look_at(origin, target, Vec3::X))
            .unwrap_or(start.orientation);
        poses.push(CameraPose {
            origin,
            target,
            orientation,
            vertical_fov_deg: start.vertical_fov_deg * (1.0 - t) + end.vertical_fov_deg * t,
        });
    }
    Ok(poses)
}
