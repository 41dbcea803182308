//! Scene assembly: labeled triangles + per-class materials + a spherical
//! environment. The environment is the only light source; geometry is
//! recentered so the model sits at the environment sphere's center.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hdr::{decode_hdr, HdrImage};
use crate::math::{vec3, Aabb, Vec3};
use crate::mesh::{LabeledMesh, SemanticClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Material {
    /// Linear RGB, each component in [0, 1].
    pub albedo: Vec3,
    /// Probability of the specular lobe at each bounce, in [0, 1].
    pub specular_weight: f64,
    /// Fuzz radius of the specular lobe, in (0, 1].
    pub roughness: f64,
}

impl Default for Material {
    fn default() -> Self {
        Material {
            albedo: vec3(0.5, 0.5, 0.5),
            specular_weight: 0.0,
            roughness: 1.0,
        }
    }
}

impl Material {
    pub fn diffuse(albedo: Vec3) -> Material {
        Material {
            albedo,
            specular_weight: 0.0,
            roughness: 1.0,
        }
    }

    pub fn validate(&self, label: &str) -> Result<()> {
        for axis in 0..3 {
            let a = self.albedo.axis(axis);
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::invalid_param(
                    format!("{label}.albedo"),
                    "components must lie in [0, 1]",
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.specular_weight) {
            return Err(Error::invalid_param(
                format!("{label}.specular_weight"),
                "must lie in [0, 1]",
            ));
        }
        if !(self.roughness > 0.0 && self.roughness <= 1.0) {
            return Err(Error::invalid_param(
                format!("{label}.roughness"),
                "must lie in (0, 1]",
            ));
        }
        Ok(())
    }
}

/// One material per semantic class; appearance varies only via lighting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialSet {
    pub background: Material,
    pub trunk: Material,
    pub branch: Material,
    pub leaf: Material,
    pub fruit: Material,
}

impl Default for MaterialSet {
    fn default() -> Self {
        MaterialSet {
            background: Material::diffuse(vec3(0.5, 0.5, 0.5)),
            trunk: Material::diffuse(vec3(0.25, 0.16, 0.08)),
            branch: Material::diffuse(vec3(0.33, 0.22, 0.11)),
            leaf: Material {
                albedo: vec3(0.10, 0.35, 0.07),
                specular_weight: 0.15,
                roughness: 0.4,
            },
            fruit: Material {
                albedo: vec3(0.65, 0.08, 0.05),
                specular_weight: 0.25,
                roughness: 0.2,
            },
        }
    }
}

impl MaterialSet {
    pub fn for_class(&self, class: SemanticClass) -> &Material {
        match class {
            SemanticClass::Background => &self.background,
            SemanticClass::Trunk => &self.trunk,
            SemanticClass::Branch => &self.branch,
            SemanticClass::Leaf => &self.leaf,
            SemanticClass::Fruit => &self.fruit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.background.validate("materials.background")?;
        self.trunk.validate("materials.trunk")?;
        self.branch.validate("materials.branch")?;
        self.leaf.validate("materials.leaf")?;
        self.fruit.validate("materials.fruit")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentKind {
    LoadedHdr,
    ProceduralSky,
}

/// Equirectangular radiance map: row 0 is the zenith, u wraps in azimuth.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentMap {
    pub width: usize,
    pub height: usize,
    pub radiance: Vec<Vec3>,
    pub kind: EnvironmentKind,
}

impl EnvironmentMap {
    pub fn from_grid(
        width: usize,
        height: usize,
        radiance: Vec<Vec3>,
        kind: EnvironmentKind,
    ) -> Result<EnvironmentMap> {
        if width == 0 || height == 0 || radiance.len() != width * height {
            return Err(Error::Assembly(format!(
                "environment grid {}x{} needs {} texels, got {}",
                width,
                height,
                width * height,
                radiance.len()
            )));
        }
        if let Some(bad) = radiance
            .iter()
            .find(|v| !(v.is_finite() && v.min_component() >= 0.0))
        {
            return Err(Error::Assembly(format!(
                "environment radiance must be finite and non-negative, found {bad:?}"
            )));
        }
        Ok(EnvironmentMap {
            width,
            height,
            radiance,
            kind,
        })
    }

    /// Uniform map, handy for furnace tests.
    pub fn constant(value: Vec3) -> EnvironmentMap {
        EnvironmentMap {
            width: 1,
            height: 1,
            radiance: vec![value],
            kind: EnvironmentKind::ProceduralSky,
        }
    }

    /// Nearest-texel equirectangular lookup. Total: any unit vector,
    /// including the poles and the azimuth seam, lands on a valid texel.
    pub fn radiance(&self, direction: Vec3) -> Vec3 {
        let u =
            (direction.y.atan2(direction.x) + std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
        let v = direction.z.clamp(-1.0, 1.0).acos() / std::f64::consts::PI;
        let x = ((u * self.width as f64) as usize).min(self.width - 1);
        let y = ((v * self.height as f64) as usize).min(self.height - 1);
        self.radiance[y * self.width + x]
    }
}

/// Decode Radiance RGBE bytes into an environment map (row 0 = zenith).
pub fn load_hdr(bytes: &[u8]) -> Result<EnvironmentMap> {
    let HdrImage {
        width,
        height,
        pixels,
    } = decode_hdr(bytes)?;
    EnvironmentMap::from_grid(width, height, pixels, EnvironmentKind::LoadedHdr)
}

/// Asset-free sky: vertical gradient zenith -> horizon -> ground plus an
/// additive sun disc. Serves as the default environment so nothing must be
/// downloaded to render.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SkyParams {
    pub zenith: Vec3,
    pub horizon: Vec3,
    pub ground: Vec3,
    pub sun_direction: Vec3,
    pub sun_intensity: f64,
    pub sun_angular_radius_deg: f64,
    pub width: usize,
    pub height: usize,
}

impl Default for SkyParams {
    fn default() -> Self {
        SkyParams {
            zenith: vec3(0.35, 0.55, 0.95),
            horizon: vec3(0.80, 0.85, 0.95),
            ground: vec3(0.22, 0.18, 0.14),
            sun_direction: vec3(0.5, 0.3, 0.8),
            sun_intensity: 60.0,
            sun_angular_radius_deg: 2.5,
            width: 256,
            height: 128,
        }
    }
}

pub fn procedural_sky(params: &SkyParams) -> Result<EnvironmentMap> {
    if !(params.sun_intensity >= 0.0 && params.sun_intensity.is_finite()) {
        return Err(Error::invalid_param("sky.sun_intensity", "must be >= 0"));
    }
    if !(params.sun_angular_radius_deg > 0.0) {
        return Err(Error::invalid_param(
            "sky.sun_angular_radius_deg",
            "must be > 0",
        ));
    }
    for (label, c) in [
        ("zenith", params.zenith),
        ("horizon", params.horizon),
        ("ground", params.ground),
    ] {
        if !(c.is_finite() && c.min_component() >= 0.0) {
            return Err(Error::invalid_param(
                format!("sky.{label}"),
                "must be finite and >= 0",
            ));
        }
    }
    let sun = params.sun_direction.normalized();
    let cos_sun = params.sun_angular_radius_deg.to_radians().cos();
    let (w, h) = (params.width.max(1), params.height.max(1));
    let mut radiance = Vec::with_capacity(w * h);
    for y in 0..h {
        // Texel-center direction for this row/column.
        let polar = (y as f64 + 0.5) / h as f64 * std::f64::consts::PI;
        let z = polar.cos();
        let s = polar.sin();
        for x in 0..w {
            let azimuth =
                (x as f64 + 0.5) / w as f64 * 2.0 * std::f64::consts::PI - std::f64::consts::PI;
            let dir = vec3(s * azimuth.cos(), s * azimuth.sin(), z);
            let base = if z >= 0.0 {
                params.horizon + (params.zenith - params.horizon) * z
            } else {
                params.horizon + (params.ground - params.horizon) * -z
            };
            let value = if dir.dot(sun) >= cos_sun {
                base + Vec3::splat(params.sun_intensity)
            } else {
                base
            };
            radiance.push(value);
        }
    }
    EnvironmentMap::from_grid(w, h, radiance, EnvironmentKind::ProceduralSky)
}

/// Triangle ready for intersection: precomputed unit geometric normal,
/// semantic class, and the per-class material slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneTriangle {
    pub vertices: [Vec3; 3],
    pub normal: Vec3,
    pub class: SemanticClass,
    pub material_index: u8,
}

/// Immutable renderable scene. Triangles live behind an `Arc` so an
/// environment swap (new lighting, same model) shares geometry and keeps
/// any acceleration structure built over it valid.
#[derive(Debug, Clone)]
pub struct Scene {
    pub triangles: Arc<Vec<SceneTriangle>>,
    pub materials: MaterialSet,
    pub environment: Arc<EnvironmentMap>,
    pub bounds: Aabb,
}

/// Concatenate meshes, recenter so the bounding-box center is the origin,
/// and attach materials and lighting.
pub fn assemble(
    meshes: &[LabeledMesh],
    materials: MaterialSet,
    environment: Arc<EnvironmentMap>,
) -> Result<Scene> {
    materials.validate()?;
    let count: usize = meshes.iter().map(|m| m.len()).sum();
    if count == 0 {
        return Err(Error::Assembly("no triangles to assemble".into()));
    }
    let mut bounds = Aabb::EMPTY;
    for mesh in meshes {
        for tri in &mesh.triangles {
            for v in tri.vertices {
                if !v.is_finite() {
                    return Err(Error::Assembly(format!("non-finite vertex {v:?}")));
                }
                bounds.grow(v);
            }
        }
    }
    let shift = bounds.center();
    let mut triangles = Vec::with_capacity(count);
    for mesh in meshes {
        for tri in &mesh.triangles {
            let vertices = [
                tri.vertices[0] - shift,
                tri.vertices[1] - shift,
                tri.vertices[2] - shift,
            ];
            let raw = (vertices[1] - vertices[0]).cross(vertices[2] - vertices[0]);
            let len = raw.length();
            let normal = if len > 0.0 {
                raw / len
            } else {
                vec3(0.0, 0.0, 1.0)
            };
            triangles.push(SceneTriangle {
                vertices,
                normal,
                class: tri.class,
                material_index: tri.class.id(),
            });
        }
    }
    let recentered = Aabb {
        min: bounds.min - shift,
        max: bounds.max - shift,
    };
    Ok(Scene {
        triangles: Arc::new(triangles),
        materials,
        environment,
        bounds: recentered,
    })
}

impl Scene {
    /// Same geometry and materials under different lighting. Shares the
    /// triangle buffer, so acceleration structures remain valid.
    pub fn with_environment(&self, environment: Arc<EnvironmentMap>) -> Scene {
        Scene {
            triangles: Arc::clone(&self.triangles),
            materials: self.materials.clone(),
            environment,
            bounds: self.bounds,
        }
    }

    pub fn material_of(&self, tri: &SceneTriangle) -> &Material {
        self.materials.for_class(tri.class)
    }
}
