//! Declarative run configuration.
//!
//! One JSON document controls a whole dataset run: seed, frame count, tree
//! and scatter parameters, camera regions, randomization ranges, lighting.
//! Unknown keys are rejected so a typo in a knob cannot silently corrupt an
//! experiment. `ORCHARD_ASSET_DIR` is the search root for relative HDR
//! paths.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::camera::{CameraSampler, CylinderRegion};
use crate::error::{Error, Result};
use crate::randomizer::RandomizationSpec;
use crate::scatter::ScatterParams;
use crate::scene::{load_hdr, procedural_sky, EnvironmentMap, MaterialSet, SkyParams};
use crate::treegen::TreeParams;

/// Environment variable naming the HDR search root.
pub const ASSET_DIR_VAR: &str = "ORCHARD_ASSET_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImageSize {
    pub width: u32,
    pub height: u32,
}

impl Default for ImageSize {
    fn default() -> Self {
        ImageSize {
            width: 512,
            height: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraMode {
    /// Independent pose per frame.
    Random,
    /// One interpolated path per model block between two sampled poses.
    Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraConfig {
    pub vertical_fov_deg: f64,
    pub mode: CameraMode,
    /// Explicit sampling regions; both present or both absent. Absent,
    /// regions are derived from the model bounds per frame block.
    pub external: Option<CylinderRegion>,
    pub internal: Option<CylinderRegion>,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            vertical_fov_deg: 55.0,
            mode: CameraMode::Random,
            external: None,
            internal: None,
        }
    }
}

impl CameraConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.vertical_fov_deg > 0.0 && self.vertical_fov_deg < 180.0) {
            return Err(Error::invalid_param(
                "camera.vertical_fov_deg",
                "must lie in (0, 180)",
            ));
        }
        match (&self.external, &self.internal) {
            (Some(e), Some(i)) => CameraSampler {
                external: *e,
                internal: *i,
            }
            .validate(),
            (None, None) => Ok(()),
            _ => Err(Error::invalid_param(
                "camera.external",
                "external and internal regions must be given together",
            )),
        }
    }

    /// Explicit regions if present, otherwise regions derived from bounds.
    pub fn sampler_for(&self, bounds: crate::math::Aabb) -> CameraSampler {
        match (&self.external, &self.internal) {
            (Some(e), Some(i)) => CameraSampler {
                external: *e,
                internal: *i,
            },
            _ => CameraSampler::around_bounds(bounds),
        }
    }
}

/// One named lighting option: either a Radiance HDR file or a procedural
/// sky. Exactly one source must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hdr: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sky: Option<SkyParams>,
}

impl EnvironmentEntry {
    fn validate(&self, index: usize) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::invalid_param(
                format!("environment[{index}].id"),
                "must not be empty",
            ));
        }
        match (&self.hdr, &self.sky) {
            (Some(_), None) | (None, Some(_)) => Ok(()),
            _ => Err(Error::invalid_param(
                format!("environment[{index}]"),
                "needs exactly one of `hdr` or `sky`",
            )),
        }
    }
}

fn default_environment() -> Vec<EnvironmentEntry> {
    vec![EnvironmentEntry {
        id: "sky".into(),
        hdr: None,
        sky: Some(SkyParams::default()),
    }]
}

fn default_models() -> u32 {
    1
}

fn default_frames() -> u64 {
    1
}

/// Fully declarative description of a dataset run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub master_seed: u64,
    #[serde(default = "default_frames")]
    pub frames: u64,
    #[serde(default)]
    pub image: ImageSize,
    #[serde(default)]
    pub tree: TreeParams,
    #[serde(default)]
    pub scatter: ScatterParams,
    #[serde(default)]
    pub camera: CameraConfig,
    #[serde(default)]
    pub randomization: RandomizationSpec,
    #[serde(default = "default_environment")]
    pub environment: Vec<EnvironmentEntry>,
    #[serde(default)]
    pub materials: MaterialSet,
    /// Distinct tree models over the run; frames are split into that many
    /// equal blocks and geometry is regenerated per block.
    #[serde(default = "default_models")]
    pub models_per_dataset: u32,
}

/// Parse a recipe document, apply defaults, and validate. An empty
/// `randomization.env_pool` is filled with every environment id in order.
pub fn parse_recipe(bytes: &[u8]) -> Result<Recipe> {
    let mut recipe: Recipe = serde_json::from_slice(bytes)?;
    if recipe.randomization.env_pool.is_empty() {
        recipe.randomization.env_pool = recipe.environment.iter().map(|e| e.id.clone()).collect();
    }
    recipe.validate()?;
    Ok(recipe)
}

impl Recipe {
    /// Structural validation; file existence is checked separately by
    /// [`Recipe::load_environments`].
    pub fn validate(&self) -> Result<()> {
        if self.frames < 1 {
            return Err(Error::invalid_param("frames", "must be >= 1"));
        }
        if self.image.width < 1 || self.image.height < 1 {
            return Err(Error::invalid_param(
                "image",
                "width and height must be >= 1",
            ));
        }
        if self.image.width > 16_384 || self.image.height > 16_384 {
            return Err(Error::invalid_param("image", "side length capped at 16384"));
        }
        if self.models_per_dataset < 1 {
            return Err(Error::invalid_param("models_per_dataset", "must be >= 1"));
        }
        self.tree.validate()?;
        self.scatter.validate()?;
        self.camera.validate()?;
        self.randomization.validate()?;
        self.materials.validate()?;
        if self.environment.is_empty() {
            return Err(Error::invalid_param(
                "environment",
                "must list at least one entry",
            ));
        }
        for (i, entry) in self.environment.iter().enumerate() {
            entry.validate(i)?;
            if self.environment[..i].iter().any(|e| e.id == entry.id) {
                return Err(Error::invalid_param(
                    format!("environment[{i}].id"),
                    format!("duplicate id \"{}\"", entry.id),
                ));
            }
        }
        for id in &self.randomization.env_pool {
            if !self.environment.iter().any(|e| &e.id == id) {
                return Err(Error::invalid_param(
                    "randomization.env_pool",
                    format!("unknown environment id \"{id}\""),
                ));
            }
        }
        Ok(())
    }

    /// Load every environment in recipe order. Relative HDR paths resolve
    /// under `ORCHARD_ASSET_DIR` when set, else the working directory.
    pub fn load_environments(&self) -> Result<Vec<(String, Arc<EnvironmentMap>)>> {
        self.environment
            .iter()
            .map(|entry| {
                let env = match (&entry.hdr, &entry.sky) {
                    (Some(path), None) => {
                        let resolved = resolve_asset(path);
                        let bytes = std::fs::read(&resolved).map_err(|e| {
                            if e.kind() == std::io::ErrorKind::NotFound {
                                Error::AssetNotFound {
                                    path: resolved.clone(),
                                }
                            } else {
                                Error::io(resolved.clone(), e)
                            }
                        })?;
                        load_hdr(&bytes)?
                    }
                    (None, Some(sky)) => procedural_sky(sky)?,
                    _ => unreachable!("validated: exactly one source"),
                };
                Ok((entry.id.clone(), Arc::new(env)))
            })
            .collect()
    }
}

/// Absolute paths pass through; relative paths are joined onto
/// `ORCHARD_ASSET_DIR` when the variable is set.
pub fn resolve_asset(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(ASSET_DIR_VAR) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(path),
        _ => path.to_path_buf(),
    }
}
