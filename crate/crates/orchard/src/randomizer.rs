//! Per-frame domain randomization.
//!
//! Every frame's random decisions come from streams derived as a pure
//! function of (master seed, frame index, purpose label), so frames can be
//! resolved in any order or in parallel and still match a sequential run.

use serde::{Deserialize, Serialize};

use crate::camera::{sample_pose, CameraPose, CameraSampler};
use crate::error::{Error, Result};
use crate::rng::{fnv1a64, mix64, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum FocusMode {
    /// Focus plane at the sampled look-at target.
    AtTarget,
    /// Fixed focus distance in meters.
    Fixed { distance: f64 },
}

/// Ranges the per-frame knobs are drawn from, plus the environment schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomizationSpec {
    /// Samples per pixel, drawn uniformly over the inclusive range.
    pub spp_range: [u32; 2],
    /// Lens aperture radius range in meters; 0 is a pinhole.
    pub aperture_range: [f64; 2],
    pub focus_mode: FocusMode,
    /// Environment identifiers cycled round-robin. An empty list is filled
    /// with every environment in the recipe before validation.
    pub env_pool: Vec<String>,
    /// Frames per environment before the pool advances.
    pub env_change_period: u32,
}

impl Default for RandomizationSpec {
    fn default() -> Self {
        RandomizationSpec {
            spp_range: [16, 64],
            aperture_range: [0.0, 0.02],
            focus_mode: FocusMode::AtTarget,
            env_pool: Vec::new(),
            env_change_period: 1,
        }
    }
}

impl RandomizationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.spp_range[0] < 1 || self.spp_range[0] > self.spp_range[1] {
            return Err(Error::invalid_param(
                "randomization.spp_range",
                "needs 1 <= min <= max",
            ));
        }
        if !(self.aperture_range[0] >= 0.0
            && self.aperture_range[0] <= self.aperture_range[1]
            && self.aperture_range[1].is_finite())
        {
            return Err(Error::invalid_param(
                "randomization.aperture_range",
                "needs 0 <= min <= max",
            ));
        }
        if let FocusMode::Fixed { distance } = self.focus_mode {
            if !(distance > 0.0 && distance.is_finite()) {
                return Err(Error::invalid_param(
                    "randomization.focus_mode.distance",
                    "must be > 0",
                ));
            }
        }
        if self.env_pool.is_empty() {
            return Err(Error::invalid_param(
                "randomization.env_pool",
                "must not be empty",
            ));
        }
        if self.env_change_period < 1 {
            return Err(Error::invalid_param(
                "randomization.env_change_period",
                "must be >= 1",
            ));
        }
        Ok(())
    }
}

/// Everything the renderer needs for one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    pub frame_index: u64,
    pub camera: CameraPose,
    pub env_id: String,
    pub spp: u32,
    pub aperture: f64,
    pub focus_distance: f64,
    /// Seed of the frame's render stream; recorded for reproducibility.
    pub stream_tag: u64,
}

/// Seed for the (master, frame, purpose) stream. Each stage is a bijection
/// of the previous, so distinct inputs cannot collide trivially.
pub fn stream_seed(master_seed: u64, frame_index: u64, purpose: &str) -> u64 {
    mix64(
        mix64(mix64(master_seed).wrapping_add(frame_index))
            .wrapping_add(fnv1a64(purpose.as_bytes())),
    )
}

/// Independent stream for one purpose within one frame.
pub fn derive_stream(master_seed: u64, frame_index: u64, purpose: &str) -> RandomStream {
    RandomStream::new(stream_seed(master_seed, frame_index, purpose))
}

/// Resolve one frame: camera pose from the frame's camera stream, then the
/// render knobs. Pure function of its arguments.
pub fn resolve_frame(
    spec: &RandomizationSpec,
    sampler: &CameraSampler,
    master_seed: u64,
    frame_index: u64,
    vertical_fov_deg: f64,
) -> FrameConfig {
    let mut camera_stream = derive_stream(master_seed, frame_index, "camera");
    let pose = sample_pose(sampler, &mut camera_stream, vertical_fov_deg);
    resolve_frame_with_pose(spec, pose, master_seed, frame_index)
}

/// Resolve the non-camera knobs for a frame whose pose is already fixed
/// (trajectory mode supplies interpolated poses).
pub fn resolve_frame_with_pose(
    spec: &RandomizationSpec,
    camera: CameraPose,
    master_seed: u64,
    frame_index: u64,
) -> FrameConfig {
    let mut render_stream = derive_stream(master_seed, frame_index, "render");
    let stream_tag = render_stream.seed_state();
    let spp = render_stream.uniform_u32(spec.spp_range[0], spec.spp_range[1]);
    let aperture = render_stream.uniform(spec.aperture_range[0], spec.aperture_range[1]);
    let focus_distance = match spec.focus_mode {
        FocusMode::AtTarget => (camera.target - camera.origin).length(),
        FocusMode::Fixed { distance } => distance,
    };
    let block = frame_index / spec.env_change_period as u64;
    let env_id = spec.env_pool[(block % spec.env_pool.len() as u64) as usize].clone();
    FrameConfig {
        frame_index,
        camera,
        env_id,
        spp,
        aperture,
        focus_distance,
        stream_tag,
    }
}
