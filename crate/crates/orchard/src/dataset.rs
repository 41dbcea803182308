//! The animation loop: resolve each frame, render the RGB/label pair,
//! persist images, and finish with a reproducibility manifest.
//!
//! The manifest is written last via an atomic rename, so its presence
//! certifies that every referenced file exists. Label PNGs are 8-bit
//! grayscale whose pixel value IS the class id; display colors live only in
//! the manifest palette.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::camera::{sample_pose, trajectory, CameraPose};
use crate::error::{Error, Result};
use crate::mesh::SemanticClass;
use crate::randomizer::{
    derive_stream, resolve_frame, resolve_frame_with_pose, stream_seed, FrameConfig,
};
use crate::recipe::{CameraMode, Recipe};
use crate::render::{render_labels, render_rgb, tonemap_srgb, Accel, RenderSettings};
use crate::scatter::{instantiate_attachments, scatter_attachments};
use crate::scene::{assemble, EnvironmentMap, Scene};
use crate::treegen::{generate_skeleton, tube_mesh};

/// Bounce budget for the RGB pass.
const MAX_DEPTH: u32 = 4;

/// Icosphere subdivision used for fruit geometry.
const FRUIT_SUBDIVISION: u32 = 2;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_index: u64,
    /// Which geometry block this frame rendered.
    pub model_index: u32,
    pub rgb_path: String,
    pub label_path: String,
    pub camera: CameraPose,
    pub env_id: String,
    pub spp: u32,
    pub aperture: f64,
    pub focus_distance: f64,
    pub stream_tag: u64,
    /// Wall-clock render time; informational, excluded from byte-level
    /// reproducibility comparisons.
    pub render_seconds: f64,
    /// Non-finite pixels sanitized during tonemapping.
    pub warnings: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaletteEntry {
    pub id: u8,
    pub name: String,
    pub display_rgb: [u8; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub tool_version: String,
    pub master_seed: u64,
    /// Post-override recipe; together with the seed it reproduces the run.
    pub recipe: Recipe,
    pub palette: Vec<PaletteEntry>,
    pub frames: Vec<FrameRecord>,
}

fn palette() -> Vec<PaletteEntry> {
    SemanticClass::ALL
        .iter()
        .map(|c| PaletteEntry {
            id: c.id(),
            name: c.name().to_string(),
            display_rgb: c.display_rgb(),
        })
        .collect()
}

pub fn write_rgb_png(pixels: &[[u8; 3]], width: u32, height: u32, path: &Path) -> Result<()> {
    debug_assert_eq!(pixels.len(), (width * height) as usize);
    let mut data = Vec::with_capacity(pixels.len() * 3);
    for p in pixels {
        data.extend_from_slice(p);
    }
    image::save_buffer_with_format(
        path,
        &data,
        width,
        height,
        image::ExtendedColorType::Rgb8,
        image::ImageFormat::Png,
    )
    .map_err(|e| Error::Png {
        path: path.into(),
        source: e,
    })
}

pub fn write_label_png(
    labels: &[SemanticClass],
    width: u32,
    height: u32,
    path: &Path,
) -> Result<()> {
    debug_assert_eq!(labels.len(), (width * height) as usize);
    let data: Vec<u8> = labels.iter().map(|c| c.id()).collect();
    image::save_buffer_with_format(
        path,
        &data,
        width,
        height,
        image::ExtendedColorType::L8,
        image::ImageFormat::Png,
    )
    .map_err(|e| Error::Png {
        path: path.into(),
        source: e,
    })
}

/// Geometry for one model block: tree tubes plus scattered attachments,
/// assembled and accelerated. Exposed for tools that inspect scenes without
/// rendering.
pub fn build_model(recipe: &Recipe, model_index: u32) -> Result<(Scene, Accel)> {
    let tree_seed = stream_seed(recipe.master_seed, model_index as u64, "tree");
    let skeleton = generate_skeleton(&recipe.tree, tree_seed)?;
    let wood = tube_mesh(&skeleton, recipe.tree.sides)?;
    let mut scatter_stream = derive_stream(recipe.master_seed, model_index as u64, "scatter");
    let attachments = scatter_attachments(&skeleton, &recipe.scatter, &mut scatter_stream)?;
    let greenery = instantiate_attachments(&attachments, FRUIT_SUBDIVISION);
    // Placeholder lighting; frames swap in their own environment.
    let env = Arc::new(EnvironmentMap::constant(crate::math::Vec3::splat(1.0)));
    let scene = assemble(&[wood, greenery], recipe.materials.clone(), env)?;
    let accel = Accel::build(&scene.triangles)?;
    Ok((scene, accel))
}

/// Frame configs for one model block, honoring the camera mode.
fn block_configs(
    recipe: &Recipe,
    scene: &Scene,
    frame_range: std::ops::Range<u64>,
    model_index: u32,
) -> Vec<FrameConfig> {
    let sampler = recipe.camera.sampler_for(scene.bounds);
    let fov = recipe.camera.vertical_fov_deg;
    match recipe.camera.mode {
        CameraMode::Random => frame_range
            .map(|f| resolve_frame(&recipe.randomization, &sampler, recipe.master_seed, f, fov))
            .collect(),
        CameraMode::Trajectory => {
            let mut stream = derive_stream(recipe.master_seed, model_index as u64, "trajectory");
            let start = sample_pose(&sampler, &mut stream, fov);
            let end = sample_pose(&sampler, &mut stream, fov);
            let n = frame_range.clone().count();
            let poses: Vec<CameraPose> = if n == 1 {
                vec![start]
            } else {
                trajectory(&start, &end, n).expect("n >= 2")
            };
            frame_range
                .zip(poses)
                .map(|(f, pose)| {
                    resolve_frame_with_pose(&recipe.randomization, pose, recipe.master_seed, f)
                })
                .collect()
        }
    }
}

/// Run the full loop and write `<out>/rgb/frame_%06d.png`,
/// `<out>/labels/frame_%06d.png`, and `<out>/manifest.json` (written last,
/// atomically; its presence certifies a complete run).
pub fn generate_dataset(recipe: &Recipe, out_dir: &Path) -> Result<DatasetManifest> {
    recipe.validate()?;
    let environments: HashMap<String, Arc<EnvironmentMap>> =
        recipe.load_environments()?.into_iter().collect();

    let rgb_dir = out_dir.join("rgb");
    let label_dir = out_dir.join("labels");
    for dir in [&rgb_dir, &label_dir] {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.clone(), e))?;
    }

    let frames = recipe.frames;
    let models = recipe.models_per_dataset as u64;
    let block_len = frames.div_ceil(models);
    let mut records = Vec::with_capacity(frames as usize);

    for model_index in 0..models {
        let block_start = model_index * block_len;
        let block_end = (block_start + block_len).min(frames);
        if block_start >= block_end {
            break;
        }
        let (scene, accel) = build_model(recipe, model_index as u32)?;
        let configs = block_configs(recipe, &scene, block_start..block_end, model_index as u32);

        for cfg in configs {
            let env = environments
                .get(&cfg.env_id)
                .expect("validated: env_pool ids exist")
                .clone();
            let frame_scene = scene.with_environment(env);
            let settings = RenderSettings {
                width: recipe.image.width,
                height: recipe.image.height,
                spp: cfg.spp,
                max_depth: MAX_DEPTH,
                aperture: cfg.aperture,
                focus_distance: cfg.focus_distance,
                vertical_fov_deg: cfg.camera.vertical_fov_deg,
                jitter: true,
            };
            let started = Instant::now();
            let rgb = render_rgb(
                &frame_scene,
                &accel,
                &cfg.camera,
                &settings,
                recipe.master_seed,
                cfg.frame_index,
            );
            let labels = render_labels(&frame_scene, &accel, &cfg.camera, &settings);
            let render_seconds = started.elapsed().as_secs_f64();
            let (bytes, warnings) = tonemap_srgb(&rgb);

            let rgb_rel = format!("rgb/frame_{:06}.png", cfg.frame_index);
            let label_rel = format!("labels/frame_{:06}.png", cfg.frame_index);
            write_rgb_png(
                &bytes,
                settings.width,
                settings.height,
                &out_dir.join(&rgb_rel),
            )?;
            write_label_png(
                &labels,
                settings.width,
                settings.height,
                &out_dir.join(&label_rel),
            )?;
            records.push(FrameRecord {
                frame_index: cfg.frame_index,
                model_index: model_index as u32,
                rgb_path: rgb_rel,
                label_path: label_rel,
                camera: cfg.camera,
                env_id: cfg.env_id,
                spp: cfg.spp,
                aperture: cfg.aperture,
                focus_distance: cfg.focus_distance,
                stream_tag: cfg.stream_tag,
                render_seconds,
                warnings,
            });
        }
    }

    let manifest = DatasetManifest {
        format_version: 1,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: recipe.master_seed,
        recipe: recipe.clone(),
        palette: palette(),
        frames: records,
    };
    write_manifest(&manifest, out_dir)?;
    Ok(manifest)
}

/// Serialize and atomically rename into place.
fn write_manifest(manifest: &DatasetManifest, out_dir: &Path) -> Result<()> {
    let body = serde_json::to_vec_pretty(manifest)?;
    let tmp = out_dir.join("manifest.json.tmp");
    let final_path = out_dir.join(MANIFEST_NAME);
    std::fs::write(&tmp, &body).map_err(|e| Error::io(tmp.clone(), e))?;
    std::fs::rename(&tmp, &final_path).map_err(|e| Error::io(final_path.clone(), e))?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let path = dir.join(MANIFEST_NAME);
    let bytes = std::fs::read(&path).map_err(|e| Error::io(path.clone(), e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Check a dataset directory against its manifest. Returns human-readable
/// violations; an empty list means the dataset is complete and well formed.
pub fn validate_manifest(manifest: &DatasetManifest, dir: &Path) -> Vec<String> {
    let mut violations = Vec::new();
    if manifest.frames.len() as u64 != manifest.recipe.frames {
        violations.push(format!(
            "manifest lists {} frames but the recipe requested {}",
            manifest.frames.len(),
            manifest.recipe.frames
        ));
    }
    let expected_palette = palette();
    if manifest.palette != expected_palette {
        violations.push("palette does not match the class table".to_string());
    }
    let (w, h) = (manifest.recipe.image.width, manifest.recipe.image.height);
    for record in &manifest.frames {
        for (which, rel) in [("rgb", &record.rgb_path), ("label", &record.label_path)] {
            let path = dir.join(rel);
            if !path.is_file() {
                violations.push(format!(
                    "frame {}: missing {which} file {rel}",
                    record.frame_index
                ));
                continue;
            }
            let img = match image::open(&path) {
                Ok(img) => img,
                Err(e) => {
                    violations.push(format!(
                        "frame {}: unreadable {which} file {rel}: {e}",
                        record.frame_index
                    ));
                    continue;
                }
            };
            let dims = (img.width(), img.height());
            if dims != (w, h) {
                violations.push(format!(
                    "frame {}: {which} file {rel} is {}x{}, recipe says {w}x{h}",
                    record.frame_index, dims.0, dims.1
                ));
            }
            if which == "label" {
                let gray = img.to_luma8();
                let bad = gray.pixels().filter(|p| p.0[0] > 4).count();
                if bad > 0 {
                    violations.push(format!(
                        "frame {}: label file {rel} has {bad} pixels outside class ids 0..=4",
                        record.frame_index
                    ));
                }
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recipe::parse_recipe;
    use tempfile::tempdir;

    /// Small everything: fast to render, still exercises the whole loop.
    fn tiny_recipe(frames: u64) -> Recipe {
        let doc = format!(
            r#"{{
                "master_seed": 7,
                "frames": {frames},
                "image": {{ "width": 24, "height": 18 }},
                "tree": {{
                    "levels": 2, "children_min": 2, "children_max": 3,
                    "segments_per_branch": 2, "sides": 4
                }},
                "scatter": {{ "fruit_density": 1.0, "leaf_density": 4.0 }},
                "randomization": {{
                    "spp_range": [2, 2],
                    "aperture_range": [0.0, 0.0]
                }},
                "environment": [
                    {{ "id": "sky", "sky": {{ "width": 32, "height": 16 }} }}
                ]
            }}"#
        );
        parse_recipe(doc.as_bytes()).unwrap()
    }

    #[test]
    fn three_frames_produce_seven_files() {
        let dir = tempdir().unwrap();
        let manifest = generate_dataset(&tiny_recipe(3), dir.path()).unwrap();
        assert_eq!(manifest.frames.len(), 3);
        for i in 0..3 {
            assert!(dir.path().join(format!("rgb/frame_{i:06}.png")).is_file());
            assert!(dir
                .path()
                .join(format!("labels/frame_{i:06}.png"))
                .is_file());
        }
        assert!(dir.path().join(MANIFEST_NAME).is_file());
        assert!(validate_manifest(&manifest, dir.path()).is_empty());
    }

    #[test]
    fn rerun_is_byte_identical_except_wall_time() {
        let recipe = tiny_recipe(2);
        let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
        let mut ma = generate_dataset(&recipe, a.path()).unwrap();
        let mut mb = generate_dataset(&recipe, b.path()).unwrap();
        for rec in &ma.frames {
            let pa = std::fs::read(a.path().join(&rec.rgb_path)).unwrap();
            let pb = std::fs::read(b.path().join(&rec.rgb_path)).unwrap();
            assert_eq!(pa, pb, "rgb bytes differ for frame {}", rec.frame_index);
            let la = std::fs::read(a.path().join(&rec.label_path)).unwrap();
            let lb = std::fs::read(b.path().join(&rec.label_path)).unwrap();
            assert_eq!(la, lb, "label bytes differ for frame {}", rec.frame_index);
        }
        for rec in ma.frames.iter_mut().chain(mb.frames.iter_mut()) {
            rec.render_seconds = 0.0;
        }
        assert_eq!(ma, mb);
    }

    #[test]
    fn consecutive_frames_differ() {
        let dir = tempdir().unwrap();
        let manifest = generate_dataset(&tiny_recipe(2), dir.path()).unwrap();
        let a = std::fs::read(dir.path().join(&manifest.frames[0].rgb_path)).unwrap();
        let b = std::fs::read(dir.path().join(&manifest.frames[1].rgb_path)).unwrap();
        assert_ne!(a, b, "frames 0 and 1 rendered identically");
    }

    #[test]
    fn label_png_stores_class_ids() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("one.png");
        write_label_png(&[SemanticClass::Fruit], 1, 1, &path).unwrap();
        let img = image::open(&path).unwrap().to_luma8();
        assert_eq!(img.get_pixel(0, 0).0[0], 4);
    }

    #[test]
    fn rgb_png_round_trips() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("two.png");
        let pixels = [[1u8, 2, 3], [250, 150, 50], [0, 0, 0], [255, 255, 255]];
        write_rgb_png(&pixels, 2, 2, &path).unwrap();
        let img = image::open(&path).unwrap().to_rgb8();
        for (i, p) in img.pixels().enumerate() {
            assert_eq!(p.0, pixels[i]);
        }
    }

    #[test]
    fn label_histogram_support_bounded() {
        let dir = tempdir().unwrap();
        let manifest = generate_dataset(&tiny_recipe(1), dir.path()).unwrap();
        let img = image::open(dir.path().join(&manifest.frames[0].label_path))
            .unwrap()
            .to_luma8();
        assert!(img.pixels().all(|p| p.0[0] <= 4));
    }

    #[test]
    fn validation_flags_missing_file() {
        let dir = tempdir().unwrap();
        let manifest = generate_dataset(&tiny_recipe(2), dir.path()).unwrap();
        std::fs::remove_file(dir.path().join(&manifest.frames[1].label_path)).unwrap();
        let violations = validate_manifest(&manifest, dir.path());
        assert_eq!(violations.len(), 1, "{violations:?}");
        assert!(
            violations[0].contains("missing label file"),
            "{violations:?}"
        );
    }

    #[test]
    fn validation_flags_out_of_range_label() {
        let dir = tempdir().unwrap();
        let manifest = generate_dataset(&tiny_recipe(1), dir.path()).unwrap();
        // Overwrite one label with a value outside the class table.
        let path = dir.path().join(&manifest.frames[0].label_path);
        let mut img = image::open(&path).unwrap().to_luma8();
        img.put_pixel(0, 0, image::Luma([9]));
        img.save(&path).unwrap();
        let violations = validate_manifest(&manifest, dir.path());
        assert_eq!(violations.len(), 1, "{violations:?}");
        assert!(
            violations[0].contains("outside class ids"),
            "{violations:?}"
        );
    }

    #[test]
    fn validation_flags_wrong_dimensions() {
        let dir = tempdir().unwrap();
        let manifest = generate_dataset(&tiny_recipe(1), dir.path()).unwrap();
        let path = dir.path().join(&manifest.frames[0].rgb_path);
        write_rgb_png(&[[0, 0, 0]], 1, 1, &path).unwrap();
        let violations = validate_manifest(&manifest, dir.path());
        assert_eq!(violations.len(), 1, "{violations:?}");
        assert!(violations[0].contains("1x1"), "{violations:?}");
    }

    #[test]
    fn model_blocks_partition_frames() {
        let mut recipe = tiny_recipe(4);
        recipe.models_per_dataset = 2;
        let dir = tempdir().unwrap();
        let manifest = generate_dataset(&recipe, dir.path()).unwrap();
        let models: Vec<u32> = manifest.frames.iter().map(|f| f.model_index).collect();
        assert_eq!(models, [0, 0, 1, 1]);
        assert!(validate_manifest(&manifest, dir.path()).is_empty());
    }

    #[test]
    fn trajectory_mode_spaces_origins_evenly() {
        let mut recipe = tiny_recipe(4);
        recipe.camera.mode = CameraMode::Trajectory;
        let dir = tempdir().unwrap();
        let manifest = generate_dataset(&recipe, dir.path()).unwrap();
        let origins: Vec<_> = manifest.frames.iter().map(|f| f.camera.origin).collect();
        let step = (origins[1] - origins[0]).length();
        for pair in origins.windows(2) {
            assert!(((pair[1] - pair[0]).length() - step).abs() < 1e-9);
        }
        assert!(step > 0.0);
    }

    #[test]
    fn manifest_round_trips_through_disk() {
        let dir = tempdir().unwrap();
        let manifest = generate_dataset(&tiny_recipe(1), dir.path()).unwrap();
        let loaded = read_manifest(dir.path()).unwrap();
        assert_eq!(manifest, loaded);
    }
}
