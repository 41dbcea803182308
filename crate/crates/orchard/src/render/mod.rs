//! CPU Monte Carlo path tracer.
//!
//! Per frame it produces a linear-RGB grid and a pixel-aligned semantic
//! label grid. Every pixel owns a random stream derived from (seed, frame,
//! pixel), so the image is a pure function of its inputs no matter how
//! pixels are scheduled across threads.

pub mod bvh;

use rayon::prelude::*;

use crate::camera::CameraPose;
use crate::error::Result;
use crate::math::Vec3;
use crate::mesh::SemanticClass;
use crate::randomizer::stream_seed;
use crate::rng::{mix64, RandomStream};
use crate::scene::{Scene, SceneTriangle};

pub use bvh::{build_bvh, intersect_brute, Bvh};

/// Per-frame render parameters; width/height come from the recipe image
/// block, the rest from the resolved frame config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderSettings {
    pub width: u32,
    pub height: u32,
    pub spp: u32,
    pub max_depth: u32,
    /// Lens disc radius in meters; 0 is a pinhole.
    pub aperture: f64,
    pub focus_distance: f64,
    pub vertical_fov_deg: f64,
    /// Stochastic sub-pixel jitter for anti-aliasing. Disabled, every
    /// sample goes through the pixel center (label-style rays).
    pub jitter: bool,
}

impl Default for RenderSettings {
    fn default() -> Self {
        RenderSettings {
            width: 512,
            height: 512,
            spp: 16,
            max_depth: 4,
            aperture: 0.0,
            focus_distance: 1.0,
            vertical_fov_deg: 55.0,
            jitter: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
    pub t_min: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub triangle_index: usize,
    pub barycentrics: [f64; 3],
    pub normal: Vec3,
    pub class: SemanticClass,
}

/// Moller-Trumbore ray/triangle test. Returns (t, u, v) with t inside the
/// ray's open (t_min, t_max) interval. Triangles are two-sided.
#[inline]
pub fn ray_triangle(ray: &Ray, tri: &SceneTriangle) -> Option<(f64, f64, f64)> {
    let e1 = tri.vertices[1] - tri.vertices[0];
    let e2 = tri.vertices[2] - tri.vertices[0];
    let pvec = ray.direction.cross(e2);
    let det = e1.dot(pvec);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = ray.origin - tri.vertices[0];
    let u = tvec.dot(pvec) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(e1);
    let v = ray.direction.dot(qvec) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(qvec) * inv_det;
    if t > ray.t_min && t < ray.t_max {
        Some((t, u, v))
    } else {
        None
    }
}

/// Intersection backend. `Brute` exists so tests can prove the BVH changes
/// no output bit.
#[derive(Debug, Clone)]
pub enum Accel {
    Bvh(Bvh),
    Brute,
}

impl Accel {
    pub fn build(triangles: &[SceneTriangle]) -> Result<Accel> {
        Ok(Accel::Bvh(build_bvh(triangles)?))
    }
}

/// Nearest hit through the chosen backend.
pub fn intersect(accel: &Accel, triangles: &[SceneTriangle], ray: &Ray) -> Option<Hit> {
    match accel {
        Accel::Bvh(bvh) => bvh.intersect(triangles, ray),
        Accel::Brute => intersect_brute(triangles, ray),
    }
}

/// Offset applied along the normal when respawning a ray off a surface,
/// and the matching minimum hit distance.
const RAY_EPSILON: f64 = 1e-9;

struct PixelFrame {
    right: Vec3,
    up: Vec3,
    forward: Vec3,
    origin: Vec3,
    tan_half_fov: f64,
    aspect: f64,
}

impl PixelFrame {
    fn new(pose: &CameraPose, settings: &RenderSettings) -> PixelFrame {
        PixelFrame {
            right: pose.orientation.right,
            up: pose.orientation.up,
            forward: pose.orientation.forward,
            origin: pose.origin,
            tan_half_fov: (settings.vertical_fov_deg.to_radians() * 0.5).tan(),
            aspect: settings.width as f64 / settings.height as f64,
        }
    }

    /// Pinhole direction through image-plane coordinates (sx, sy) in pixels.
    fn pinhole_direction(&self, settings: &RenderSettings, sx: f64, sy: f64) -> Vec3 {
        let ndc_x = 2.0 * sx / settings.width as f64 - 1.0;
        let ndc_y = 1.0 - 2.0 * sy / settings.height as f64;
        (self.right * (ndc_x * self.tan_half_fov * self.aspect)
            + self.up * (ndc_y * self.tan_half_fov)
            + self.forward)
            .normalized()
    }

    /// Thin-lens primary ray. The two lens draws in (lx, ly) are always
    /// supplied by the caller so the random stream layout is identical for
    /// every aperture, including 0 (aperture 0 vs epsilon stays continuous).
    fn primary_ray(&self, settings: &RenderSettings, sx: f64, sy: f64, lens: (f64, f64)) -> Ray {
        let pin_dir = self.pinhole_direction(settings, sx, sy);
        if settings.aperture == 0.0 {
            return Ray {
                origin: self.origin,
                direction: pin_dir,
                t_min: RAY_EPSILON,
                t_max: f64::INFINITY,
            };
        }
        // Focus plane is perpendicular to forward at focus_distance.
        let along = pin_dir.dot(self.forward).max(1e-9);
        let focus_point = self.origin + pin_dir * (settings.focus_distance / along);
        let origin = self.origin
            + self.right * (lens.0 * settings.aperture)
            + self.up * (lens.1 * settings.aperture);
        Ray {
            origin,
            direction: (focus_point - origin).normalized(),
            t_min: RAY_EPSILON,
            t_max: f64::INFINITY,
        }
    }
}

/// Deterministic pinhole ray through the exact center of pixel (x, y).
/// Shared by the label pass and the label/geometry alignment oracle.
pub fn center_ray(pose: &CameraPose, settings: &RenderSettings, x: u32, y: u32) -> Ray {
    let frame = PixelFrame::new(pose, settings);
    let dir = frame.pinhole_direction(settings, x as f64 + 0.5, y as f64 + 0.5);
    Ray {
        origin: pose.origin,
        direction: dir,
        t_min: RAY_EPSILON,
        t_max: f64::INFINITY,
    }
}

/// Stream for one pixel of one frame: a bijective mix of the frame's pixel
/// seed with the pixel coordinates. Thread-schedule independent by design.
pub fn pixel_stream(master_seed: u64, frame_index: u64, x: u32, y: u32) -> RandomStream {
    let base = stream_seed(master_seed, frame_index, "pixel");
    RandomStream::new(mix64(base ^ (((y as u64) << 32) | x as u64)))
}

fn trace_path(
    scene: &Scene,
    accel: &Accel,
    mut ray: Ray,
    settings: &RenderSettings,
    stream: &mut RandomStream,
) -> Vec3 {
    let triangles: &[SceneTriangle] = &scene.triangles;
    let mut radiance = Vec3::ZERO;
    let mut throughput = Vec3::splat(1.0);
    for _ in 0..settings.max_depth {
        let Some(hit) = intersect(accel, triangles, &ray) else {
            radiance += throughput * scene.environment.radiance(ray.direction);
            break;
        };
        let material = scene.materials.for_class(hit.class);
        // Two-sided shading: flip the geometric normal toward the ray.
        let normal = if hit.normal.dot(ray.direction) > 0.0 {
            -hit.normal
        } else {
            hit.normal
        };
        let point = ray.origin + ray.direction * hit.t;
        let lobe = stream.next_f64();
        let direction = if lobe < material.specular_weight {
            // Mirror with a fuzz sphere scaled by roughness.
            let reflected = ray.direction.reflect(normal);
            let fuzzed = reflected + stream.unit_vector() * material.roughness;
            if fuzzed.dot(normal) <= 0.0 {
                break; // absorbed into the surface
            }
            fuzzed.normalized()
        } else {
            stream.cosine_hemisphere(normal)
        };
        throughput = throughput * material.albedo;
        ray = Ray {
            origin: point + normal * RAY_EPSILON,
            direction,
            t_min: RAY_EPSILON,
            t_max: f64::INFINITY,
        };
    }
    radiance
}

/// Path-traced linear RGB. Rows render in parallel on the current rayon
/// pool; per-pixel streams make the result identical for any worker count.
pub fn render_rgb(
    scene: &Scene,
    accel: &Accel,
    pose: &CameraPose,
    settings: &RenderSettings,
    master_seed: u64,
    frame_index: u64,
) -> Vec<Vec3> {
    let frame = PixelFrame::new(pose, settings);
    let (w, h) = (settings.width as usize, settings.height as usize);
    let mut buffer = vec![Vec3::ZERO; w * h];
    buffer.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            let mut stream = pixel_stream(master_seed, frame_index, x as u32, y as u32);
            let mut sum = Vec3::ZERO;
            for _ in 0..settings.spp {
                // Fixed draw layout per sample: jitter pair, lens pair.
                let (jx, jy) = (stream.next_f64(), stream.next_f64());
                let (lx, ly) = stream.unit_disc();
                let (sx, sy) = if settings.jitter {
                    (x as f64 + jx, y as f64 + jy)
                } else {
                    (x as f64 + 0.5, y as f64 + 0.5)
                };
                let ray = frame.primary_ray(settings, sx, sy, (lx, ly));
                sum += trace_path(scene, accel, ray, settings, &mut stream);
            }
            *out = sum / settings.spp as f64;
        }
    });
    buffer
}

/// Ground-truth pass: one pinhole ray through each pixel center, nearest
/// class or BACKGROUND. No randomness, no depth of field.
pub fn render_labels(
    scene: &Scene,
    accel: &Accel,
    pose: &CameraPose,
    settings: &RenderSettings,
) -> Vec<SemanticClass> {
    let triangles: &[SceneTriangle] = &scene.triangles;
    let (w, h) = (settings.width as usize, settings.height as usize);
    let mut labels = vec![SemanticClass::Background; w * h];
    labels.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            let ray = center_ray(pose, settings, x as u32, y as u32);
            *out = match intersect(accel, triangles, &ray) {
                Some(hit) => hit.class,
                None => SemanticClass::Background,
            };
        }
    });
    labels
}

fn srgb_byte(linear: f64) -> u8 {
    let c = linear.clamp(0.0, 1.0);
    let encoded = if c <= 0.0031308 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    };
    // f64::round is round-half-away-from-zero.
    (encoded * 255.0).round() as u8
}

/// Clamp, apply the sRGB transfer, and quantize to bytes. Non-finite
/// channels are sanitized to 0; the count is returned for the manifest.
pub fn tonemap_srgb(rgb: &[Vec3]) -> (Vec<[u8; 3]>, u64) {
    let mut warnings = 0u64;
    let out = rgb
        .iter()
        .map(|v| {
            if !v.is_finite() {
                warnings += 1;
                return [0, 0, 0];
            }
            [srgb_byte(v.x), srgb_byte(v.y), srgb_byte(v.z)]
        })
        .collect();
    (out, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{look_at, CameraPose};
    use crate::math::{vec3, Aabb};
    use crate::mesh::{LabeledMesh, LabeledTriangle};
    use crate::scatter::icosphere;
    use crate::scene::{assemble, EnvironmentKind, EnvironmentMap, Material, MaterialSet, Scene};
    use std::sync::Arc;

    fn pose_toward_origin(origin: Vec3, fov: f64) -> CameraPose {
        CameraPose {
            origin,
            target: Vec3::ZERO,
            orientation: look_at(origin, Vec3::ZERO, Vec3::Z).unwrap(),
            vertical_fov_deg: fov,
        }
    }

    fn sphere_mesh(radius: f64, subdivision: u32, class: SemanticClass) -> LabeledMesh {
        let mut mesh = LabeledMesh::new();
        for t in icosphere(subdivision) {
            mesh.push(LabeledTriangle::new(
                t[0] * radius,
                t[1] * radius,
                t[2] * radius,
                class,
            ));
        }
        mesh
    }

    fn sphere_scene(albedo: Vec3, env_value: Vec3) -> Scene {
        let materials = MaterialSet {
            fruit: Material::diffuse(albedo),
            ..MaterialSet::default()
        };
        assemble(
            &[sphere_mesh(1.0, 3, SemanticClass::Fruit)],
            materials,
            Arc::new(EnvironmentMap::constant(env_value)),
        )
        .unwrap()
    }

    fn empty_scene(env: EnvironmentMap) -> Scene {
        Scene {
            triangles: Arc::new(Vec::new()),
            materials: MaterialSet::default(),
            environment: Arc::new(env),
            bounds: Aabb::of_point(Vec3::ZERO),
        }
    }

    #[test]
    fn icosphere_hit_at_analytic_distance() {
        let scene = sphere_scene(Vec3::splat(1.0), Vec3::splat(1.0));
        let accel = Accel::build(&scene.triangles).unwrap();
        let ray = Ray {
            origin: vec3(0.0, 0.0, -5.0),
            direction: Vec3::Z,
            t_min: 1e-9,
            t_max: f64::INFINITY,
        };
        let hit = intersect(&accel, &scene.triangles, &ray).unwrap();
        assert!((hit.t - 4.0).abs() < 0.01, "t = {}", hit.t);
        assert_eq!(hit.class, SemanticClass::Fruit);
    }

    #[test]
    fn miss_returns_none() {
        let scene = sphere_scene(Vec3::splat(1.0), Vec3::splat(1.0));
        let accel = Accel::build(&scene.triangles).unwrap();
        let ray = Ray {
            origin: vec3(0.0, 0.0, -5.0),
            direction: -Vec3::Z,
            t_min: 1e-9,
            t_max: f64::INFINITY,
        };
        assert!(intersect(&accel, &scene.triangles, &ray).is_none());
    }

    #[test]
    fn empty_scene_returns_env_radiance_exactly() {
        // Distinct texel values; each centered pixel must fetch exactly the
        // environment value of its own primary direction.
        let radiance: Vec<Vec3> = (0..32).map(|i| Vec3::splat(i as f64)).collect();
        let env =
            EnvironmentMap::from_grid(8, 4, radiance, EnvironmentKind::ProceduralSky).unwrap();
        let scene = empty_scene(env);
        let pose = pose_toward_origin(vec3(3.0, 0.0, 0.0), 70.0);
        let settings = RenderSettings {
            width: 16,
            height: 16,
            spp: 1,
            jitter: false,
            ..RenderSettings::default()
        };
        let rgb = render_rgb(&scene, &Accel::Brute, &pose, &settings, 1, 0);
        for y in 0..16 {
            for x in 0..16 {
                let ray = center_ray(&pose, &settings, x, y);
                let want = scene.environment.radiance(ray.direction);
                assert_eq!(rgb[(y * 16 + x) as usize], want, "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn white_furnace_unit() {
        // Convex white diffuse body in a unit environment: every path
        // escapes with throughput 1, so each pixel is exactly 1.
        let scene = sphere_scene(Vec3::splat(1.0), Vec3::splat(1.0));
        let accel = Accel::build(&scene.triangles).unwrap();
        let pose = pose_toward_origin(vec3(0.0, -4.0, 0.0), 40.0);
        let settings = RenderSettings {
            width: 24,
            height: 24,
            spp: 8,
            max_depth: 4,
            ..RenderSettings::default()
        };
        let rgb = render_rgb(&scene, &accel, &pose, &settings, 5, 0);
        for (i, p) in rgb.iter().enumerate() {
            assert!(
                (p.x - 1.0).abs() < 1e-9 && (p.y - 1.0).abs() < 1e-9 && (p.z - 1.0).abs() < 1e-9,
                "pixel {i} = {p:?}"
            );
        }
    }

    #[test]
    fn aperture_zero_matches_epsilon_aperture() {
        let scene = sphere_scene(vec3(0.7, 0.4, 0.2), Vec3::splat(0.8));
        let accel = Accel::build(&scene.triangles).unwrap();
        let pose = pose_toward_origin(vec3(0.0, -4.0, 1.0), 45.0);
        let base = RenderSettings {
            width: 24,
            height: 24,
            spp: 2,
            focus_distance: 4.0,
            ..RenderSettings::default()
        };
        let pinhole = render_rgb(&scene, &accel, &pose, &base, 9, 3);
        let tiny = RenderSettings {
            aperture: 1e-12,
            ..base
        };
        let lens = render_rgb(&scene, &accel, &pose, &tiny, 9, 3);
        for (a, b) in pinhole.iter().zip(&lens) {
            assert!((*a - *b).length() < 1e-6, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn worker_count_does_not_change_pixels() {
        let scene = sphere_scene(vec3(0.7, 0.4, 0.2), Vec3::splat(0.8));
        let accel = Accel::build(&scene.triangles).unwrap();
        let pose = pose_toward_origin(vec3(2.0, -3.0, 1.0), 50.0);
        let settings = RenderSettings {
            width: 20,
            height: 14,
            spp: 4,
            ..RenderSettings::default()
        };
        let render_in_pool = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| render_rgb(&scene, &accel, &pose, &settings, 31, 7))
        };
        let one = render_in_pool(1);
        let four = render_in_pool(4);
        assert_eq!(one, four);
    }

    #[test]
    fn bvh_and_brute_render_identically() {
        let scene = sphere_scene(vec3(0.2, 0.6, 0.3), Vec3::splat(0.5));
        let accel = Accel::build(&scene.triangles).unwrap();
        let pose = pose_toward_origin(vec3(-3.0, 2.0, 0.5), 45.0);
        let settings = RenderSettings {
            width: 16,
            height: 16,
            spp: 4,
            ..RenderSettings::default()
        };
        let fast = render_rgb(&scene, &accel, &pose, &settings, 2, 1);
        let slow = render_rgb(&scene, &Accel::Brute, &pose, &settings, 2, 1);
        assert_eq!(fast, slow);
        let fast_labels = render_labels(&scene, &accel, &pose, &settings);
        let slow_labels = render_labels(&scene, &Accel::Brute, &pose, &settings);
        assert_eq!(fast_labels, slow_labels);
    }

    #[test]
    fn labels_empty_scene_all_background() {
        let scene = empty_scene(EnvironmentMap::constant(Vec3::splat(1.0)));
        let pose = pose_toward_origin(vec3(3.0, 0.0, 0.0), 55.0);
        let settings = RenderSettings {
            width: 8,
            height: 8,
            ..RenderSettings::default()
        };
        let labels = render_labels(&scene, &Accel::Brute, &pose, &settings);
        assert!(labels.iter().all(|&l| l == SemanticClass::Background));
    }

    #[test]
    fn labels_fruit_at_center() {
        let scene = sphere_scene(Vec3::splat(0.5), Vec3::splat(1.0));
        let accel = Accel::build(&scene.triangles).unwrap();
        let pose = pose_toward_origin(vec3(0.0, -4.0, 0.0), 55.0);
        let settings = RenderSettings {
            width: 33,
            height: 33,
            ..RenderSettings::default()
        };
        let labels = render_labels(&scene, &accel, &pose, &settings);
        assert_eq!(labels[(16 * 33 + 16) as usize], SemanticClass::Fruit);
        assert_eq!(labels[0], SemanticClass::Background);
    }

    #[test]
    fn labels_align_with_center_ray_hits() {
        let scene = sphere_scene(Vec3::splat(0.5), Vec3::splat(1.0));
        let accel = Accel::build(&scene.triangles).unwrap();
        let pose = pose_toward_origin(vec3(1.5, -3.0, 0.8), 50.0);
        let settings = RenderSettings {
            width: 40,
            height: 30,
            ..RenderSettings::default()
        };
        let labels = render_labels(&scene, &accel, &pose, &settings);
        for y in 0..30u32 {
            for x in 0..40u32 {
                let ray = center_ray(&pose, &settings, x, y);
                let hit = intersect(&accel, &scene.triangles, &ray);
                let label = labels[(y * 40 + x) as usize];
                assert_eq!(hit.is_some(), label != SemanticClass::Background);
            }
        }
    }

    #[test]
    fn energy_bounded_by_environment_peak() {
        let scene = sphere_scene(vec3(1.0, 1.0, 1.0), vec3(2.5, 1.0, 0.25));
        let accel = Accel::build(&scene.triangles).unwrap();
        let pose = pose_toward_origin(vec3(0.0, -3.0, 1.0), 55.0);
        let settings = RenderSettings {
            width: 16,
            height: 16,
            spp: 8,
            ..RenderSettings::default()
        };
        let rgb = render_rgb(&scene, &accel, &pose, &settings, 77, 0);
        for p in &rgb {
            assert!(p.x <= 2.5 + 1e-9 && p.y <= 1.0 + 1e-9 && p.z <= 0.25 + 1e-9);
        }
    }

    #[test]
    fn tonemap_frozen_bytes() {
        let (bytes, warnings) = tonemap_srgb(&[
            Vec3::ZERO,
            Vec3::splat(1.0),
            Vec3::splat(0.5),
            Vec3::splat(2.0),
            Vec3::splat(0.25),
            Vec3::splat(0.75),
            Vec3::splat(0.0031308),
            vec3(f64::NAN, 0.5, 0.5),
        ]);
        assert_eq!(warnings, 1);
        assert_eq!(bytes[0], [0, 0, 0]);
        assert_eq!(bytes[1], [255, 255, 255]);
        assert_eq!(bytes[2], [188, 188, 188]);
        assert_eq!(bytes[3], [255, 255, 255]);
        assert_eq!(bytes[4], [137, 137, 137]);
        assert_eq!(bytes[5], [225, 225, 225]);
        assert_eq!(bytes[6], [10, 10, 10]);
        assert_eq!(bytes[7], [0, 0, 0]);
    }

    #[test]
    fn label_pass_is_deterministic() {
        let scene = sphere_scene(Vec3::splat(0.5), Vec3::splat(1.0));
        let accel = Accel::build(&scene.triangles).unwrap();
        let pose = pose_toward_origin(vec3(0.5, -2.5, 0.2), 60.0);
        let settings = RenderSettings {
            width: 21,
            height: 17,
            ..RenderSettings::default()
        };
        let a = render_labels(&scene, &accel, &pose, &settings);
        let b = render_labels(&scene, &accel, &pose, &settings);
        assert_eq!(a, b);
    }

    #[test]
    fn pixel_streams_differ_between_pixels() {
        let a = pixel_stream(1, 0, 0, 0).next_u64();
        let b = pixel_stream(1, 0, 1, 0).next_u64();
        let c = pixel_stream(1, 0, 0, 1).next_u64();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(b, c);
    }

    #[test]
    fn specular_sphere_renders_finite() {
        let materials = MaterialSet {
            fruit: Material {
                albedo: vec3(0.9, 0.9, 0.9),
                specular_weight: 1.0,
                roughness: 0.05,
            },
            ..MaterialSet::default()
        };
        let scene = assemble(
            &[sphere_mesh(1.0, 2, SemanticClass::Fruit)],
            materials,
            Arc::new(EnvironmentMap::constant(vec3(0.9, 0.5, 0.3))),
        )
        .unwrap();
        let accel = Accel::build(&scene.triangles).unwrap();
        let pose = pose_toward_origin(vec3(0.0, -3.5, 0.0), 45.0);
        let settings = RenderSettings {
            width: 12,
            height: 12,
            spp: 8,
            ..RenderSettings::default()
        };
        let rgb = render_rgb(&scene, &accel, &pose, &settings, 3, 0);
        assert!(rgb.iter().all(|p| p.is_finite()));
        assert!(rgb.iter().any(|p| p.length() > 0.0));
    }

    #[test]
    fn triad_orientation_places_up_in_image_top() {
        // A sphere above the camera axis must label pixels in the upper
        // image half (low y), pinning the screen-space convention.
        let mut mesh = LabeledMesh::new();
        for t in icosphere(2) {
            mesh.push(LabeledTriangle::new(
                t[0] * 0.4 + vec3(0.0, 0.0, 1.2),
                t[1] * 0.4 + vec3(0.0, 0.0, 1.2),
                t[2] * 0.4 + vec3(0.0, 0.0, 1.2),
                SemanticClass::Fruit,
            ));
        }
        // Keep a second blob at the origin so assembly recentering does not
        // cancel the offset entirely.
        let base = sphere_mesh(0.4, 2, SemanticClass::Trunk);
        let scene = assemble(
            &[mesh, base],
            MaterialSet::default(),
            Arc::new(EnvironmentMap::constant(Vec3::splat(1.0))),
        )
        .unwrap();
        let accel = Accel::build(&scene.triangles).unwrap();
        let pose = pose_toward_origin(vec3(0.0, -5.0, 0.0), 50.0);
        let settings = RenderSettings {
            width: 31,
            height: 31,
            ..RenderSettings::default()
        };
        let labels = render_labels(&scene, &accel, &pose, &settings);
        let fruit_rows: Vec<usize> = (0..31)
            .filter(|&y| (0..31).any(|x| labels[y * 31 + x] == SemanticClass::Fruit))
            .collect();
        let trunk_rows: Vec<usize> = (0..31)
            .filter(|&y| (0..31).any(|x| labels[y * 31 + x] == SemanticClass::Trunk))
            .collect();
        assert!(!fruit_rows.is_empty() && !trunk_rows.is_empty());
        assert!(
            fruit_rows.iter().max() < trunk_rows.iter().max(),
            "+Z object should occupy higher (smaller y) rows"
        );
    }
}
