//! Procedural orchard dataset generator.
//!
//! Builds parametric fruit trees, scatters fruit and leaves along their
//! branches, and renders paired RGB / semantic-label images with a CPU path
//! tracer. Every stage draws from counter-based random streams keyed on a
//! single master seed, so a dataset is reproducible byte for byte from its
//! recipe.
//!
//! The pipeline, in dependency order:
//!
//! 1. [`treegen`]: recursive branch skeletons and tube meshes.
//! 2. [`scatter`]: Poisson-count fruit/leaf placement along branches.
//! 3. [`scene`]: materials, environment maps, world assembly.
//! 4. [`camera`]: cylindrical-shell pose sampling and trajectories.
//! 5. [`randomizer`]: per-frame knobs (camera, exposure, environment).
//! 6. [`render`]: BVH-accelerated path tracing and the label pass.
//! 7. [`dataset`]: the frame loop, PNG output, manifest, validation.
//!
//! [`recipe`] defines the JSON configuration that drives all of it, and the
//! `orchard` binary wraps [`dataset::generate_dataset`] in a CLI.
//!
//! ```
//! use orchard::recipe::parse_recipe;
//!
//! let recipe = parse_recipe(br#"{ "master_seed": 11, "frames": 2 }"#).unwrap();
//! assert_eq!(recipe.image.width, 512);
//! ```

// Validation tests are written as `!(x > 0.0)` on purpose: the negated form
// rejects NaN, which `x <= 0.0` would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod dataset;
pub mod error;
pub mod hdr;
pub mod math;
pub mod mesh;
pub mod randomizer;
pub mod recipe;
pub mod render;
pub mod rng;
pub mod scatter;
pub mod scene;
pub mod treegen;

pub use error::{Error, Result};

/// Compiles every fenced Rust block in the guide as a doc-test, keeping the
/// book's examples honest.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(recipes, "../../../book/src/recipes.md");
    chapter!(trees, "../../../book/src/trees.md");
    chapter!(scattering, "../../../book/src/scattering.md");
    chapter!(environments, "../../../book/src/environments.md");
    chapter!(cameras, "../../../book/src/cameras.md");
    chapter!(randomization, "../../../book/src/randomization.md");
    chapter!(rendering, "../../../book/src/rendering.md");
    chapter!(datasets, "../../../book/src/datasets.md");
}
