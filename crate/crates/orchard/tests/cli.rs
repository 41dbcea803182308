//! End-to-end checks of the `orchard` binary: exit codes, file layout, and
//! stats output against library oracles.

use std::path::Path;
use std::process::{Command, Output};

use orchard::randomizer::stream_seed;
use orchard::recipe::parse_recipe;
use orchard::treegen::{generate_skeleton, skeleton_stats};

const BIN: &str = env!("CARGO_BIN_EXE_orchard");

fn recipe_file(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("recipe.json");
    std::fs::write(
        &path,
        br#"{
            "master_seed": 31,
            "frames": 2,
            "image": { "width": 20, "height": 16 },
            "tree": { "levels": 2, "children_min": 2, "children_max": 2,
                      "segments_per_branch": 2, "sides": 3 },
            "randomization": { "spp_range": [1, 1] }
        }"#,
    )
    .unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

#[test]
fn generate_then_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let recipe = recipe_file(dir.path());
    let out = dir.path().join("dataset");

    let generate = run(&[
        "generate",
        "--recipe",
        recipe.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert!(
        generate.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&generate.stderr)
    );
    for name in [
        "rgb/frame_000000.png",
        "rgb/frame_000001.png",
        "labels/frame_000000.png",
        "labels/frame_000001.png",
        "manifest.json",
    ] {
        assert!(out.join(name).is_file(), "missing {name}");
    }

    let validate = run(&["validate", "--dataset", out.to_str().unwrap()]);
    assert!(validate.status.success());

    // Break the dataset; validation must now fail and name the file.
    std::fs::remove_file(out.join("labels/frame_000001.png")).unwrap();
    let validate = run(&["validate", "--dataset", out.to_str().unwrap()]);
    assert!(!validate.status.success());
    let stderr = String::from_utf8_lossy(&validate.stderr);
    assert!(stderr.contains("frame_000001"), "stderr: {stderr}");
}

#[test]
fn frame_and_seed_overrides_reach_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let recipe = recipe_file(dir.path());
    let out = dir.path().join("dataset");
    let generate = run(&[
        "generate",
        "--recipe",
        recipe.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--frames",
        "1",
        "--seed",
        "900",
    ]);
    assert!(generate.status.success());
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 900);
    assert_eq!(manifest["recipe"]["frames"], 1);
    assert_eq!(manifest["frames"].as_array().unwrap().len(), 1);
}

#[test]
fn stats_match_the_library_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let recipe_path = recipe_file(dir.path());
    let stats = run(&["stats", "--recipe", recipe_path.to_str().unwrap()]);
    assert!(stats.status.success());
    let report: serde_json::Value = serde_json::from_slice(&stats.stdout).unwrap();

    let recipe = parse_recipe(&std::fs::read(&recipe_path).unwrap()).unwrap();
    let skeleton =
        generate_skeleton(&recipe.tree, stream_seed(recipe.master_seed, 0, "tree")).unwrap();
    let expected = skeleton_stats(&skeleton);
    assert_eq!(
        report["skeleton"]["count_per_level"],
        serde_json::json!(expected.count_per_level)
    );
    assert_eq!(
        report["skeleton"]["max_radius"],
        serde_json::json!(expected.max_radius)
    );
    assert!(report["expected_leaves"].as_f64().unwrap() > 0.0);
}

#[test]
fn bad_recipe_reports_location_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, br#"{ "master_seed": 1, "framez": 2 }"#).unwrap();
    let out = dir.path().join("dataset");
    let generate = run(&[
        "generate",
        "--recipe",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!generate.status.success());
    let stderr = String::from_utf8_lossy(&generate.stderr);
    assert!(stderr.contains("framez"), "stderr: {stderr}");
    assert!(
        !out.join("manifest.json").exists(),
        "failed run must not leave a manifest"
    );
}

#[test]
fn missing_dataset_directory_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let validate = run(&["validate", "--dataset", missing.to_str().unwrap()]);
    assert!(!validate.status.success());
}
