use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use orchard::dataset::{generate_dataset, read_manifest, validate_manifest};
use orchard::randomizer::{derive_stream, stream_seed};
use orchard::recipe::{parse_recipe, Recipe};
use orchard::scatter::scatter_attachments;
use orchard::treegen::{generate_skeleton, skeleton_stats, SkeletonStats};

#[derive(Parser)]
#[command(
    name = "orchard",
    version,
    about = "Procedural orchard dataset generator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a dataset from a recipe.
    Generate {
        /// Recipe JSON path.
        #[arg(long)]
        recipe: PathBuf,
        /// Output directory (created if absent).
        #[arg(long)]
        out: PathBuf,
        /// Override the recipe's frame count.
        #[arg(long)]
        frames: Option<u64>,
        /// Override the recipe's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores). Output bytes do not depend
        /// on this.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print skeleton statistics and expected attachment counts without
    /// rendering.
    Stats {
        #[arg(long)]
        recipe: PathBuf,
    },
    /// Check a generated dataset against its manifest.
    Validate {
        /// Dataset directory containing manifest.json.
        #[arg(long)]
        dataset: PathBuf,
    },
}

#[derive(Serialize)]
struct StatsReport {
    master_seed: u64,
    skeleton: SkeletonStats,
    eligible_branch_length: f64,
    expected_fruit: f64,
    expected_leaves: f64,
    actual_fruit: usize,
    actual_leaves: usize,
}

fn load_recipe(path: &PathBuf) -> orchard::Result<Recipe> {
    let bytes = std::fs::read(path).map_err(|e| orchard::error::Error::io(path.clone(), e))?;
    parse_recipe(&bytes)
}

/// Print to stdout, exiting quietly if the reader closed the pipe (e.g.
/// `orchard stats | head`); Rust ignores SIGPIPE, so println! would panic.
fn emit(text: &str) {
    use std::io::Write;
    if writeln!(std::io::stdout(), "{text}").is_err() {
        std::process::exit(0);
    }
}

fn run_generate(
    recipe_path: PathBuf,
    out: PathBuf,
    frames: Option<u64>,
    seed: Option<u64>,
    workers: Option<usize>,
) -> orchard::Result<()> {
    if let Some(n) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| orchard::error::Error::Recipe(format!("thread pool: {e}")))?;
    }
    let mut recipe = load_recipe(&recipe_path)?;
    if let Some(n) = frames {
        recipe.frames = n;
    }
    if let Some(s) = seed {
        recipe.master_seed = s;
    }
    // The manifest echoes the post-override recipe, so the printed seed and
    // frame count always match what was rendered.
    let manifest = generate_dataset(&recipe, &out)?;
    emit(&format!(
        "wrote {} frames (seed {}) to {}",
        manifest.frames.len(),
        manifest.master_seed,
        out.display()
    ));
    Ok(())
}

fn run_stats(recipe_path: PathBuf) -> orchard::Result<()> {
    let recipe = load_recipe(&recipe_path)?;
    let tree_seed = stream_seed(recipe.master_seed, 0, "tree");
    let skeleton = generate_skeleton(&recipe.tree, tree_seed)?;
    let stats = skeleton_stats(&skeleton);
    let eligible: f64 = skeleton
        .branches
        .iter()
        .filter(|b| b.level >= recipe.scatter.eligible_min_level)
        .map(|b| b.length())
        .sum();
    let mut stream = derive_stream(recipe.master_seed, 0, "scatter");
    let attachments = scatter_attachments(&skeleton, &recipe.scatter, &mut stream)?;
    let fruit = attachments
        .iter()
        .filter(|a| a.kind == orchard::scatter::AttachmentKind::Fruit)
        .count();
    let report = StatsReport {
        master_seed: recipe.master_seed,
        skeleton: stats,
        eligible_branch_length: eligible,
        expected_fruit: recipe.scatter.fruit_density * eligible,
        expected_leaves: recipe.scatter.leaf_density * eligible,
        actual_fruit: fruit,
        actual_leaves: attachments.len() - fruit,
    };
    emit(&serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn run_validate(dataset: PathBuf) -> orchard::Result<Vec<String>> {
    let manifest = read_manifest(&dataset)?;
    Ok(validate_manifest(&manifest, &dataset))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate {
            recipe,
            out,
            frames,
            seed,
            workers,
        } => run_generate(recipe, out, frames, seed, workers).map(|()| Vec::new()),
        Command::Stats { recipe } => run_stats(recipe).map(|()| Vec::new()),
        Command::Validate { dataset } => run_validate(dataset),
    };
    match outcome {
        Ok(violations) if violations.is_empty() => ExitCode::SUCCESS,
        Ok(violations) => {
            for v in &violations {
                eprintln!("violation: {v}");
            }
            eprintln!("{} violation(s) found", violations.len());
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
