//! Full artifact pipeline on files: generate worlds, train briefly, evaluate,
//! and render one episode map to SVG — the same path the `wpnav` binary
//! drives, called as a library.
//!
//! ```bash
//! cargo run --release --example render_episode
//! ```

use std::path::PathBuf;
use wpnav::cli::{
    evaluate_cmd, generate_cmd, render_cmd, train_cmd, EvalOptions, ExperimentConfig,
    GenerateSection, SeedsSection, TrainSection,
};
use wpnav::trainer::NavigatorKind;
use wpnav::world::{EpisodeParams, WorldParams, WorldStyle};

fn main() -> wpnav::Result<()> {
    let root = PathBuf::from(std::env::var("WPNAV_OUT_ROOT").unwrap_or_else(|_| "runs".into()))
        .join("example_render");
    let cfg = ExperimentConfig {
        world: WorldParams {
            width_cells: 40,
            height_cells: 40,
            resolution: 0.25,
            style: WorldStyle::Scatter { obstacles: 2, obstacle_min: 2, obstacle_max: 3 },
        },
        episode: EpisodeParams {
            min_geodesic: 1.5,
            max_geodesic: 4.0,
            success_distance: 0.5,
            goal_marker: true,
            marker_size: 3,
            goal_clearance: 1.5,
            max_attempts: 400,
        },
        seeds: SeedsSection {
            train_worlds: (0..6).collect(),
            val_worlds: vec![100, 101],
            generate_worlds: vec![400],
        },
        generate: GenerateSection { episodes_per_world: 5 },
        train: TrainSection {
            total_env_steps: std::env::var("WPNAV_TRAIN_STEPS")
                .ok()
                .and_then(|s| s.parse().ok())
                .unwrap_or(40_000),
            eval_every_steps: 8_192,
            eval_episodes: 30,
            target_sr: Some(0.9),
        },
        ..ExperimentConfig::default()
    };

    println!("generating worlds...");
    let files = generate_cmd(&cfg, &root.join("worlds"), true)?;
    println!("  {}", files[0].display());

    println!("training briefly...");
    let outcome = train_cmd(&cfg, &root.join("train"), true)?;
    println!("  best SPL {:.3} (SR {:.3})", outcome.best_spl, outcome.best_sr);

    println!("evaluating...");
    let opts = EvalOptions {
        navigator: NavigatorKind::Continuous,
        with_sct: true,
        allow_digest_mismatch: false,
        max_episodes: 0,
    };
    let artifacts =
        evaluate_cmd(&cfg, &outcome.best_checkpoint, &files, &opts, &root.join("eval"), true)?;
    println!("  {}", artifacts.metrics_csv.display());

    let svg = root.join("episode.svg");
    render_cmd(&files[0], &artifacts.trajectories, None, &svg, true)?;
    println!("rendered {}", svg.display());
    println!("(gray = free space, blue square = start, red square = goal, orange = path)");
    Ok(())
}
