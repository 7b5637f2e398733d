//! Train a fully continuous waypoint prediction policy with PPO on empty
//! rooms and watch held-out success climb. A few minutes of CPU time.
//!
//! ```bash
//! cargo run --release --example train_waypoint_policy
//! # faster smoke run:
//! WPNAV_TRAIN_STEPS=30000 cargo run --example train_waypoint_policy
//! ```

use std::path::PathBuf;
use wpnav::actionspace::ExpressivityConfig;
use wpnav::policy::PolicyConfig;
use wpnav::trainer::{train, NavigatorKind, PPOConfig, TrainParams};
use wpnav::world::{EpisodeParams, WorldParams, WorldStyle};

fn main() -> wpnav::Result<()> {
    let steps: u64 = std::env::var("WPNAV_TRAIN_STEPS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(120_000);
    let out_dir = PathBuf::from(
        std::env::var("WPNAV_OUT_ROOT").unwrap_or_else(|_| "runs".into()),
    )
    .join("example_train");

    let params = TrainParams {
        ppo: PPOConfig::desk(),
        policy: PolicyConfig {
            expressivity: ExpressivityConfig::wpn(),
            ..PolicyConfig::default()
        },
        world_params: WorldParams {
            width_cells: 56,
            height_cells: 56,
            resolution: 0.25,
            style: WorldStyle::Empty,
        },
        episode_params: EpisodeParams {
            min_geodesic: 1.5,
            max_geodesic: 4.0,
            success_distance: 0.5,
            goal_marker: true,
            marker_size: 3,
            goal_clearance: 1.5,
            max_attempts: 400,
        },
        navigator: NavigatorKind::Continuous,
        train_world_seeds: (0..8).collect(),
        val_world_seeds: (100..104).collect(),
        run_seed: 1,
        total_env_steps: steps,
        eval_every_steps: 8_192,
        eval_episodes: 60,
        target_sr: Some(0.9),
        out_dir,
        digest: "example".into(),
    };

    println!("training WPN (continuous distance, continuous offset) for up to {steps} env steps...");
    let t0 = std::time::Instant::now();
    let outcome = train(&params)?;
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "\ndone: {} updates, {} env steps in {:.0}s ({:.0} steps/s)",
        outcome.updates,
        outcome.env_steps,
        dt,
        outcome.env_steps as f64 / dt
    );
    println!("best held-out SPL {:.3} at SR {:.3}", outcome.best_spl, outcome.best_sr);
    match outcome.reached_target_at {
        Some(at) => println!("reached 90% SR after {at} env steps"),
        None => println!("did not reach 90% SR within the budget (try more steps)"),
    }
    println!("checkpoints and train_log.csv under {}", outcome.best_checkpoint.parent().unwrap().display());

    println!("\nheld-out evaluation trace (env_steps, SR, SPL):");
    let log = std::fs::read_to_string(&outcome.log_path)?;
    for line in log.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() >= 13 && !cells[11].is_empty() {
            println!(
                "  {:>8}  SR {:>5.3}  SPL {:>5.3}",
                cells[1],
                cells[11].parse::<f64>().unwrap_or(0.0),
                cells[12].parse::<f64>().unwrap_or(0.0)
            );
        }
    }
    Ok(())
}
