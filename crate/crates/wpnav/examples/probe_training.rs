// Scratch probe for learning dynamics (will be replaced by real examples).
use std::path::PathBuf;
use wpnav::actionspace::ExpressivityConfig;
use wpnav::policy::PolicyConfig;
use wpnav::trainer::{train, NavigatorKind, PPOConfig, TrainParams};
use wpnav::world::{EpisodeParams, WorldParams, WorldStyle};

fn main() {
    let steps: u64 = std::env::var("STEPS").ok().and_then(|s| s.parse().ok()).unwrap_or(60_000);
    let style = std::env::var("STYLE").unwrap_or_else(|_| "empty".into());
    let world_style = match style.as_str() {
        "scatter" => WorldStyle::Scatter { obstacles: 2, obstacle_min: 2, obstacle_max: 3 },
        _ => WorldStyle::Empty,
    };
    let t0 = std::time::Instant::now();
    let params = TrainParams {
        ppo: PPOConfig { n_envs: 16, ..PPOConfig::desk() },
        policy: PolicyConfig { expressivity: ExpressivityConfig::wpn(), max_range: 6.0, ..PolicyConfig::default() },
        world_params: WorldParams { width_cells: 56, height_cells: 56, resolution: 0.25, style: world_style },
        episode_params: EpisodeParams { min_geodesic: 1.5, max_geodesic: 4.0, success_distance: 0.5, goal_marker: true, marker_size: 3, goal_clearance: 1.5, max_attempts: 400 },
        navigator: NavigatorKind::Continuous,
        train_world_seeds: (0..8).collect(),
        val_world_seeds: (100..104).collect(),
        run_seed: 1,
        total_env_steps: steps,
        eval_every_steps: 4096,
        eval_episodes: 60,
        target_sr: Some(0.9),
        out_dir: PathBuf::from("/tmp/probe"),
        digest: "probe".into(),
    };
    let outcome = train(&params).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!("steps {} in {:.1}s ({:.0} steps/s), best SPL {:.3} SR {:.3}, target at {:?}",
        outcome.env_steps, dt, outcome.env_steps as f64 / dt, outcome.best_spl, outcome.best_sr, outcome.reached_target_at);
    let log = std::fs::read_to_string(&outcome.log_path).unwrap();
    for line in log.lines().filter(|l| l.split(',').nth(11).map(|c| !c.is_empty()).unwrap_or(false)) {
        let c: Vec<&str> = line.split(',').collect();
        println!("steps {:>7}  sr {:>6}  spl {:>6}  pred_dist {:.3}  s_pano {:.3}", c[1], c[11], c[12], c[10].parse::<f64>().unwrap_or(0.0), c[4].parse::<f64>().unwrap_or(0.0));
    }
}
