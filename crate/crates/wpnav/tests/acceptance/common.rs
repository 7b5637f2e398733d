//! Shared fixtures for the integration and acceptance suites.

use std::sync::Arc;
use wpnav::geom::{polyline_length, Point};
use wpnav::policy::PolicyConfig;
use wpnav::trainer::{collect_rollouts, derive_env_seed, EnvConfig, EnvRunner, NavigatorKind,
    PPOConfig, RolloutBuffer, VlnEnv};
use wpnav::policy::{Policy, PolicyState};
use wpnav::world::{generate_world, shortest_path, Episode, EpisodeParams, OccupancyGrid, Pose,
    ScanConfig, WorldParams, WorldStyle};

/// Hand-built straight-line episode between two free points.
pub fn toy_episode(
    grid: &OccupancyGrid,
    start: Point,
    goal: Point,
    success_distance: f64,
) -> Arc<Episode> {
    let path = shortest_path(grid, &start, &goal).unwrap().unwrap();
    let len = polyline_length(&path);
    let heading = if path.len() > 1 { path[0].bearing_to(&path[1]) } else { 0.0 };
    Arc::new(Episode {
        id: format!("toy-{:.2}-{:.2}", start.x, goal.x),
        start: Pose::new(path[0].x, path[0].y, heading),
        goal: *path.last().unwrap(),
        shortest_path: path,
        geodesic_length: len,
        instruction: vec![0, 1, 7, 8],
        success_distance,
        marker: Vec::new(),
    })
}

/// Desk-scale curriculum used by the training criteria: empty-to-sparse 10 m
/// worlds with a visible goal pillar and short episodes.
pub fn curriculum_world_params(sparse: bool) -> WorldParams {
    WorldParams {
        width_cells: 56,
        height_cells: 56,
        resolution: 0.25,
        style: if sparse {
            WorldStyle::Scatter { obstacles: 2, obstacle_min: 2, obstacle_max: 3 }
        } else {
            WorldStyle::Empty
        },
    }
}

pub fn curriculum_episode_params() -> EpisodeParams {
    EpisodeParams {
        min_geodesic: 1.5,
        max_geodesic: 4.0,
        success_distance: 0.5,
        goal_marker: true,
        marker_size: 3,
        goal_clearance: 1.5,
        max_attempts: 400,
    }
}

/// A small rollout fixture shared by the gradient-check criteria.
pub fn small_rollout(
    expressivity: wpnav::actionspace::ExpressivityConfig,
    n_envs: usize,
    rollout_length: usize,
    run_seed: u64,
) -> (Policy, RolloutBuffer, PPOConfig) {
    use rand::SeedableRng;
    let ppo = PPOConfig { n_envs, rollout_length, ..PPOConfig::desk() };
    let policy_cfg = PolicyConfig { expressivity, ..PolicyConfig::default() };
    let policy = Policy::new(&policy_cfg, run_seed);
    let worlds: Vec<Arc<OccupancyGrid>> = (0..2)
        .map(|s| Arc::new(generate_world(s, &curriculum_world_params(false)).unwrap()))
        .collect();
    let env_cfg = Arc::new(EnvConfig {
        worlds,
        episode_params: curriculum_episode_params(),
        navigator: NavigatorKind::Continuous,
        scan: ScanConfig::default(),
    });
    let mut runners: Vec<EnvRunner> = (0..ppo.n_envs)
        .map(|i| EnvRunner {
            env: VlnEnv::new(env_cfg.clone(), i, ppo.n_envs, run_seed).unwrap(),
            state: PolicyState::initial(&policy.cfg),
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(derive_env_seed(run_seed ^ 0xABCD, i)),
        })
        .collect();
    let buffer = collect_rollouts(&mut runners, &policy, &ppo).unwrap();
    (policy, buffer, ppo)
}
