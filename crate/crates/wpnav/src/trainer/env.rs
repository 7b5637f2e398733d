//! The waypoint-level navigation environment: one policy decision executes a
//! full navigator run (or stops), with shaped rewards from a goal distance
//! field.

use super::{step_reward, PPOConfig};
use crate::actionspace::{compose_waypoint, WaypointAction};
use crate::error::{Error, Result};
use crate::navigators::{continuous_navigate, discrete_navigate, NavigationOutcome};
use crate::world::{
    generate_episode, panorama_scan, DistanceField, Episode, EpisodeParams, OccupancyGrid, Pose,
    RangeScan, ScanConfig,
};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum NavigatorKind {
    #[default]
    #[serde(rename = "cn")]
    Continuous,
    #[serde(rename = "dn")]
    Discrete,
}

impl NavigatorKind {
    pub fn code(&self) -> &'static str {
        match self {
            NavigatorKind::Continuous => "cn",
            NavigatorKind::Discrete => "dn",
        }
    }

    pub fn from_code(code: &str) -> Result<Self> {
        match code {
            "cn" => Ok(NavigatorKind::Continuous),
            "dn" => Ok(NavigatorKind::Discrete),
            _ => Err(Error::InvalidArgument(format!("unknown navigator {code:?}"))),
        }
    }

    pub fn navigate(
        &self,
        grid: &OccupancyGrid,
        pose: &Pose,
        r: f64,
        theta: f64,
    ) -> Result<NavigationOutcome> {
        match self {
            NavigatorKind::Continuous => continuous_navigate(grid, pose, r, theta),
            NavigatorKind::Discrete => discrete_navigate(grid, pose, r, theta),
        }
    }
}

/// Shared environment configuration: the world pool plus episode machinery.
#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub worlds: Vec<Arc<OccupancyGrid>>,
    pub episode_params: EpisodeParams,
    pub navigator: NavigatorKind,
    pub scan: ScanConfig,
}

/// What the policy sees each step.
#[derive(Debug, Clone)]
pub struct Observation {
    pub scan: RangeScan,
    pub tokens: Arc<Vec<u16>>,
}

#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub reward: f64,
    pub done: bool,
    pub success: bool,
    pub collided: bool,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-env seed derived deterministically from the run seed and env index.
pub fn derive_env_seed(run_seed: u64, env_index: usize) -> u64 {
    splitmix64(run_seed ^ splitmix64(env_index as u64 + 1))
}

/// One environment instance. Episodes are drawn deterministically from the
/// env seed: reset `k` uses world `(env_index + k·n_envs) mod n_worlds` and an
/// episode seed derived from `(env_seed, k)`.
pub struct VlnEnv {
    cfg: Arc<EnvConfig>,
    env_index: usize,
    n_envs: usize,
    env_seed: u64,
    resets: u64,
    // Current episode.
    grid: Arc<OccupancyGrid>,
    episode: Arc<Episode>,
    goal_field: DistanceField,
    pose: Pose,
    steps: usize,
    last_geo: f64,
}

impl VlnEnv {
    pub fn new(cfg: Arc<EnvConfig>, env_index: usize, n_envs: usize, run_seed: u64) -> Result<Self> {
        if cfg.worlds.is_empty() {
            return Err(Error::Config("environment needs at least one world".into()));
        }
        let mut env = VlnEnv {
            env_seed: derive_env_seed(run_seed, env_index),
            cfg,
            env_index,
            n_envs,
            resets: 0,
            grid: Arc::new(OccupancyGrid::empty_room(5, 5, 1.0).expect("placeholder grid")),
            episode: Arc::new(placeholder_episode()),
            goal_field: DistanceField::from_cell(
                &OccupancyGrid::empty_room(5, 5, 1.0).expect("placeholder grid"),
                (2, 2),
            ),
            pose: Pose::new(0.0, 0.0, 0.0),
            steps: 0,
            last_geo: 0.0,
        };
        env.reset()?;
        Ok(env)
    }

    pub fn episode(&self) -> &Arc<Episode> {
        &self.episode
    }

    pub fn grid(&self) -> &Arc<OccupancyGrid> {
        &self.grid
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn reset(&mut self) -> Result<()> {
        // A handful of derived seeds guards against rare sampling failures.
        for attempt in 0..50u64 {
            let world_idx =
                (self.env_index as u64 + self.resets * self.n_envs as u64) as usize % self.cfg.worlds.len();
            let base = &self.cfg.worlds[world_idx];
            let ep_seed = splitmix64(self.env_seed ^ splitmix64(self.resets + attempt * 0x1000));
            self.resets += 1;
            match generate_episode(base, ep_seed, &self.cfg.episode_params) {
                Ok(ep) => {
                    let marked = Arc::new(ep.apply_marker(base)?);
                    let goal_field = DistanceField::from_point(&marked, &ep.goal)?;
                    self.pose = ep.start;
                    self.last_geo = goal_field.at_point(&marked, &ep.start.position());
                    self.grid = marked;
                    self.episode = Arc::new(ep);
                    self.goal_field = goal_field;
                    self.steps = 0;
                    return Ok(());
                }
                Err(_) => continue,
            }
        }
        Err(Error::Sampling(format!("env {} could not sample an episode", self.env_index)))
    }

    pub fn observe(&self) -> Result<Observation> {
        Ok(Observation {
            scan: panorama_scan(&self.grid, &self.pose, &self.cfg.scan)?,
            tokens: Arc::new(self.episode.instruction.clone()),
        })
    }

    /// Geodesic distance from the current pose to the goal.
    pub fn distance_to_goal(&self) -> f64 {
        self.last_geo
    }

    pub fn step(&mut self, action: &WaypointAction, ppo: &PPOConfig) -> Result<StepOutcome> {
        match action {
            WaypointAction::Stop => {
                let success = self.last_geo <= ppo.success_distance;
                let reward =
                    step_reward(self.last_geo, self.last_geo, action, true, success, ppo);
                Ok(StepOutcome { reward, done: true, success, collided: false })
            }
            WaypointAction::Move { .. } => {
                let (r, theta) = compose_waypoint(action)?;
                let outcome = self.cfg.navigator.navigate(&self.grid, &self.pose, r, theta)?;
                let new_geo = self.goal_field.at_point(&self.grid, &outcome.final_pose.position());
                let reward = step_reward(self.last_geo, new_geo, action, false, false, ppo);
                self.pose = outcome.final_pose;
                self.last_geo = new_geo;
                self.steps += 1;
                // Timeout at the step cap counts as done without success.
                let done = self.steps >= ppo.episode_step_cap;
                Ok(StepOutcome { reward, done, success: false, collided: outcome.collided })
            }
        }
    }
}

fn placeholder_episode() -> Episode {
    Episode {
        id: "placeholder".into(),
        start: Pose::new(2.5, 2.5, 0.0),
        goal: crate::geom::Point::new(2.5, 2.5),
        shortest_path: vec![crate::geom::Point::new(2.5, 2.5)],
        geodesic_length: 0.0,
        instruction: vec![0],
        success_distance: 0.5,
        marker: Vec::new(),
    }
}
