//! PPO hyperparameters. Defaults reproduce the shared experiment table.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PPOConfig {
    pub n_envs: usize,
    pub rollout_length: usize,
    pub ppo_epochs: usize,
    pub minibatches: usize,
    pub learning_rate: f64,
    pub adam_epsilon: f64,
    pub clip: f64,
    pub value_clip: bool,
    pub gamma: f64,
    pub tau: f64,
    /// Value loss coefficient.
    pub c_v: f64,
    /// Offset regularization coefficient.
    pub c_r: f64,
    /// Entropy coefficient.
    pub c_e: f64,
    /// Pano entropy coefficient.
    pub c_p: f64,
    /// Offset entropy coefficient.
    pub c_o: f64,
    /// Distance entropy coefficient.
    pub c_d: f64,
    pub max_grad_norm: f64,
    pub r_success: f64,
    pub success_distance: f64,
    pub slack_scalar: f64,
    /// Waypoint decisions per episode before timeout.
    pub episode_step_cap: usize,
}

impl Default for PPOConfig {
    fn default() -> Self {
        PPOConfig {
            n_envs: 4,
            rollout_length: 16,
            ppo_epochs: 2,
            minibatches: 4,
            learning_rate: 2.0e-4,
            adam_epsilon: 1.0e-5,
            clip: 0.2,
            value_clip: true,
            gamma: 0.99,
            tau: 0.95,
            c_v: 0.5,
            c_r: 0.1146,
            c_e: 0.1,
            c_p: 1.5,
            c_o: 1.0,
            c_d: 1.0,
            max_grad_norm: 0.2,
            r_success: 2.5,
            success_distance: 3.0,
            slack_scalar: -0.05,
            episode_step_cap: 20,
        }
    }
}

impl PPOConfig {
    /// Desk-scale preset: the table defaults with the success distance shrunk
    /// to fit generated worlds (a 3 m radius would swallow them).
    pub fn desk() -> Self {
        PPOConfig { success_distance: 0.5, ..PPOConfig::default() }
    }
}
