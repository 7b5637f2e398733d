//! Shaped step reward: success bonus, geodesic progress, distance-scaled
//! slack.

use super::PPOConfig;
use crate::actionspace::WaypointAction;

/// Reward for one waypoint decision.
///
/// The success bonus applies only when a STOP lands within the success
/// distance. Progress is the geodesic decrease `prev - new`. Slack scales
/// with the predicted waypoint distance (`slack_scalar · d/0.25`), penalizing
/// unreachable waypoints; STOP carries no slack because it predicts no
/// distance.
pub fn step_reward(
    prev_geo: f64,
    new_geo: f64,
    action: &WaypointAction,
    stopped: bool,
    at_goal: bool,
    cfg: &PPOConfig,
) -> f64 {
    let mut r = 0.0;
    if stopped && at_goal {
        r += cfg.r_success;
    }
    r += prev_geo - new_geo;
    if let WaypointAction::Move { distance, .. } = action {
        r += cfg.slack_scalar * distance / 0.25;
    }
    r
}
