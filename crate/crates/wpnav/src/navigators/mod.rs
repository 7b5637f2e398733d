//! Low-level waypoint execution: a continuous turn-then-translate navigator
//! and a discrete 15°/0.25 m greedy navigator, both emitting command streams
//! for timing analysis.

mod continuous;
mod discrete;
mod log;

pub use continuous::continuous_navigate;
pub use discrete::{discrete_navigate, DN_ALIGN_TOLERANCE, DN_FORWARD_STEP, DN_STEP_CAP, DN_TURN};
pub use log::{parse_command_log, write_command_log};

use crate::geom::{polyline_length, wrap_angle, Point};
use crate::world::Pose;
use serde::{Deserialize, Serialize};

/// One robot command. Rotations are signed angles in (−π, π]; translations are
/// nonnegative distances in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Command {
    Rotate(f64),
    Translate(f64),
    Stop,
}

/// Result of executing one waypoint.
#[derive(Debug, Clone, PartialEq)]
pub struct NavigationOutcome {
    pub final_pose: Pose,
    pub commands: Vec<Command>,
    /// Polyline actually traversed; its length equals the sum of executed
    /// translate distances.
    pub path: Vec<Point>,
    pub collided: bool,
    /// Distance from the final position to the target waypoint.
    pub residual: f64,
    /// Set when the discrete navigator hit its step cap before settling.
    pub incomplete: bool,
}

impl NavigationOutcome {
    pub fn path_length(&self) -> f64 {
        polyline_length(&self.path)
    }
}

/// Merge adjacent rotations (sum wrapped to (−π, π]), drop zero-magnitude
/// commands. Translations are never merged, and never across a rotation.
pub fn collapse_commands(commands: &[Command]) -> Vec<Command> {
    const ZERO: f64 = 1e-12;
    let mut out: Vec<Command> = Vec::with_capacity(commands.len());
    for &cmd in commands {
        match cmd {
            Command::Rotate(a) => {
                if let Some(Command::Rotate(prev)) = out.last_mut() {
                    *prev = wrap_angle(*prev + a);
                    if prev.abs() < ZERO {
                        out.pop();
                    }
                } else if a.abs() >= ZERO {
                    out.push(Command::Rotate(wrap_angle(a)));
                }
            }
            Command::Translate(d) => {
                if d.abs() >= ZERO {
                    out.push(cmd);
                }
            }
            Command::Stop => out.push(cmd),
        }
    }
    out
}

/// Replay a command stream kinematically from a pose. Commands carry executed
/// magnitudes, so no world is needed.
pub fn replay_commands(start: &Pose, commands: &[Command]) -> Pose {
    let mut pose = *start;
    for &cmd in commands {
        match cmd {
            Command::Rotate(a) => pose = Pose::new(pose.x, pose.y, pose.heading + a),
            Command::Translate(d) => {
                pose = Pose::new(
                    pose.x + d * pose.heading.cos(),
                    pose.y + d * pose.heading.sin(),
                    pose.heading,
                );
            }
            Command::Stop => {}
        }
    }
    pose
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::OccupancyGrid;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn collapse_merges_turn_runs() {
        let left = 15f64.to_radians();
        let cmds = [Command::Rotate(left), Command::Rotate(left), Command::Translate(0.25)];
        let collapsed = collapse_commands(&cmds);
        assert_eq!(collapsed.len(), 2);
        match collapsed[0] {
            Command::Rotate(a) => assert_abs_diff_eq!(a, 30f64.to_radians(), epsilon = 1e-12),
            _ => panic!("expected rotate"),
        }
        assert_eq!(collapsed[1], Command::Translate(0.25));
    }

    #[test]
    fn collapse_cancels_opposite_turns() {
        let cmds = [Command::Rotate(10f64.to_radians()), Command::Rotate(-10f64.to_radians())];
        assert!(collapse_commands(&cmds).is_empty());
    }

    #[test]
    fn collapse_never_merges_translates() {
        let cmds = [Command::Translate(0.25), Command::Translate(0.25)];
        assert_eq!(collapse_commands(&cmds), cmds.to_vec());
    }

    #[test]
    fn collapse_wraps_merged_angle() {
        let cmds = [Command::Rotate(170f64.to_radians()), Command::Rotate(20f64.to_radians())];
        let collapsed = collapse_commands(&cmds);
        match collapsed[0] {
            Command::Rotate(a) => assert_abs_diff_eq!(a, -170f64.to_radians(), epsilon = 1e-9),
            _ => panic!("expected rotate"),
        }
    }

    #[test]
    fn replay_reproduces_navigator_outcomes() {
        let grid = OccupancyGrid::empty_room(40, 40, 0.25).unwrap();
        let pose = Pose::new(5.0, 5.0, 0.4);
        for (r, theta) in [(1.0, 0.0), (2.5, 1.2), (0.25, -2.8), (4.0, 3.14)] {
            let cn = continuous_navigate(&grid, &pose, r, theta).unwrap();
            let replayed = replay_commands(&pose, &cn.commands);
            assert_abs_diff_eq!(replayed.x, cn.final_pose.x, epsilon = 1e-9);
            assert_abs_diff_eq!(replayed.y, cn.final_pose.y, epsilon = 1e-9);
            let dn = discrete_navigate(&grid, &pose, r, theta).unwrap();
            let replayed = replay_commands(&pose, &dn.commands);
            assert_abs_diff_eq!(replayed.x, dn.final_pose.x, epsilon = 1e-9);
            assert_abs_diff_eq!(replayed.y, dn.final_pose.y, epsilon = 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn path_length_matches_translates(
            r in 0.25f64..4.0,
            theta in -3.1f64..3.1,
            x in 4.0f64..6.0,
            y in 4.0f64..6.0,
        ) {
            let grid = OccupancyGrid::empty_room(40, 40, 0.25).unwrap();
            let pose = Pose::new(x, y, 0.0);
            for outcome in [
                continuous_navigate(&grid, &pose, r, theta).unwrap(),
                discrete_navigate(&grid, &pose, r, theta).unwrap(),
            ] {
                let translated: f64 = outcome
                    .commands
                    .iter()
                    .map(|c| match c {
                        Command::Translate(d) => *d,
                        _ => 0.0,
                    })
                    .sum();
                prop_assert!((outcome.path_length() - translated).abs() < 1e-9);
            }
        }
    }
}
