//! Discrete navigator: forward 0.25 m / left 15° / right 15°, chosen greedily
//! against a dead-reckoned estimate of the distance to the waypoint.
//!
//! The navigator assumes free space and keeps no localization: its decision
//! sequence comes entirely from an internal pose that integrates the commands
//! it issues. Obstacle contact truncates real motion but never changes the
//! decision sequence.

use super::{Command, NavigationOutcome};
use crate::error::Result;
use crate::geom::{wrap_angle, Point};
use crate::world::{raycast, OccupancyGrid, Pose};

/// Forward step length in meters.
pub const DN_FORWARD_STEP: f64 = 0.25;
/// Turn quantum (15°).
pub const DN_TURN: f64 = 15.0 * std::f64::consts::PI / 180.0;
/// Bearing error tolerated before re-aligning (half a turn quantum).
pub const DN_ALIGN_TOLERANCE: f64 = 7.5 * std::f64::consts::PI / 180.0;
/// Command budget per waypoint.
pub const DN_STEP_CAP: usize = 64;

const CONTACT_EPS: f64 = 1e-9;

pub fn discrete_navigate(
    grid: &OccupancyGrid,
    pose: &Pose,
    r: f64,
    theta: f64,
) -> Result<NavigationOutcome> {
    pose.validate(grid)?;
    let start = pose.position();
    let bearing = pose.heading + theta;
    let target = start.offset(r, bearing);

    // Dead-reckoned pose drives decisions; the world pose tracks reality.
    let mut internal = Point::new(start.x, start.y);
    let mut heading = pose.heading;
    let mut world = start;
    let mut path = vec![start];
    let mut commands = Vec::new();
    let mut collided = false;
    let mut incomplete = false;

    loop {
        if commands.len() >= DN_STEP_CAP {
            incomplete = true;
            break;
        }
        let dist = internal.distance(&target);
        if dist < 1e-12 {
            break;
        }
        let desired = internal.bearing_to(&target);
        let err = wrap_angle(desired - heading);
        if err.abs() > DN_ALIGN_TOLERANCE + 1e-12 {
            // Turn toward the smaller total rotation; an exact 180° tie turns
            // left. wrap_angle maps π to +π, so the sign already encodes that.
            let step = if err > 0.0 { DN_TURN } else { -DN_TURN };
            commands.push(Command::Rotate(step));
            heading = crate::geom::normalize_angle(heading + step);
            continue;
        }
        // Aligned: take a forward step only if it strictly reduces the
        // dead-reckoned distance.
        let ahead = internal.offset(DN_FORWARD_STEP, heading);
        if ahead.distance(&target) < dist - 1e-12 {
            let free = raycast(grid, &world, heading, DN_FORWARD_STEP + 1.0)?;
            let executed = if free < DN_FORWARD_STEP {
                collided = true;
                (free - CONTACT_EPS).max(0.0)
            } else {
                DN_FORWARD_STEP
            };
            commands.push(Command::Translate(executed));
            world = world.offset(executed, heading);
            path.push(world);
            internal = ahead;
        } else {
            break;
        }
    }

    Ok(NavigationOutcome {
        final_pose: Pose::new(world.x, world.y, heading),
        commands,
        path,
        collided,
        residual: world.distance(&target),
        incomplete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn room() -> OccupancyGrid {
        OccupancyGrid::empty_room(60, 60, 0.25).unwrap()
    }

    #[test]
    fn single_forward_step() {
        let grid = room();
        let pose = Pose::new(5.0, 5.0, 0.0);
        let out = discrete_navigate(&grid, &pose, 0.25, 0.0).unwrap();
        assert_eq!(out.commands, vec![Command::Translate(0.25)]);
        assert!(out.residual < 1e-9);
    }

    #[test]
    fn thirty_degrees_left_takes_two_turns_two_steps() {
        let grid = room();
        let pose = Pose::new(5.0, 5.0, 0.0);
        let out = discrete_navigate(&grid, &pose, 0.5, 30f64.to_radians()).unwrap();
        let expected = vec![
            Command::Rotate(DN_TURN),
            Command::Rotate(DN_TURN),
            Command::Translate(0.25),
            Command::Translate(0.25),
        ];
        assert_eq!(out.commands, expected);
        assert!(out.residual < 1e-9);
    }

    #[test]
    fn reversing_turns_left_twelve_times() {
        let grid = room();
        let pose = Pose::new(7.0, 7.0, 0.0);
        let out = discrete_navigate(&grid, &pose, 1.0, std::f64::consts::PI).unwrap();
        assert_eq!(out.commands.len(), 16);
        for cmd in &out.commands[..12] {
            match cmd {
                Command::Rotate(a) => assert!(*a > 0.0, "tie must turn left"),
                _ => panic!("expected turns first"),
            }
        }
        for cmd in &out.commands[12..] {
            assert_eq!(*cmd, Command::Translate(0.25));
        }
        assert!(out.residual < 1e-9);
    }

    #[test]
    fn straight_run_command_count() {
        let grid = room();
        let pose = Pose::new(3.0, 7.0, 0.0);
        for steps in 1..=16usize {
            let r = steps as f64 * 0.25;
            let out = discrete_navigate(&grid, &pose, r, 0.0).unwrap();
            assert_eq!(out.commands.len(), steps, "r = {r}");
        }
    }

    #[test]
    fn obstacle_contact_keeps_decision_sequence() {
        // A wall 0.6 m ahead truncates motion but not the dead-reckoned plan.
        let grid = room();
        let open_pose = Pose::new(5.0, 5.0, 0.0);
        let open = discrete_navigate(&grid, &open_pose, 1.0, 0.0).unwrap();
        let near_wall = Pose::new(14.15, 5.0, 0.0); // wall face at 14.75
        let blocked = discrete_navigate(&grid, &near_wall, 1.0, 0.0).unwrap();
        assert_eq!(open.commands.len(), blocked.commands.len());
        assert!(blocked.collided);
        let translated: f64 = blocked
            .commands
            .iter()
            .map(|c| if let Command::Translate(d) = c { *d } else { 0.0 })
            .sum();
        assert_abs_diff_eq!(translated, 0.6, epsilon = 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        /// Free-space residual stays within one step of granularity.
        #[test]
        fn free_space_residual_bounded(
            r in 0.25f64..4.0,
            theta in -std::f64::consts::PI..std::f64::consts::PI,
        ) {
            let grid = room();
            let pose = Pose::new(7.5, 7.5, 0.0);
            let out = discrete_navigate(&grid, &pose, r, theta).unwrap();
            prop_assert!(!out.incomplete);
            prop_assert!(out.residual <= 0.25 + 1e-9, "residual {}", out.residual);
        }
    }
}
