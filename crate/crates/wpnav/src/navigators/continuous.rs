//! Continuous navigator: turn to the waypoint bearing, then move straight.

use super::{Command, NavigationOutcome};
use crate::error::Result;
use crate::geom::wrap_angle;
use crate::world::{raycast, OccupancyGrid, Pose};

/// Rotations smaller than this are not issued.
const NULL_ROTATION: f64 = 1e-6;
/// Pull-back from an obstacle face so the final pose stays in free space.
const CONTACT_EPS: f64 = 1e-9;

/// Execute a relative polar waypoint `(r, theta)` with perfect actuation:
/// one rotation to the bearing (skipped when negligible), one translation of
/// `r` truncated at the first obstacle contact.
pub fn continuous_navigate(
    grid: &OccupancyGrid,
    pose: &Pose,
    r: f64,
    theta: f64,
) -> Result<NavigationOutcome> {
    pose.validate(grid)?;
    let turn = wrap_angle(theta);
    let mut commands = Vec::with_capacity(2);
    let mut heading = pose.heading;
    if turn.abs() >= NULL_ROTATION {
        commands.push(Command::Rotate(turn));
        heading = crate::geom::normalize_angle(heading + turn);
    }

    let origin = pose.position();
    let free = raycast(grid, &origin, heading, r + 1.0)?;
    let collided = free < r;
    let executed = if collided { (free - CONTACT_EPS).max(0.0) } else { r };
    commands.push(Command::Translate(executed));

    let final_pos = origin.offset(executed, heading);
    let target = origin.offset(r, heading);
    let path = vec![origin, final_pos];
    Ok(NavigationOutcome {
        final_pose: Pose::new(final_pos.x, final_pos.y, heading),
        commands,
        path,
        collided,
        residual: final_pos.distance(&target),
        incomplete: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn room() -> OccupancyGrid {
        OccupancyGrid::empty_room(44, 44, 0.25).unwrap()
    }

    #[test]
    fn aligned_waypoint_is_a_single_translate() {
        let grid = room();
        let pose = Pose::new(5.0, 5.0, 0.0);
        let out = continuous_navigate(&grid, &pose, 1.0, 0.0).unwrap();
        assert_eq!(out.commands, vec![Command::Translate(1.0)]);
        assert!(out.residual < 1e-6);
        assert!(!out.collided);
        assert_abs_diff_eq!(out.final_pose.x, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn quarter_turn_then_translate() {
        let grid = room();
        let pose = Pose::new(5.0, 5.0, 0.0);
        let out = continuous_navigate(&grid, &pose, 1.0, FRAC_PI_2).unwrap();
        assert_eq!(out.commands.len(), 2);
        match out.commands[0] {
            Command::Rotate(a) => assert_abs_diff_eq!(a, FRAC_PI_2, epsilon = 1e-12),
            _ => panic!("expected rotate first"),
        }
        assert_abs_diff_eq!(out.final_pose.heading, FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(out.final_pose.y, 6.0, epsilon = 1e-9);
        assert!(out.residual < 1e-6);
    }

    #[test]
    fn translation_truncates_at_wall_contact() {
        let grid = room();
        // Wall face at x = 10.75 m; stand 0.5 m away from it.
        let pose = Pose::new(10.25, 5.0, 0.0);
        let expected_contact = raycast(&grid, &pose.position(), 0.0, 10.0).unwrap();
        assert_abs_diff_eq!(expected_contact, 0.5, epsilon = 1e-9);
        let out = continuous_navigate(&grid, &pose, 1.0, 0.0).unwrap();
        assert!(out.collided);
        match out.commands[0] {
            Command::Translate(d) => assert_abs_diff_eq!(d, 0.5, epsilon = 1e-6),
            _ => panic!("expected translate"),
        }
        assert_abs_diff_eq!(out.residual, 0.5, epsilon = 1e-6);
        assert!(grid.is_free_point(&out.final_pose.position()));
    }

    #[test]
    fn free_space_extremes_stay_exact() {
        let grid = room();
        let pose = Pose::new(5.5, 5.5, 1.1);
        for theta in [0.0, 0.7, -2.0, 3.1] {
            let out = continuous_navigate(&grid, &pose, 4.0, theta).unwrap();
            assert!(out.commands.len() <= 2);
            assert!(out.residual < 1e-6);
        }
    }
}
