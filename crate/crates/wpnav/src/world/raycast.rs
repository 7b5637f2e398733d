//! Grid ray casting: the sensor primitive behind the panoramic range scan.

use super::OccupancyGrid;
use crate::error::{Error, Result};
use crate::geom::Point;

/// Distance along the ray from `origin` at `angle` to the first blocked cell
/// boundary, clipped to `max_range`. Deterministic DDA traversal.
///
/// Errors when the origin lies in a blocked cell.
pub fn raycast(grid: &OccupancyGrid, origin: &Point, angle: f64, max_range: f64) -> Result<f64> {
    let (mut cx, mut cy) = match grid.cell_of(origin) {
        Some(c) if !grid.is_blocked(c.0, c.1) => (c.0 as i64, c.1 as i64),
        _ => return Err(Error::InvalidPose { x: origin.x, y: origin.y }),
    };

    let res = grid.resolution();
    let (dx, dy) = (angle.cos(), angle.sin());
    let step_x: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_y: i64 = if dy > 0.0 { 1 } else { -1 };

    // Ray parameter t at which the next vertical / horizontal grid line is hit.
    let next_x = if dx > 0.0 { (cx + 1) as f64 * res } else { cx as f64 * res };
    let next_y = if dy > 0.0 { (cy + 1) as f64 * res } else { cy as f64 * res };
    let mut t_max_x = if dx == 0.0 { f64::INFINITY } else { (next_x - origin.x) / dx };
    let mut t_max_y = if dy == 0.0 { f64::INFINITY } else { (next_y - origin.y) / dy };
    let t_delta_x = if dx == 0.0 { f64::INFINITY } else { res / dx.abs() };
    let t_delta_y = if dy == 0.0 { f64::INFINITY } else { res / dy.abs() };

    let blocked_at = |x: i64, y: i64| -> bool {
        // Outside the grid counts as blocked; boundary cells are blocked anyway.
        !grid.in_bounds(x, y) || grid.is_blocked(x as usize, y as usize)
    };

    loop {
        let t = t_max_x.min(t_max_y);
        if t >= max_range {
            return Ok(max_range);
        }
        if (t_max_x - t_max_y).abs() < 1e-12 {
            // Exact corner crossing: treat either diagonal neighbor as a hit so
            // rays cannot slip between two diagonally adjacent blocked cells.
            if blocked_at(cx + step_x, cy) || blocked_at(cx, cy + step_y) {
                return Ok(t);
            }
            cx += step_x;
            cy += step_y;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        } else if t_max_x < t_max_y {
            cx += step_x;
            t_max_x += t_delta_x;
        } else {
            cy += step_y;
            t_max_y += t_delta_y;
        }
        if blocked_at(cx, cy) {
            return Ok(t);
        }
    }
}
