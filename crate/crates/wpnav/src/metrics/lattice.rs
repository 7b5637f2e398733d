//! Deterministic minimal-time oracle: Dijkstra over (cell, heading-bin)
//! states with motion-model edge costs. Exact on its discretization and used
//! to validate the sampling-based planner.

use super::{MotionModel, OracleTime, PlannerKind};
use crate::error::Result;
use crate::geom::{wrap_angle, Point};
use crate::world::{raycast, OccupancyGrid, Pose};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const BINS: usize = 12;
const BIN_WIDTH: f64 = std::f64::consts::TAU / BINS as f64;
/// Longest straight move, matching the action space's distance ceiling.
pub const MAX_EDGE: f64 = 4.0;

fn nearest_bin(bearing: f64) -> usize {
    ((bearing / BIN_WIDTH).round() as i64).rem_euclid(BINS as i64) as usize
}

fn bin_angle(bin: usize) -> f64 {
    bin as f64 * BIN_WIDTH
}

#[derive(PartialEq)]
struct Entry {
    cost: f64,
    state: usize,
}

impl Eq for Entry {}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.state.cmp(&self.state))
    }
}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Free cells within `MAX_EDGE` straight-line visibility of `cell`, with their
/// center distance and bearing.
fn cell_neighbors(grid: &OccupancyGrid, cell: (usize, usize)) -> Vec<(usize, f64, f64)> {
    let origin = grid.cell_center(cell.0, cell.1);
    let radius = (MAX_EDGE / grid.resolution()).ceil() as i64;
    let mut out = Vec::new();
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            if dx == 0 && dy == 0 {
                continue;
            }
            let (nx, ny) = (cell.0 as i64 + dx, cell.1 as i64 + dy);
            if !grid.in_bounds(nx, ny) || grid.is_blocked(nx as usize, ny as usize) {
                continue;
            }
            let target = grid.cell_center(nx as usize, ny as usize);
            let d = origin.distance(&target);
            if d > MAX_EDGE + 1e-9 {
                continue;
            }
            let bearing = origin.bearing_to(&target);
            // Line of sight: the ray must reach the target center unobstructed.
            let ray = raycast(grid, &origin, bearing, d + 1e-6).unwrap_or(0.0);
            if ray >= d - 1e-9 {
                out.push((ny as usize * grid.width_cells() + nx as usize, d, bearing));
            }
        }
    }
    out
}

/// Minimal time from `start` to the goal position under point-turn dynamics:
/// states are (free cell, heading in 12 bins), moves go to line-of-sight cells
/// up to 4 m away, costed as rotate-to-bearing plus translate. The terminal
/// heading at the goal is free. Returns an infinite time for unreachable
/// goals.
pub fn minimal_time_lattice(
    grid: &OccupancyGrid,
    start: &Pose,
    goal: &Point,
    model: &MotionModel,
) -> Result<OracleTime> {
    start.validate(grid)?;
    let goal_cell = grid.require_free(goal)?;
    let start_cell = grid
        .cell_of(&start.position())
        .expect("validated pose lies in the grid");
    let done = |seconds: f64| OracleTime { seconds, planner: PlannerKind::LatticeDijkstra };
    if start_cell == goal_cell {
        return Ok(done(0.0));
    }

    let w = grid.width_cells();
    let n_states = w * grid.height_cells() * BINS;
    let mut dist = vec![f64::INFINITY; n_states];
    let mut heap: BinaryHeap<Entry> = BinaryHeap::new();
    let mut neighbor_cache: Vec<Option<Vec<(usize, f64, f64)>>> =
        vec![None; w * grid.height_cells()];

    // Seed with edges from the exact start heading.
    for (ncell, d, bearing) in cell_neighbors(grid, start_cell) {
        let rot = wrap_angle(bearing - start.heading).abs().to_degrees();
        let cost = model.rotate_time(rot)? + model.translate_time(d)?;
        let state = ncell * BINS + nearest_bin(bearing);
        if cost < dist[state] {
            dist[state] = cost;
            heap.push(Entry { cost, state });
        }
    }

    let goal_idx = goal_cell.1 * w + goal_cell.0;
    while let Some(Entry { cost, state }) = heap.pop() {
        if cost > dist[state] {
            continue;
        }
        let (cell_idx, bin) = (state / BINS, state % BINS);
        if cell_idx == goal_idx {
            return Ok(done(cost));
        }
        if neighbor_cache[cell_idx].is_none() {
            let cell = (cell_idx % w, cell_idx / w);
            neighbor_cache[cell_idx] = Some(cell_neighbors(grid, cell));
        }
        let heading = bin_angle(bin);
        for &(ncell, d, bearing) in neighbor_cache[cell_idx].as_ref().unwrap() {
            let rot = wrap_angle(bearing - heading).abs().to_degrees();
            let cost2 = cost + model.rotate_time(rot)? + model.translate_time(d)?;
            let state2 = ncell * BINS + nearest_bin(bearing);
            if cost2 < dist[state2] {
                dist[state2] = cost2;
                heap.push(Entry { cost: cost2, state: state2 });
            }
        }
    }
    Ok(done(f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn aligned_corridor_is_one_translate() {
        let grid = OccupancyGrid::empty_room(40, 12, 0.25).unwrap();
        let start_cell = (4usize, 6usize);
        let start_center = grid.cell_center(start_cell.0, start_cell.1);
        let start = Pose::new(start_center.x, start_center.y, 0.0);
        let goal = grid.cell_center(12, 6); // exactly 2.0 m ahead
        let t = minimal_time_lattice(&grid, &start, &goal, &MotionModel::default()).unwrap();
        assert_abs_diff_eq!(t.seconds, 8.762, epsilon = 1e-9);
    }

    #[test]
    fn same_cell_is_zero() {
        let grid = OccupancyGrid::empty_room(10, 10, 0.5).unwrap();
        let c = grid.cell_center(4, 4);
        let start = Pose::new(c.x + 0.1, c.y, 2.0);
        let t = minimal_time_lattice(&grid, &start, &c, &MotionModel::default()).unwrap();
        assert_eq!(t.seconds, 0.0);
    }

    #[test]
    fn off_axis_goal_pays_one_rotation() {
        let grid = OccupancyGrid::empty_room(40, 40, 0.25).unwrap();
        let start_center = grid.cell_center(20, 20);
        let start = Pose::new(start_center.x, start_center.y, 0.0);
        // Goal 1 m away at 90°: rotate + translate, two-command optimum.
        let goal = grid.cell_center(20, 24);
        let t = minimal_time_lattice(&grid, &start, &goal, &MotionModel::default()).unwrap();
        assert_abs_diff_eq!(t.seconds, 14.8498 + 4.562, epsilon = 1e-6);
    }

    #[test]
    fn unreachable_goal_is_infinite() {
        // Two pockets split by a wall.
        let w = 9;
        let mut cells = vec![true; w * w];
        for y in 1..8 {
            for x in [1usize, 2, 6, 7] {
                cells[y * w + x] = false;
            }
        }
        let grid = OccupancyGrid::new(w, w, 0.5, cells).unwrap();
        let a = grid.cell_center(1, 4);
        let start = Pose::new(a.x, a.y, 0.0);
        let goal = grid.cell_center(6, 4);
        let t = minimal_time_lattice(&grid, &start, &goal, &MotionModel::default()).unwrap();
        assert!(t.seconds.is_infinite());
    }
}
