//! Sampling-based minimal-time planner: an RRT* over (position, heading)
//! states with motion-model edge costs.
//!
//! Adaptations from the plain geometric RRT*: edge cost is rotate-to-bearing
//! time plus translate time from the point-turn motion model, new samples
//! connect to nodes within 4 m of straight-line visibility, nearest-node
//! selection uses geodesic distance, and reaching the goal position ends the
//! plan (the terminal rotation is free).

use super::{MotionModel, OracleTime, PlannerKind};
use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Point};
use crate::world::{raycast, DistanceField, OccupancyGrid, Pose};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrtParams {
    pub iterations: usize,
    /// Probability of sampling the goal point itself.
    pub goal_bias: f64,
    /// Longest edge and connection radius, matching the action space ceiling.
    pub max_edge: f64,
}

impl Default for RrtParams {
    fn default() -> Self {
        RrtParams { iterations: 3000, goal_bias: 0.1, max_edge: 4.0 }
    }
}

struct Node {
    pos: Point,
    /// Heading on arrival: the bearing of the edge from the parent.
    heading: f64,
    parent: usize,
    edge_len: f64,
    edge_cost: f64,
    cost: f64,
    children: Vec<usize>,
}

fn line_of_sight(grid: &OccupancyGrid, a: &Point, b: &Point) -> Result<bool> {
    let d = a.distance(b);
    if d < 1e-12 {
        return Ok(true);
    }
    let ray = raycast(grid, a, a.bearing_to(b), d + 1e-6)?;
    Ok(ray >= d - 1e-9)
}

pub fn minimal_time_rrt(
    grid: &OccupancyGrid,
    start: &Pose,
    goal: &Point,
    model: &MotionModel,
    seed: u64,
    params: &RrtParams,
) -> Result<OracleTime> {
    minimal_time_rrt_traced(grid, start, goal, model, seed, params).map(|(t, _)| t)
}

/// As `minimal_time_rrt`, also returning the best goal-connected cost after
/// each iteration (infinite until first connection).
pub fn minimal_time_rrt_traced(
    grid: &OccupancyGrid,
    start: &Pose,
    goal: &Point,
    model: &MotionModel,
    seed: u64,
    params: &RrtParams,
) -> Result<(OracleTime, Vec<f64>)> {
    start.validate(grid)?;
    let goal_cell = grid.require_free(goal)?;
    let done = |seconds: f64| OracleTime { seconds, planner: PlannerKind::RrtStar };
    if grid.cell_of(&start.position()) == Some(goal_cell) {
        return Ok((done(0.0), vec![0.0; params.iterations]));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let goal_field = DistanceField::from_point(grid, goal)?;
    let mut nodes = vec![Node {
        pos: start.position(),
        heading: start.heading,
        parent: usize::MAX,
        edge_len: 0.0,
        edge_cost: 0.0,
        cost: 0.0,
        children: Vec::new(),
    }];

    let goal_connection = |node: &Node| -> Result<Option<f64>> {
        let d = node.pos.distance(goal);
        if d < 1e-12 {
            return Ok(Some(node.cost));
        }
        if d > params.max_edge + 1e-9 || !line_of_sight(grid, &node.pos, goal)? {
            return Ok(None);
        }
        let rot = wrap_angle(node.pos.bearing_to(goal) - node.heading).abs().to_degrees();
        Ok(Some(node.cost + model.rotate_time(rot)? + model.translate_time(d)?))
    };

    let mut best = goal_connection(&nodes[0])?.unwrap_or(f64::INFINITY);
    let mut trace = Vec::with_capacity(params.iterations);

    for _ in 0..params.iterations {
        // Sample a navigable point (goal-biased).
        let sample = if rng.random::<f64>() < params.goal_bias {
            *goal
        } else {
            match sample_free_point(grid, &mut rng) {
                Some(p) => p,
                None => {
                    trace.push(best);
                    continue;
                }
            }
        };

        // Nearest tree node by geodesic distance from the sample.
        let field = DistanceField::from_point(grid, &sample)?;
        let mut nearest = 0usize;
        let mut nearest_d = f64::INFINITY;
        for (i, node) in nodes.iter().enumerate() {
            let d = field.at_point(grid, &node.pos);
            if d < nearest_d {
                nearest_d = d;
                nearest = i;
            }
        }

        // Steer straight toward the sample, truncated by range and obstacles.
        let straight = nodes[nearest].pos.distance(&sample);
        if straight < 1e-9 {
            trace.push(best);
            continue;
        }
        let bearing = nodes[nearest].pos.bearing_to(&sample);
        let ray = raycast(grid, &nodes[nearest].pos, bearing, params.max_edge + 1.0)?;
        let reach = straight.min(params.max_edge).min(ray - 1e-6);
        if reach < 1e-3 {
            trace.push(best);
            continue;
        }
        let x_new = nodes[nearest].pos.offset(reach, bearing);
        if !grid.is_free_point(&x_new) {
            trace.push(best);
            continue;
        }

        // Candidate parents: nodes within the connection radius with LOS.
        let mut neighbors: Vec<(usize, f64)> = Vec::new();
        for (i, node) in nodes.iter().enumerate() {
            let d = node.pos.distance(&x_new);
            if d > 1e-9 && d <= params.max_edge + 1e-9 && line_of_sight(grid, &node.pos, &x_new)? {
                neighbors.push((i, d));
            }
        }
        if neighbors.is_empty() {
            trace.push(best);
            continue;
        }

        let mut parent = usize::MAX;
        let mut parent_cost = f64::INFINITY;
        let mut parent_edge = (0.0, 0.0, 0.0); // (len, cost, bearing)
        for &(i, d) in &neighbors {
            let b = nodes[i].pos.bearing_to(&x_new);
            let rot = wrap_angle(b - nodes[i].heading).abs().to_degrees();
            let ec = model.rotate_time(rot)? + model.translate_time(d)?;
            let c = nodes[i].cost + ec;
            if c < parent_cost {
                parent_cost = c;
                parent = i;
                parent_edge = (d, ec, b);
            }
        }

        let new_idx = nodes.len();
        nodes.push(Node {
            pos: x_new,
            heading: parent_edge.2,
            parent,
            edge_len: parent_edge.0,
            edge_cost: parent_edge.1,
            cost: parent_cost,
            children: Vec::new(),
        });
        nodes[parent].children.push(new_idx);
        if let Some(t) = goal_connection(&nodes[new_idx])? {
            best = best.min(t);
        }

        // Rewire neighbors through the new node when that lowers their cost.
        for &(i, d) in &neighbors {
            if i == parent {
                continue;
            }
            let b = x_new.bearing_to(&nodes[i].pos);
            let rot = wrap_angle(b - nodes[new_idx].heading).abs().to_degrees();
            let ec = model.rotate_time(rot)? + model.translate_time(d)?;
            let c = nodes[new_idx].cost + ec;
            if c < nodes[i].cost - 1e-12 {
                let old_parent = nodes[i].parent;
                if old_parent != usize::MAX {
                    nodes[old_parent].children.retain(|&ch| ch != i);
                }
                nodes[i].parent = new_idx;
                nodes[i].heading = b;
                nodes[i].edge_len = d;
                nodes[i].edge_cost = ec;
                nodes[i].cost = c;
                nodes[new_idx].children.push(i);
                if let Some(t) = goal_connection(&nodes[i])? {
                    best = best.min(t);
                }
                // The rewired node's heading changed, so its children's rotate
                // costs change; deeper descendants only shift by the deltas.
                let mut stack = vec![(i, true)];
                while let Some((n, recompute)) = stack.pop() {
                    let children = nodes[n].children.clone();
                    for ch in children {
                        if recompute {
                            let rot = wrap_angle(nodes[ch].heading - nodes[n].heading)
                                .abs()
                                .to_degrees();
                            nodes[ch].edge_cost = model.rotate_time(rot)?
                                + model.translate_time(nodes[ch].edge_len)?;
                        }
                        nodes[ch].cost = nodes[n].cost + nodes[ch].edge_cost;
                        if let Some(t) = goal_connection(&nodes[ch])? {
                            best = best.min(t);
                        }
                        stack.push((ch, false));
                    }
                }
            }
        }
        trace.push(best);
    }

    if best.is_finite() {
        Ok((done(best), trace))
    } else {
        // Best partial: cost of the node geodesically closest to the goal.
        let mut best_partial = f64::INFINITY;
        let mut closest = f64::INFINITY;
        for node in &nodes {
            let d = goal_field.at_point(grid, &node.pos);
            if d < closest {
                closest = d;
                best_partial = node.cost;
            }
        }
        Err(Error::PlannerIncomplete { best_partial })
    }
}

fn sample_free_point(grid: &OccupancyGrid, rng: &mut ChaCha8Rng) -> Option<Point> {
    for _ in 0..10_000 {
        let p = Point::new(
            rng.random_range(0.0..grid.width_m()),
            rng.random_range(0.0..grid.height_m()),
        );
        if grid.is_free_point(&p) {
            return Some(p);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::minimal_time_lattice;
    use crate::world::{generate_world, WorldParams, WorldStyle};
    use approx::assert_abs_diff_eq;

    #[test]
    fn dead_ahead_goal_is_one_translate() {
        let grid = OccupancyGrid::empty_room(40, 40, 0.25).unwrap();
        let c = grid.cell_center(10, 20);
        let start = Pose::new(c.x, c.y, 0.0);
        let goal = grid.cell_center(22, 20); // 3.0 m dead ahead
        let model = MotionModel::default();
        let t = minimal_time_rrt(&grid, &start, &goal, &model, 1, &RrtParams::default()).unwrap();
        assert_abs_diff_eq!(t.seconds, model.translate_time(3.0).unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn goal_behind_single_turn_bounds_the_plan() {
        let grid = OccupancyGrid::empty_room(40, 40, 0.25).unwrap();
        let c = grid.cell_center(20, 20);
        let start = Pose::new(c.x, c.y, 0.0);
        let goal = grid.cell_center(12, 20); // 2.0 m straight behind
        let model = MotionModel::default();
        let t = minimal_time_rrt(&grid, &start, &goal, &model, 2, &RrtParams::default()).unwrap();
        // Turning 180° then driving straight is always feasible, so it upper
        // bounds the plan. It is not the optimum: the quadratic rotation fit
        // makes a dogleg with two ~90° turns cheaper than one 180° turn
        // (2·t(90°) = 29.70 s < t(180°) = 33.27 s), and the planner finds it.
        let single_turn = model.rotate_time(180.0).unwrap() + model.translate_time(2.0).unwrap();
        assert!(t.seconds <= single_turn + 1e-9, "{} > {single_turn}", t.seconds);
        assert!(t.seconds >= model.translate_time(2.0).unwrap());
        // The deterministic lattice oracle agrees on the dogleg being better.
        let lattice = crate::metrics::minimal_time_lattice(&grid, &start, &goal, &model).unwrap();
        assert!(lattice.seconds <= single_turn + 1e-9);
        assert!((t.seconds - lattice.seconds).abs() <= 0.05 * lattice.seconds);
    }

    #[test]
    fn trace_is_nonincreasing() {
        let params = WorldParams {
            width_cells: 24,
            height_cells: 24,
            resolution: 0.25,
            style: WorldStyle::Scatter { obstacles: 2, obstacle_min: 2, obstacle_max: 3 },
        };
        let grid = generate_world(5, &params).unwrap();
        let free = grid.free_cells();
        let s = grid.cell_center(free[0].0, free[0].1);
        let g = grid.cell_center(free[free.len() - 1].0, free[free.len() - 1].1);
        let start = Pose::new(s.x, s.y, 1.0);
        let (_, trace) = minimal_time_rrt_traced(
            &grid,
            &start,
            &g,
            &MotionModel::default(),
            7,
            &RrtParams { iterations: 400, ..RrtParams::default() },
        )
        .unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn close_to_lattice_on_random_maps() {
        let model = MotionModel::default();
        let params = WorldParams {
            width_cells: 24,
            height_cells: 24,
            resolution: 0.25,
            style: WorldStyle::Scatter { obstacles: 2, obstacle_min: 2, obstacle_max: 3 },
        };
        for seed in 0..5u64 {
            let grid = generate_world(seed, &params).unwrap();
            let free = grid.free_cells();
            let s = grid.cell_center(free[1].0, free[1].1);
            let g = grid.cell_center(free[free.len() - 2].0, free[free.len() - 2].1);
            if s.distance(&g) < 2.0 {
                continue;
            }
            let start = Pose::new(s.x, s.y, 0.0);
            let lattice = minimal_time_lattice(&grid, &start, &g, &model).unwrap();
            let rrt =
                minimal_time_rrt(&grid, &start, &g, &model, seed + 100, &RrtParams::default())
                    .unwrap();
            assert!(
                rrt.seconds <= lattice.seconds * 1.05 + 1e-9,
                "seed {seed}: rrt {} vs lattice {}",
                rrt.seconds,
                lattice.seconds
            );
            // One lattice discretization step: a 15° half-bin rotation.
            let slack = model.rotate_time(15.0).unwrap() + model.translate_time(0.25).unwrap();
            assert!(rrt.seconds >= lattice.seconds - slack);
        }
    }
}
