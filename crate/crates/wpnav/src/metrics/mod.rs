//! Evaluation: navigation metrics (TL, NE, OS, SR, SPL), robot-time metrics
//! (EET, SCT) under the point-turn motion model, and minimal-time oracle
//! planners.

mod lattice;
mod motion;
mod rrt;
mod stats;

pub use lattice::minimal_time_lattice;
pub use motion::{eet, MotionModel, RotateCoeffs, TranslateCoeffs};
pub use rrt::{minimal_time_rrt, RrtParams};
pub use stats::{waypoint_statistics, WaypointStats};

use crate::error::{Error, Result};
use crate::geom::{polyline_length, Point};
use crate::navigators::Command;
use crate::world::{DistanceField, Episode, OccupancyGrid};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Distance notion used for navigation error and goal proximity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    #[default]
    Geodesic,
    Euclidean,
}

/// The outcome of running one episode to completion.
#[derive(Debug, Clone)]
pub struct EpisodeResult {
    /// True when a stop was issued within the success distance of the goal.
    pub success: bool,
    pub path: Vec<Point>,
    pub commands: Vec<Command>,
    pub final_position: Point,
    pub episode: Arc<Episode>,
}

/// One row of evaluation metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tl: f64,
    pub ne: f64,
    pub os: u8,
    pub sr: u8,
    pub spl: f64,
    pub eet: f64,
    pub sct: f64,
    pub n_commands: usize,
    /// Average speed TL/EET in m/s (0 for empty command streams).
    pub speed: f64,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "TL,NE,OS,SR,SPL,EET,SCT,n_commands,speed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.tl, self.ne, self.os, self.sr, self.spl, self.eet, self.sct, self.n_commands,
            self.speed
        )
    }
}

/// Mean metrics over a set of episode rows.
pub fn aggregate(rows: &[MetricsReport]) -> Option<MetricsReport> {
    if rows.is_empty() {
        return None;
    }
    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&MetricsReport) -> f64| rows.iter().map(f).sum::<f64>() / n;
    Some(MetricsReport {
        tl: mean(&|r| r.tl),
        ne: mean(&|r| r.ne),
        os: 0,
        sr: 0,
        spl: mean(&|r| r.spl),
        eet: mean(&|r| r.eet),
        sct: mean(&|r| r.sct),
        n_commands: (mean(&|r| r.n_commands as f64)).round() as usize,
        speed: mean(&|r| r.speed),
    })
}

/// Mean OS/SR rates of a set of rows (the `u8` fields do not average).
pub fn success_rates(rows: &[MetricsReport]) -> (f64, f64) {
    if rows.is_empty() {
        return (0.0, 0.0);
    }
    let n = rows.len() as f64;
    let os = rows.iter().map(|r| r.os as f64).sum::<f64>() / n;
    let sr = rows.iter().map(|r| r.sr as f64).sum::<f64>() / n;
    (os, sr)
}

/// Navigation metrics for one episode: TL, NE, OS, SR, SPL.
///
/// NE uses the geodesic distance by default (the reward's distance notion);
/// OS checks every trajectory point (vertices plus fine interpolation)
/// against the episode success distance.
pub fn vln_metrics(
    result: &EpisodeResult,
    grid: &OccupancyGrid,
    mode: DistanceMode,
) -> Result<MetricsReport> {
    let ep = &result.episode;
    let tl = polyline_length(&result.path);
    let goal_field = match mode {
        DistanceMode::Geodesic => Some(DistanceField::from_point(grid, &ep.goal)?),
        DistanceMode::Euclidean => None,
    };
    let dist_to_goal = |p: &Point| -> f64 {
        match (&goal_field, mode) {
            (Some(field), DistanceMode::Geodesic) => field.at_point(grid, p),
            _ => p.distance(&ep.goal),
        }
    };
    let ne = dist_to_goal(&result.final_position);
    let sr = u8::from(result.success);

    let mut os = 0u8;
    'outer: for seg in result.path.windows(2).chain(std::iter::once(
        // Degenerate segment so single-point paths still get checked.
        std::slice::from_ref(result.path.last().unwrap_or(&result.final_position)),
    )) {
        let (a, b) = (seg[0], *seg.last().unwrap());
        let len = a.distance(&b);
        let steps = (len / 0.05).ceil().max(1.0) as usize;
        for s in 0..=steps {
            let f = s as f64 / steps as f64;
            let p = Point::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y));
            if dist_to_goal(&p) <= ep.success_distance {
                os = 1;
                break 'outer;
            }
        }
    }
    // Success implies the stop landed within range, so OS >= SR by definition;
    // keep the invariant airtight against discretization of the sweep.
    os = os.max(sr);

    let ell = ep.geodesic_length;
    let denom = tl.max(ell);
    let spl = if denom > 0.0 { sr as f64 * ell / denom } else { sr as f64 };

    Ok(MetricsReport {
        tl,
        ne,
        os,
        sr,
        spl,
        eet: 0.0,
        sct: 0.0,
        n_commands: result.commands.len(),
        speed: 0.0,
    })
}

/// Minimal time for an oracle to reach the goal under point-turn dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleTime {
    pub seconds: f64,
    pub planner: PlannerKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    RrtStar,
    LatticeDijkstra,
}

/// Success weighted by completion time: `SR · T / max(C, T)` with `C` the
/// estimated execution time of the agent's command stream.
pub fn sct(result: &EpisodeResult, oracle: &OracleTime, model: &MotionModel) -> Result<f64> {
    if !(oracle.seconds > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "oracle time must be positive, got {}",
            oracle.seconds
        )));
    }
    let c = eet(&result.commands, model)?;
    let sr = if result.success { 1.0 } else { 0.0 };
    Ok(sr * oracle.seconds / c.max(oracle.seconds))
}

/// Fill the EET/SCT/speed fields of a metrics row.
pub fn attach_time_metrics(
    row: &mut MetricsReport,
    result: &EpisodeResult,
    oracle: Option<&OracleTime>,
    model: &MotionModel,
) -> Result<()> {
    row.eet = eet(&result.commands, model)?;
    row.speed = if row.eet > 0.0 { row.tl / row.eet } else { 0.0 };
    row.sct = match oracle {
        Some(t) => sct(result, t, model)?,
        None => 0.0,
    };
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Pose;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_episode(grid: &OccupancyGrid, start: Point, goal: Point) -> Arc<Episode> {
        let path = crate::world::shortest_path(grid, &start, &goal).unwrap().unwrap();
        let len = polyline_length(&path);
        Arc::new(Episode {
            id: "toy".into(),
            start: Pose::new(start.x, start.y, 0.0),
            goal: *path.last().unwrap(),
            shortest_path: path,
            geodesic_length: len,
            instruction: vec![0, 1, 7, 8],
            success_distance: 0.5,
            marker: Vec::new(),
        })
    }

    #[test]
    fn spl_examples() {
        let grid = OccupancyGrid::empty_room(60, 60, 0.25).unwrap();
        let start = grid.cell_center(4, 30);
        let goal = grid.cell_center(44, 30);
        let ep = toy_episode(&grid, start, goal);
        let ell = ep.geodesic_length;

        // Optimal path: TL == geodesic length means SPL = 1.
        let optimal = EpisodeResult {
            success: true,
            path: ep.shortest_path.clone(),
            commands: vec![Command::Translate(ell), Command::Stop],
            final_position: ep.goal,
            episode: ep.clone(),
        };
        let m = vln_metrics(&optimal, &grid, DistanceMode::Geodesic).unwrap();
        assert_abs_diff_eq!(m.spl, 1.0, epsilon = 1e-12);
        assert_eq!((m.sr, m.os), (1, 1));
        assert_abs_diff_eq!(m.ne, 0.0, epsilon = 1e-12);

        // ℓ = 10, TL = 12.5 → SPL = 0.8; scale the optimal path length by 1.25
        // with a detour that returns to the goal.
        let detour = ell * 0.25;
        let mut path = ep.shortest_path.clone();
        path.push(ep.goal.offset(detour / 2.0, 1.0));
        path.push(ep.goal);
        let wandering = EpisodeResult {
            success: true,
            path,
            commands: vec![Command::Translate(ell + detour), Command::Stop],
            final_position: ep.goal,
            episode: ep.clone(),
        };
        let m = vln_metrics(&wandering, &grid, DistanceMode::Geodesic).unwrap();
        assert_abs_diff_eq!(m.spl, ell / (ell + detour), epsilon = 1e-9);

        // Failure zeroes SR and SPL regardless of path length.
        let failed = EpisodeResult { success: false, ..optimal };
        let m = vln_metrics(&failed, &grid, DistanceMode::Geodesic).unwrap();
        assert_eq!((m.sr, m.spl), (0, 0.0));
        assert_eq!(m.os, 1); // still passed within range of the goal
    }

    #[test]
    fn sct_examples() {
        let grid = OccupancyGrid::empty_room(40, 40, 0.25).unwrap();
        let ep = toy_episode(&grid, grid.cell_center(4, 20), grid.cell_center(24, 20));
        let model = MotionModel::default();
        let result = EpisodeResult {
            success: true,
            path: ep.shortest_path.clone(),
            commands: vec![Command::Translate(1.0)],
            final_position: ep.goal,
            episode: ep.clone(),
        };
        // C = T → SCT = 1.
        let c = eet(&result.commands, &model).unwrap();
        let sct_val =
            sct(&result, &OracleTime { seconds: c, planner: PlannerKind::LatticeDijkstra }, &model)
                .unwrap();
        assert_abs_diff_eq!(sct_val, 1.0, epsilon = 1e-12);

        // T = 100, C = 153 → 100/153 ≈ 0.6536.
        let slow = EpisodeResult {
            commands: vec![Command::Translate((153.0 - 0.362) / 4.2)],
            ..result.clone()
        };
        let sct_val = sct(
            &slow,
            &OracleTime { seconds: 100.0, planner: PlannerKind::LatticeDijkstra },
            &model,
        )
        .unwrap();
        assert_abs_diff_eq!(sct_val, 100.0 / 153.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sct_val, 0.6536, epsilon = 5e-5);

        // Failure → 0.
        let failed = EpisodeResult { success: false, ..result };
        let sct_val = sct(
            &failed,
            &OracleTime { seconds: 10.0, planner: PlannerKind::LatticeDijkstra },
            &model,
        )
        .unwrap();
        assert_eq!(sct_val, 0.0);

        assert!(sct(
            &failed,
            &OracleTime { seconds: 0.0, planner: PlannerKind::LatticeDijkstra },
            &model
        )
        .is_err());
    }

    #[test]
    fn invariants_over_randomized_synthetic_episodes() {
        let grid = OccupancyGrid::empty_room(40, 40, 0.25).unwrap();
        let model = MotionModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let free = grid.free_cells();
        for _ in 0..2000 {
            let pick = |rng: &mut ChaCha8Rng| {
                let (cx, cy) = free[rng.random_range(0..free.len())];
                grid.cell_center(cx, cy)
            };
            let start = pick(&mut rng);
            let goal = pick(&mut rng);
            if start.distance(&goal) < 1.0 {
                continue;
            }
            let ep = toy_episode(&grid, start, goal);
            let wander = pick(&mut rng);
            let final_pos = pick(&mut rng);
            let path = vec![start, wander, final_pos];
            let near = final_pos.distance(&ep.goal) <= ep.success_distance;
            let success = near && rng.random_bool(0.7);
            let result = EpisodeResult {
                success,
                path: path.clone(),
                commands: vec![
                    Command::Rotate(rng.random_range(-3.0..3.0)),
                    Command::Translate(polyline_length(&path)),
                    Command::Stop,
                ],
                final_position: final_pos,
                episode: ep.clone(),
            };
            let mut row = vln_metrics(&result, &grid, DistanceMode::Geodesic).unwrap();
            let t = OracleTime { seconds: 5.0, planner: PlannerKind::LatticeDijkstra };
            attach_time_metrics(&mut row, &result, Some(&t), &model).unwrap();
            assert!(row.spl <= row.sr as f64 + 1e-12);
            assert!(row.sct <= row.sr as f64 + 1e-12);
            assert!(row.os >= row.sr);
            assert!((0.0..=1.0).contains(&row.spl));
            assert!((0.0..=1.0).contains(&row.sct));
        }
    }

    #[test]
    fn euclidean_mode_is_available() {
        let grid = OccupancyGrid::empty_room(40, 40, 0.25).unwrap();
        let ep = toy_episode(&grid, grid.cell_center(4, 20), grid.cell_center(24, 20));
        let off_goal = ep.goal.offset(1.0, 0.5);
        let result = EpisodeResult {
            success: false,
            path: vec![ep.start.position(), off_goal],
            commands: vec![],
            final_position: off_goal,
            episode: ep.clone(),
        };
        let m = vln_metrics(&result, &grid, DistanceMode::Euclidean).unwrap();
        assert_abs_diff_eq!(m.ne, 1.0, epsilon = 1e-9);
    }
}
