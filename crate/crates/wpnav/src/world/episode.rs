//! Episode sampling and templated instruction generation.

use super::geodesic::DiagonalRule;
use super::{DistanceField, OccupancyGrid, Pose};
use crate::error::{Error, Result};
use crate::geom::{polyline_length, wrap_angle, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Ordered template vocabulary with dense token ids `0..size-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
}

impl Vocabulary {
    pub const MAX_SIZE: usize = 64;

    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if tokens.is_empty() || tokens.len() > Self::MAX_SIZE {
            return Err(Error::InvalidArgument(format!(
                "vocabulary must hold 1..={} tokens",
                Self::MAX_SIZE
            )));
        }
        Ok(Vocabulary { tokens })
    }

    /// The template vocabulary used by the instruction generator.
    pub fn template() -> Self {
        Vocabulary {
            tokens: ["go", "forward", "turn", "left", "right", "slight", "around", "then", "stop"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u16> {
        self.tokens.iter().position(|t| t == word).map(|i| i as u16)
    }

    pub fn word(&self, id: u16) -> Result<&str> {
        self.tokens.get(id as usize).map(|s| s.as_str()).ok_or(Error::UnknownToken(id))
    }

    pub fn stop_id(&self) -> u16 {
        self.id("stop").expect("template vocabulary carries a stop token")
    }

    pub fn decode(&self, ids: &[u16]) -> Result<String> {
        let words: Result<Vec<&str>> = ids.iter().map(|&i| self.word(i)).collect();
        Ok(words?.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeParams {
    pub min_geodesic: f64,
    pub max_geodesic: f64,
    pub success_distance: f64,
    /// Plant a pillar just past the goal along the final approach so the
    /// goal bearing is visible in the range scan.
    pub goal_marker: bool,
    /// Marker width in cells. Sizes above 1 build a slab perpendicular to
    /// the final approach, so near misses still end at its face instead of
    /// slipping past the goal.
    pub marker_size: usize,
    /// Minimum clearance (meters) between the goal and any blocked cell, so
    /// the goal pillar stands apart from walls in the range scan.
    pub goal_clearance: f64,
    pub max_attempts: usize,
}

impl Default for EpisodeParams {
    fn default() -> Self {
        EpisodeParams {
            min_geodesic: 2.0,
            max_geodesic: 6.0,
            success_distance: 0.5,
            goal_marker: true,
            marker_size: 1,
            goal_clearance: 0.0,
            max_attempts: 200,
        }
    }
}

/// One navigation episode on a fixed world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub id: String,
    pub start: Pose,
    pub goal: Point,
    pub shortest_path: Vec<Point>,
    pub geodesic_length: f64,
    /// Token ids over the template vocabulary, always ending with `stop`.
    pub instruction: Vec<u16>,
    pub success_distance: f64,
    /// Goal-marker pillar cells, blocked in the episode's working grid.
    #[serde(default)]
    pub marker: Vec<(usize, usize)>,
}

impl Episode {
    /// The grid this episode is navigated on: the base world plus the marker.
    pub fn apply_marker(&self, base: &OccupancyGrid) -> Result<OccupancyGrid> {
        if self.marker.is_empty() {
            return Ok(base.clone());
        }
        base.with_blocked_cells(&self.marker)
    }
}

/// Sample an episode deterministically from `(grid, seed)`.
///
/// Start/goal cells are drawn until the geodesic length lands inside the
/// configured window; the instruction templates the shortest path's turn
/// sequence and always terminates with the stop token.
pub fn generate_episode(grid: &OccupancyGrid, seed: u64, params: &EpisodeParams) -> Result<Episode> {
    if !(params.min_geodesic >= 0.0 && params.max_geodesic >= params.min_geodesic) {
        return Err(Error::Sampling("bad geodesic window".into()));
    }
    let vocab = Vocabulary::template();
    let free = grid.free_cells();
    if free.len() < 2 {
        return Err(Error::Sampling("not enough free cells".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..params.max_attempts.max(1) {
        let start_cell = free[rng.random_range(0..free.len())];
        let goal_cell = free[rng.random_range(0..free.len())];
        if start_cell == goal_cell {
            continue;
        }
        if params.goal_clearance > 0.0 && !has_clearance(grid, goal_cell, params.goal_clearance) {
            continue;
        }

        // Quick window check on the base grid before committing to a marker.
        // Strict diagonals keep the polyline clear of blocked-cell corners.
        let base_field = DistanceField::from_cell_with_rule(grid, start_cell, DiagonalRule::Strict);
        let base_len = base_field.at_cell(goal_cell.0, goal_cell.1);
        if !base_len.is_finite() || base_len < params.min_geodesic || base_len > params.max_geodesic
        {
            continue;
        }
        let base_cells = match base_field.path_from(goal_cell) {
            Some(c) => c,
            None => continue,
        };

        let (work_grid, marker) = if params.goal_marker {
            match place_marker(grid, &base_cells, start_cell, goal_cell, params.marker_size.max(1)) {
                Some((g, cells)) => (g, cells),
                None => (grid.clone(), Vec::new()),
            }
        } else {
            (grid.clone(), Vec::new())
        };

        // Final path and length on the working grid (the marker may reroute).
        let field = DistanceField::from_cell_with_rule(&work_grid, start_cell, DiagonalRule::Strict);
        let len = field.at_cell(goal_cell.0, goal_cell.1);
        if !len.is_finite() || len < params.min_geodesic || len > params.max_geodesic {
            continue;
        }
        let cells = match field.path_from(goal_cell) {
            Some(c) => c,
            None => continue,
        };
        let path: Vec<Point> = cells.iter().map(|&(x, y)| work_grid.cell_center(x, y)).collect();
        let geodesic_length = polyline_length(&path);
        let heading = path[0].bearing_to(&path[1]);
        let start = Pose::new(path[0].x, path[0].y, heading);
        let goal = *path.last().expect("path has at least two vertices");
        let instruction = template_instruction(&path, &vocab);

        return Ok(Episode {
            id: format!("ep-{seed:08x}"),
            start,
            goal,
            shortest_path: path,
            geodesic_length,
            instruction,
            success_distance: params.success_distance,
            marker,
        });
    }
    Err(Error::Sampling(format!(
        "no start/goal pair with geodesic length in [{}, {}] after {} attempts",
        params.min_geodesic, params.max_geodesic, params.max_attempts
    )))
}

/// True when no blocked cell lies within `clearance` meters of the cell
/// center.
fn has_clearance(grid: &OccupancyGrid, cell: (usize, usize), clearance: f64) -> bool {
    let radius = (clearance / grid.resolution()).ceil() as i64;
    let center = grid.cell_center(cell.0, cell.1);
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let (nx, ny) = (cell.0 as i64 + dx, cell.1 as i64 + dy);
            if !grid.in_bounds(nx, ny) || grid.is_blocked(nx as usize, ny as usize) {
                let corner = if grid.in_bounds(nx, ny) {
                    grid.cell_center(nx as usize, ny as usize)
                } else {
                    crate::geom::Point::new(
                        (nx as f64 + 0.5) * grid.resolution(),
                        (ny as f64 + 0.5) * grid.resolution(),
                    )
                };
                if center.distance(&corner) < clearance {
                    return false;
                }
            }
        }
    }
    true
}

/// Block a marker just past the goal along the final approach direction,
/// provided it stays off the path and keeps free space connected. `size > 1`
/// builds a slab of `size` cells perpendicular to the approach (two cells
/// deep along it, so diagonal approaches cannot thread between corners);
/// falls back to smaller slabs, then a single cell, then no marker.
fn place_marker(
    grid: &OccupancyGrid,
    path_cells: &[(usize, usize)],
    start: (usize, usize),
    goal: (usize, usize),
    size: usize,
) -> Option<(OccupancyGrid, Vec<(usize, usize)>)> {
    let n = path_cells.len();
    if n < 2 {
        return None;
    }
    let prev = path_cells[n - 2];
    let dir = (goal.0 as i64 - prev.0 as i64, goal.1 as i64 - prev.1 as i64);
    // Candidate approach directions ordered by how well they continue it.
    let mut candidates = vec![dir];
    for dy in -1..=1i64 {
        for dx in -1..=1i64 {
            if (dx, dy) != (0, 0) && (dx, dy) != dir {
                candidates.push((dx, dy));
            }
        }
    }
    candidates[1..].sort_by_key(|&(dx, dy)| -(dx * dir.0 + dy * dir.1));
    for trial_size in (1..=size).rev() {
        for &(dx, dy) in &candidates {
            let perp = (-dy, dx);
            let depth: i64 = if trial_size > 1 { 2 } else { 1 };
            let anchor = (goal.0 as i64 + dx, goal.1 as i64 + dy);
            let half = (trial_size as i64 - 1) / 2;
            let mut cells = Vec::new();
            let mut ok = true;
            'cells: for w in -half..(trial_size as i64 - half) {
                for d in 0..depth {
                    let (mx, my) =
                        (anchor.0 + w * perp.0 + d * dx, anchor.1 + w * perp.1 + d * dy);
                    if !grid.in_bounds(mx, my) {
                        ok = false;
                        break 'cells;
                    }
                    let cell = (mx as usize, my as usize);
                    if grid.is_blocked(cell.0, cell.1)
                        || cell == start
                        || path_cells.contains(&cell)
                    {
                        ok = false;
                        break 'cells;
                    }
                    if !cells.contains(&cell) {
                        cells.push(cell);
                    }
                }
            }
            if !ok {
                continue;
            }
            if let Ok(marked) = grid.with_blocked_cells(&cells) {
                if marked.free_components() == 1 {
                    return Some((marked, cells));
                }
            }
        }
    }
    None
}

/// Classify the path's heading changes into template phrases.
fn template_instruction(path: &[Point], vocab: &Vocabulary) -> Vec<u16> {
    let t = |w: &str| vocab.id(w).expect("template word");
    let mut ids = vec![t("go"), t("forward")];

    // Headings of consecutive path segments, skipping zero-length ones.
    let mut headings = Vec::new();
    for w in path.windows(2) {
        if w[0].distance(&w[1]) > 1e-12 {
            headings.push(w[0].bearing_to(&w[1]));
        }
    }
    let mut pending = 0.0;
    for pair in headings.windows(2) {
        let delta = wrap_angle(pair[1] - pair[0]);
        pending += delta;
        // 8-connected paths turn in 45° quanta; flush once the accumulated
        // turn is classifiable and the path straightens out again.
        if delta.abs() < 1e-9 && pending.abs() > 1e-9 {
            push_turn(&mut ids, pending, vocab);
            pending = 0.0;
        }
    }
    if pending.abs() > 1e-9 {
        push_turn(&mut ids, pending, vocab);
    }
    ids.push(t("then"));
    ids.push(t("stop"));
    ids
}

fn push_turn(ids: &mut Vec<u16>, turn: f64, vocab: &Vocabulary) {
    let t = |w: &str| vocab.id(w).expect("template word");
    let deg = turn.to_degrees();
    ids.push(t("then"));
    if deg.abs() >= 112.5 {
        ids.push(t("turn"));
        ids.push(t("around"));
    } else {
        if deg.abs() < 67.5 {
            ids.push(t("slight"));
        } else {
            ids.push(t("turn"));
        }
        ids.push(if deg > 0.0 { t("left") } else { t("right") });
    }
    ids.push(t("then"));
    ids.push(t("go"));
    ids.push(t("forward"));
}
