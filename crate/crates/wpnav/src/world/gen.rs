//! Deterministic procedural world generation.

use super::OccupancyGrid;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "style", rename_all = "snake_case")]
pub enum WorldStyle {
    /// All interior cells free.
    Empty,
    /// Empty room with a few rectangular obstacles dropped in, keeping the
    /// free space connected.
    Scatter { obstacles: usize, obstacle_min: usize, obstacle_max: usize },
    /// Rooms carved out of solid rock, chained together with corridors.
    Rooms { rooms: usize, room_min: usize, room_max: usize, corridor_width: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldParams {
    pub width_cells: usize,
    pub height_cells: usize,
    /// Meters per cell.
    pub resolution: f64,
    #[serde(flatten)]
    pub style: WorldStyle,
}

impl Default for WorldParams {
    fn default() -> Self {
        WorldParams {
            width_cells: 40,
            height_cells: 40,
            resolution: 0.25,
            style: WorldStyle::Scatter { obstacles: 3, obstacle_min: 2, obstacle_max: 4 },
        }
    }
}

impl WorldParams {
    pub fn empty(width_cells: usize, height_cells: usize, resolution: f64) -> Self {
        WorldParams { width_cells, height_cells, resolution, style: WorldStyle::Empty }
    }

    fn validate(&self) -> Result<()> {
        let (w, h) = (self.width_cells, self.height_cells);
        if w < 5 || h < 5 || w > 2048 || h > 2048 {
            return Err(Error::Generation(format!("grid size {w}x{h} out of bounds")));
        }
        if !(self.resolution > 0.0) || !self.resolution.is_finite() {
            return Err(Error::Generation(format!("bad resolution {}", self.resolution)));
        }
        match &self.style {
            WorldStyle::Empty => {}
            WorldStyle::Scatter { obstacle_min, obstacle_max, .. } => {
                if *obstacle_min == 0 || obstacle_min > obstacle_max {
                    return Err(Error::Generation("bad obstacle size range".into()));
                }
                if *obstacle_max + 4 > w.min(h) {
                    return Err(Error::Generation("obstacles too large for grid".into()));
                }
            }
            WorldStyle::Rooms { rooms, room_min, room_max, corridor_width } => {
                if *rooms == 0 {
                    return Err(Error::Generation("rooms style needs at least one room".into()));
                }
                if *room_min < 2 || room_min > room_max || *room_max + 2 > w.min(h) {
                    return Err(Error::Generation("bad room size range".into()));
                }
                if *corridor_width == 0 || *corridor_width + 2 > w.min(h) {
                    return Err(Error::Generation("bad corridor width".into()));
                }
            }
        }
        Ok(())
    }
}

/// Generate a world deterministically from `seed`. The result always has a
/// single connected free component.
pub fn generate_world(seed: u64, params: &WorldParams) -> Result<OccupancyGrid> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (params.width_cells, params.height_cells);
    match &params.style {
        WorldStyle::Empty => OccupancyGrid::empty_room(w, h, params.resolution),
        WorldStyle::Scatter { obstacles, obstacle_min, obstacle_max } => {
            let mut cells = empty_cells(w, h);
            let mut placed = 0;
            let mut attempts = 0;
            while placed < *obstacles && attempts < obstacles * 50 {
                attempts += 1;
                let bw = rng.random_range(*obstacle_min..=*obstacle_max);
                let bh = rng.random_range(*obstacle_min..=*obstacle_max);
                // Keep a one-cell free margin to the boundary walls so the
                // perimeter stays traversable.
                if w < bw + 4 || h < bh + 4 {
                    continue;
                }
                let x0 = rng.random_range(2..w - bw - 1);
                let y0 = rng.random_range(2..h - bh - 1);
                let backup = cells.clone();
                for y in y0..y0 + bh {
                    for x in x0..x0 + bw {
                        cells[y * w + x] = true;
                    }
                }
                let candidate = OccupancyGrid::new(w, h, params.resolution, cells.clone())?;
                if candidate.free_components() == 1 {
                    placed += 1;
                } else {
                    cells = backup;
                }
            }
            if placed < *obstacles {
                return Err(Error::Generation(format!(
                    "placed only {placed}/{obstacles} obstacles without disconnecting free space"
                )));
            }
            OccupancyGrid::new(w, h, params.resolution, cells)
        }
        WorldStyle::Rooms { rooms, room_min, room_max, corridor_width } => {
            let mut cells = vec![true; w * h];
            let mut centers: Vec<(usize, usize)> = Vec::new();
            for _ in 0..*rooms {
                let rw = rng.random_range(*room_min..=*room_max);
                let rh = rng.random_range(*room_min..=*room_max);
                let x0 = rng.random_range(1..w - rw);
                let y0 = rng.random_range(1..h - rh);
                for y in y0..y0 + rh {
                    for x in x0..x0 + rw {
                        cells[y * w + x] = false;
                    }
                }
                centers.push((x0 + rw / 2, y0 + rh / 2));
            }
            // Chain consecutive rooms with L-shaped corridors; the chain keeps
            // the whole free space connected by construction.
            for pair in centers.windows(2) {
                let ((ax, ay), (bx, by)) = (pair[0], pair[1]);
                carve_corridor(&mut cells, w, h, ax, bx, ay, true, *corridor_width);
                carve_corridor(&mut cells, w, h, ay, by, bx, false, *corridor_width);
            }
            let grid = OccupancyGrid::new(w, h, params.resolution, cells)?;
            if grid.free_components() != 1 {
                return Err(Error::Generation("room chain left disconnected free space".into()));
            }
            Ok(grid)
        }
    }
}

fn empty_cells(w: usize, h: usize) -> Vec<bool> {
    let mut cells = vec![true; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            cells[y * w + x] = false;
        }
    }
    cells
}

/// Carve a straight corridor segment of the given width. `horizontal` sweeps x
/// from `from`..=`to` at row `at`; otherwise sweeps y at column `at`.
fn carve_corridor(
    cells: &mut [bool],
    w: usize,
    h: usize,
    from: usize,
    to: usize,
    at: usize,
    horizontal: bool,
    width: usize,
) {
    let (lo, hi) = (from.min(to), from.max(to));
    for main in lo..=hi {
        for off in 0..width {
            let lateral = at + off;
            let (x, y) = if horizontal { (main, lateral) } else { (lateral, main) };
            if x >= 1 && x < w - 1 && y >= 1 && y < h - 1 {
                cells[y * w + x] = false;
            }
        }
    }
}
