//! Continuous 2D environments on occupancy grids: ray-cast panoramic range
//! sensing, geodesic distances, and procedural world/episode generation.

mod episode;
mod gen;
mod geodesic;
mod io;
mod raycast;
mod scan;

pub use episode::{generate_episode, Episode, EpisodeParams, Vocabulary};
pub use gen::{generate_world, WorldParams, WorldStyle};
pub use geodesic::{geodesic_distance, shortest_path, DiagonalRule, DistanceField};
pub use io::WorldFile;
pub use raycast::raycast;
pub use scan::{panorama_scan, RangeScan, ScanConfig, SECTOR_COUNT, SECTOR_WIDTH};

use crate::error::{Error, Result};
use crate::geom::{normalize_angle, Point};
use serde::{Deserialize, Serialize};

/// The navigable world: a grid of free/blocked cells with a metric resolution.
///
/// Invariants enforced at construction: every boundary cell is blocked (the
/// world is closed) and at least one free cell exists. Immutable after
/// construction and cheap to share behind an `Arc`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    /// Row-major blocked flags, `true` = blocked.
    cells: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64, cells: Vec<bool>) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::Generation(format!(
                "grid {width}x{height} too small for a closed boundary"
            )));
        }
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::Generation(format!("bad resolution {resolution}")));
        }
        if cells.len() != width * height {
            return Err(Error::Generation(format!(
                "cell count {} does not match {width}x{height}",
                cells.len()
            )));
        }
        let grid = OccupancyGrid { width, height, resolution, cells };
        for x in 0..width {
            if !grid.is_blocked(x, 0) || !grid.is_blocked(x, height - 1) {
                return Err(Error::Generation("boundary cell is not blocked".into()));
            }
        }
        for y in 0..height {
            if !grid.is_blocked(0, y) || !grid.is_blocked(width - 1, y) {
                return Err(Error::Generation("boundary cell is not blocked".into()));
            }
        }
        if !grid.cells.iter().any(|b| !b) {
            return Err(Error::Generation("no free cell exists".into()));
        }
        Ok(grid)
    }

    /// An all-free interior surrounded by the blocked boundary ring.
    pub fn empty_room(width: usize, height: usize, resolution: f64) -> Result<Self> {
        let mut cells = vec![true; width * height];
        for y in 1..height.saturating_sub(1) {
            for x in 1..width.saturating_sub(1) {
                cells[y * width + x] = false;
            }
        }
        OccupancyGrid::new(width, height, resolution, cells)
    }

    pub fn width_cells(&self) -> usize {
        self.width
    }

    pub fn height_cells(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn width_m(&self) -> f64 {
        self.width as f64 * self.resolution
    }

    pub fn height_m(&self) -> f64 {
        self.height as f64 * self.resolution
    }

    pub fn is_blocked(&self, cx: usize, cy: usize) -> bool {
        self.cells[cy * self.width + cx]
    }

    pub fn in_bounds(&self, cx: i64, cy: i64) -> bool {
        cx >= 0 && cy >= 0 && (cx as usize) < self.width && (cy as usize) < self.height
    }

    /// Cell containing a point; points outside the world map to `None`.
    pub fn cell_of(&self, p: &Point) -> Option<(usize, usize)> {
        if p.x < 0.0 || p.y < 0.0 {
            return None;
        }
        let cx = (p.x / self.resolution).floor() as usize;
        let cy = (p.y / self.resolution).floor() as usize;
        if cx < self.width && cy < self.height {
            Some((cx, cy))
        } else {
            None
        }
    }

    pub fn cell_center(&self, cx: usize, cy: usize) -> Point {
        Point::new((cx as f64 + 0.5) * self.resolution, (cy as f64 + 0.5) * self.resolution)
    }

    /// True when the point lies inside a free cell.
    pub fn is_free_point(&self, p: &Point) -> bool {
        match self.cell_of(p) {
            Some((cx, cy)) => !self.is_blocked(cx, cy),
            None => false,
        }
    }

    pub fn require_free(&self, p: &Point) -> Result<(usize, usize)> {
        match self.cell_of(p) {
            Some((cx, cy)) if !self.is_blocked(cx, cy) => Ok((cx, cy)),
            _ => Err(Error::BlockedPoint { x: p.x, y: p.y }),
        }
    }

    /// Free cells in row-major order.
    pub fn free_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for cy in 0..self.height {
            for cx in 0..self.width {
                if !self.is_blocked(cx, cy) {
                    out.push((cx, cy));
                }
            }
        }
        out
    }

    /// Number of connected components of free space (8-connected).
    pub fn free_components(&self) -> usize {
        let mut seen = vec![false; self.cells.len()];
        let mut components = 0;
        for start in 0..self.cells.len() {
            if self.cells[start] || seen[start] {
                continue;
            }
            components += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(idx) = stack.pop() {
                let (cx, cy) = ((idx % self.width) as i64, (idx / self.width) as i64);
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (nx, ny) = (cx + dx, cy + dy);
                        if !self.in_bounds(nx, ny) {
                            continue;
                        }
                        let nidx = ny as usize * self.width + nx as usize;
                        if !self.cells[nidx] && !seen[nidx] {
                            seen[nidx] = true;
                            stack.push(nidx);
                        }
                    }
                }
            }
        }
        components
    }

    /// A copy of the grid with one extra blocked cell.
    pub fn with_blocked(&self, cx: usize, cy: usize) -> Result<Self> {
        self.with_blocked_cells(&[(cx, cy)])
    }

    /// A copy of the grid with several extra blocked cells.
    pub fn with_blocked_cells(&self, blocked: &[(usize, usize)]) -> Result<Self> {
        let mut cells = self.cells.clone();
        for &(cx, cy) in blocked {
            cells[cy * self.width + cx] = true;
        }
        OccupancyGrid::new(self.width, self.height, self.resolution, cells)
    }

}

/// Agent state: position in meters, heading in [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Pose { x, y, heading: normalize_angle(heading) }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn validate(&self, grid: &OccupancyGrid) -> Result<()> {
        if grid.is_free_point(&self.position()) {
            Ok(())
        } else {
            Err(Error::InvalidPose { x: self.x, y: self.y })
        }
    }
}
