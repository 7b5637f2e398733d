//! Panoramic range sensing: 12 sectors of 30°, each the min over a fan of rays.

use super::{raycast, OccupancyGrid, Pose};
use crate::error::Result;
use crate::geom::normalize_angle;
use std::f64::consts::TAU;

/// Number of panorama sectors.
pub const SECTOR_COUNT: usize = 12;
/// Angular width of one sector (30°).
pub const SECTOR_WIDTH: f64 = TAU / SECTOR_COUNT as f64;

#[derive(Debug, Clone, Copy)]
pub struct ScanConfig {
    /// Rays averaged (by min) per sector.
    pub rays_per_sector: usize,
    pub max_range: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { rays_per_sector: 5, max_range: 10.0 }
    }
}

/// One panoramic range scan. Sector `i` is centered at `i * 30°` relative to
/// the agent heading; readings satisfy `0 < reading <= max_range`.
///
/// `half_readings` additionally carries the minima of each sector's left and
/// right half-fan (`[2i]` covers `[-15°, 0°]`, `[2i+1]` covers `[0°, +15°]`
/// around the sector center); the policy encoder uses them for sub-sector
/// bearing resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeScan {
    pub readings: [f64; SECTOR_COUNT],
    pub half_readings: [f64; 2 * SECTOR_COUNT],
    pub max_range: f64,
}

impl RangeScan {
    /// Sector center angles relative to the agent heading.
    pub fn sector_centers() -> [f64; SECTOR_COUNT] {
        let mut out = [0.0; SECTOR_COUNT];
        for (i, c) in out.iter_mut().enumerate() {
            *c = i as f64 * SECTOR_WIDTH;
        }
        out
    }
}

/// Scan the panorama at `pose`: sector `i` takes the minimum of
/// `rays_per_sector` rays spread evenly across its 30° arc.
pub fn panorama_scan(grid: &OccupancyGrid, pose: &Pose, cfg: &ScanConfig) -> Result<RangeScan> {
    pose.validate(grid)?;
    let k = cfg.rays_per_sector.max(1);
    let origin = pose.position();
    let mut readings = [0.0; SECTOR_COUNT];
    let mut half_readings = [0.0; 2 * SECTOR_COUNT];
    for i in 0..SECTOR_COUNT {
        let center = pose.heading + i as f64 * SECTOR_WIDTH;
        let mut best = cfg.max_range;
        let mut halves = [cfg.max_range; 2];
        for j in 0..k {
            // Sub-rays are centered in the arc so a 30° pose rotation maps the
            // ray fan of sector i exactly onto sector i−1.
            let frac = (j as f64 + 0.5) / k as f64 - 0.5;
            let angle = normalize_angle(center + frac * SECTOR_WIDTH);
            let d = raycast(grid, &origin, angle, cfg.max_range)?;
            if d < best {
                best = d;
            }
            // The center ray belongs to both half-fans.
            if frac <= 0.0 && d < halves[0] {
                halves[0] = d;
            }
            if frac >= 0.0 && d < halves[1] {
                halves[1] = d;
            }
        }
        readings[i] = best;
        half_readings[2 * i] = halves[0];
        half_readings[2 * i + 1] = halves[1];
    }
    Ok(RangeScan { readings, half_readings, max_range: cfg.max_range })
}
