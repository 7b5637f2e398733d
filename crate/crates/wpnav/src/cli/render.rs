//! `render`: draw one evaluated episode as a deterministic SVG map.
//!
//! Free space is gray, blocked cells dark, the start square blue, the goal
//! square red; the traversed path is drawn as a polyline with one heading
//! marker per waypoint decision.

use super::evaluate::TrajectoryRecord;
use super::guard_overwrite;
use crate::error::{Error, Result};
use crate::world::{OccupancyGrid, WorldFile};
use crate::TOOL_VERSION;
use std::fmt::Write as _;
use std::path::Path;

const SCALE: f64 = 40.0; // pixels per meter

pub fn render_cmd(
    world_file: &Path,
    trajectories: &Path,
    episode_id: Option<&str>,
    out: &Path,
    force: bool,
) -> Result<()> {
    guard_overwrite(out, force)?;
    let wf = WorldFile::load(world_file)?;
    let record = load_record(trajectories, episode_id)?;
    let episode = wf
        .episodes
        .iter()
        .find(|e| e.id == record.episode_id)
        .ok_or_else(|| Error::Config(format!("episode {} not in world file", record.episode_id)))?;
    let grid = episode.apply_marker(&wf.grid)?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let svg = render_svg(&grid, episode, &record, &wf.digest);
    std::fs::write(out, svg)?;
    Ok(())
}

fn load_record(path: &Path, episode_id: Option<&str>) -> Result<TrajectoryRecord> {
    let text = std::fs::read_to_string(path)?;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        // The first line is a meta record without an episode id.
        if i == 0 && line.contains("\"tool\"") && !line.contains("episode_id") {
            continue;
        }
        let record: TrajectoryRecord = serde_json::from_str(line)
            .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        match episode_id {
            Some(id) if record.episode_id != id => continue,
            _ => return Ok(record),
        }
    }
    Err(Error::Parse {
        line: 0,
        msg: match episode_id {
            Some(id) => format!("episode {id} not found in trajectory log"),
            None => "trajectory log holds no episodes".into(),
        },
    })
}

fn px(v: f64) -> String {
    format!("{:.3}", v * SCALE)
}

fn render_svg(
    grid: &OccupancyGrid,
    episode: &crate::world::Episode,
    record: &TrajectoryRecord,
    digest: &str,
) -> String {
    let (w, h) = (grid.width_m(), grid.height_m());
    let res = grid.resolution();
    // SVG y grows downward; the world is flipped so +y points up.
    let flip = |y: f64| h - y;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        px(w),
        px(h),
        px(w),
        px(h)
    );
    let _ = writeln!(svg, "<!-- wpnav {TOOL_VERSION} digest {digest} episode {} -->", record.episode_id);
    // Blocked background, then free cells in gray, merged into row runs.
    let _ = writeln!(svg, r##"<rect x="0" y="0" width="{}" height="{}" fill="#2b2b2b"/>"##, px(w), px(h));
    for cy in 0..grid.height_cells() {
        let mut cx = 0;
        while cx < grid.width_cells() {
            if grid.is_blocked(cx, cy) {
                cx += 1;
                continue;
            }
            let mut run = 1;
            while cx + run < grid.width_cells() && !grid.is_blocked(cx + run, cy) {
                run += 1;
            }
            let x0 = cx as f64 * res;
            let y0 = flip((cy + 1) as f64 * res);
            let _ = writeln!(
                svg,
                r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#c8c8c8"/>"##,
                px(x0),
                px(y0),
                px(run as f64 * res),
                px(res)
            );
            cx += run;
        }
    }
    // Traversed path.
    if record.path.len() > 1 {
        let points: Vec<String> = record
            .path
            .iter()
            .map(|p| format!("{},{}", px(p[0]), px(flip(p[1]))))
            .collect();
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="#e07b28" stroke-width="2"/>"##,
            points.join(" ")
        );
    }
    // Waypoint markers with heading ticks.
    for wp in &record.waypoints {
        let (x, y) = (wp.x, flip(wp.y));
        let hx = wp.x + 0.22 * (wp.heading + wp.theta).cos();
        let hy = flip(wp.y + 0.22 * (wp.heading + wp.theta).sin());
        let _ = writeln!(
            svg,
            r##"<circle cx="{}" cy="{}" r="3" fill="#2a6fdb" fill-opacity="0.8"/>"##,
            px(x),
            px(y)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#2a6fdb" stroke-width="1.5"/>"##,
            px(x),
            px(y),
            px(hx),
            px(hy)
        );
    }
    // Start square blue, goal square red.
    let square = |svg: &mut String, x: f64, y: f64, color: &str| {
        let s = 0.22;
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{color}"/>"#,
            px(x - s / 2.0),
            px(flip(y) - s / 2.0),
            px(s),
            px(s)
        );
    };
    square(&mut svg, episode.start.x, episode.start.y, "#1f4fd0");
    square(&mut svg, episode.goal.x, episode.goal.y, "#d03030");
    svg.push_str("</svg>\n");
    svg
}
