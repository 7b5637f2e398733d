//! Versioned, line-oriented world/episode file format.
//!
//! ```text
//! wpnav-world v1
//! tool <semver>
//! digest <hex-or-dash>
//! resolution <meters-per-cell>
//! grid <width> <height>
//! row <rle>            (height lines, y = 0 first; runs like `12#3.5#`)
//! episodes <count>
//! <one JSON episode record per line>
//! ```
//!
//! Floats are written in shortest round-trip form, so load → save reproduces
//! the file byte for byte.

use super::{Episode, OccupancyGrid};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct WorldFile {
    pub tool: String,
    pub digest: String,
    pub grid: OccupancyGrid,
    pub episodes: Vec<Episode>,
}

impl WorldFile {
    pub fn new(grid: OccupancyGrid, episodes: Vec<Episode>, digest: &str) -> Self {
        WorldFile {
            tool: crate::TOOL_VERSION.to_string(),
            digest: if digest.is_empty() { "-".to_string() } else { digest.to_string() },
            grid,
            episodes,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "wpnav-world v{FORMAT_VERSION}");
        let _ = writeln!(out, "tool {}", self.tool);
        let _ = writeln!(out, "digest {}", self.digest);
        let _ = writeln!(out, "resolution {}", self.grid.resolution());
        let _ = writeln!(out, "grid {} {}", self.grid.width_cells(), self.grid.height_cells());
        for y in 0..self.grid.height_cells() {
            let _ = writeln!(out, "row {}", encode_row(&self.grid, y));
        }
        let _ = writeln!(out, "episodes {}", self.episodes.len());
        for ep in &self.episodes {
            let json = serde_json::to_string(ep).expect("episode serializes");
            let _ = writeln!(out, "{json}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, &str)> {
            lines
                .next()
                .map(|(i, l)| (i + 1, l))
                .ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {what}") })
        };

        let (ln, header) = next("header")?;
        if header != format!("wpnav-world v{FORMAT_VERSION}") {
            return Err(Error::Parse { line: ln, msg: format!("bad header {header:?}") });
        }
        let (ln, tool_line) = next("tool line")?;
        let tool = field(tool_line, "tool", ln)?.to_string();
        let (ln, digest_line) = next("digest line")?;
        let digest = field(digest_line, "digest", ln)?.to_string();
        let (ln, res_line) = next("resolution line")?;
        let resolution: f64 = parse_num(field(res_line, "resolution", ln)?, ln)?;
        let (ln, grid_line) = next("grid line")?;
        let dims = field(grid_line, "grid", ln)?;
        let mut it = dims.split_whitespace();
        let width: usize = parse_num(it.next().unwrap_or(""), ln)?;
        let height: usize = parse_num(it.next().unwrap_or(""), ln)?;

        let mut cells = vec![false; width * height];
        for y in 0..height {
            let (ln, row_line) = next("row line")?;
            let rle = field(row_line, "row", ln)?;
            let row = decode_row(rle, width, ln)?;
            cells[y * width..(y + 1) * width].copy_from_slice(&row);
        }
        let grid = OccupancyGrid::new(width, height, resolution, cells)
            .map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;

        let (ln, count_line) = next("episodes line")?;
        let count: usize = parse_num(field(count_line, "episodes", ln)?, ln)?;
        let mut episodes = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, ep_line) = next("episode record")?;
            let ep: Episode = serde_json::from_str(ep_line)
                .map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
            episodes.push(ep);
        }
        Ok(WorldFile { tool, digest, grid, episodes })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }
}

fn field<'a>(line: &'a str, key: &str, ln: usize) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::Parse { line: ln, msg: format!("expected `{key} ...`, got {line:?}") })
}

fn parse_num<T: std::str::FromStr>(s: &str, ln: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad number {s:?}") })
}

/// Run-length encode one row: `#` blocked, `.` free.
fn encode_row(grid: &OccupancyGrid, y: usize) -> String {
    let mut out = String::new();
    let mut x = 0;
    while x < grid.width_cells() {
        let blocked = grid.is_blocked(x, y);
        let mut run = 1;
        while x + run < grid.width_cells() && grid.is_blocked(x + run, y) == blocked {
            run += 1;
        }
        let _ = write!(out, "{}{}", run, if blocked { '#' } else { '.' });
        x += run;
    }
    out
}

fn decode_row(rle: &str, width: usize, ln: usize) -> Result<Vec<bool>> {
    let mut row = Vec::with_capacity(width);
    let mut count = 0usize;
    for ch in rle.chars() {
        match ch {
            '0'..='9' => count = count * 10 + (ch as usize - '0' as usize),
            '#' | '.' => {
                if count == 0 {
                    return Err(Error::Parse { line: ln, msg: "run without count".into() });
                }
                row.extend(std::iter::repeat_n(ch == '#', count));
                count = 0;
            }
            _ => return Err(Error::Parse { line: ln, msg: format!("bad rle char {ch:?}") }),
        }
    }
    if row.len() != width || count != 0 {
        return Err(Error::Parse { line: ln, msg: format!("row length {} != {width}", row.len()) });
    }
    Ok(row)
}
