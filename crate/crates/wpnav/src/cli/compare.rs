//! `compare`: merge evaluation summaries into one expressivity table.

use super::evaluate::EvalSummary;
use crate::actionspace::ExpressivityConfig;
use crate::error::Result;
use crate::TOOL_VERSION;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One table row, parsed back from a summary JSON.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub path: PathBuf,
    pub summary: EvalSummary,
}

/// Build the comparison table CSV: one row per (expressivity, navigator),
/// columns mirroring the per-episode metric order plus commands-per-episode
/// and average speed (TL/EET). Unreadable summaries are skipped with a
/// warning. Returns the CSV text (also written to `out` when given).
pub fn compare_cmd(summaries: &[PathBuf], out: Option<&Path>, force: bool) -> Result<String> {
    let mut rows: Vec<RunSummary> = Vec::new();
    for path in summaries {
        match load_summary(path) {
            Ok(summary) => rows.push(RunSummary { path: path.clone(), summary }),
            Err(e) => eprintln!("warning: skipping {}: {e}", path.display()),
        }
    }
    // Spectrum order first, then navigator, then path for stability.
    let spectrum: Vec<&str> = ExpressivityConfig::spectrum().iter().map(|e| e.code()).collect();
    let rank = |code: &str| spectrum.iter().position(|c| *c == code).unwrap_or(usize::MAX);
    rows.sort_by(|a, b| {
        rank(&a.summary.expressivity)
            .cmp(&rank(&b.summary.expressivity))
            .then_with(|| a.summary.navigator.code().cmp(b.summary.navigator.code()))
            .then_with(|| a.path.cmp(&b.path))
    });

    let mut csv = String::new();
    let _ = writeln!(csv, "# tool={TOOL_VERSION}");
    let _ = writeln!(
        csv,
        "model,navigator,TL,NE,OS,SR,SPL,EET,SCT,commands_per_episode,speed,episodes,digest"
    );
    for row in &rows {
        let s = &row.summary;
        let a = &s.aggregates;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.expressivity,
            s.navigator.code(),
            a.tl,
            a.ne,
            a.os,
            a.sr,
            a.spl,
            a.eet,
            a.sct,
            a.commands_per_episode,
            a.speed,
            s.n_episodes,
            s.digest
        );
    }
    if let Some(path) = out {
        super::guard_overwrite(path, force)?;
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(path, &csv)?;
    }
    Ok(csv)
}

fn load_summary(path: &Path) -> Result<EvalSummary> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| crate::error::Error::Parse { line: 0, msg: e.to_string() })
}

/// Commands-per-episode ratio between two summaries (e.g. a fixed-distance
/// model against the waypoint model on matched episodes).
pub fn command_ratio(a: &EvalSummary, b: &EvalSummary) -> f64 {
    a.aggregates.commands_per_episode / b.aggregates.commands_per_episode
}
