//! `evaluate`: greedy rollout of a checkpoint over episode files, producing a
//! metrics CSV, a trajectory log, and a machine-readable summary.

use super::{guard_overwrite, ExperimentConfig};
use crate::error::{Error, Result};
use crate::metrics::{
    attach_time_metrics, minimal_time_lattice, vln_metrics, DistanceMode, MetricsReport,
    OracleTime,
};
use crate::policy::{load_checkpoint, Policy};
use crate::trainer::{run_episode, NavigatorKind, WaypointMark};
use crate::world::{ScanConfig, WorldFile};
use crate::TOOL_VERSION;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub navigator: NavigatorKind,
    pub with_sct: bool,
    pub allow_digest_mismatch: bool,
    /// Cap on evaluated episodes (0 = all).
    pub max_episodes: usize,
}

#[derive(Debug, Clone)]
pub struct EvalArtifacts {
    pub metrics_csv: PathBuf,
    pub trajectories: PathBuf,
    pub summary: PathBuf,
    pub rows: Vec<MetricsReport>,
    pub episode_ids: Vec<String>,
}

/// One rendered-trajectory record (JSON line).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub episode_id: String,
    pub success: bool,
    pub timed_out: bool,
    pub collisions: usize,
    pub path: Vec<[f64; 2]>,
    pub waypoints: Vec<WaypointMark>,
    /// Command stream in `R <deg>` / `T <m>` / `S` log form.
    pub commands: String,
    pub final_pose: [f64; 3],
    pub predicted_distances: Vec<f64>,
}

/// Aggregate block of the summary JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryAggregates {
    pub tl: f64,
    pub ne: f64,
    pub os: f64,
    pub sr: f64,
    pub spl: f64,
    pub eet: f64,
    pub sct: f64,
    pub commands_per_episode: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalSummary {
    pub tool: String,
    pub digest: String,
    pub expressivity: String,
    pub navigator: NavigatorKind,
    pub with_sct: bool,
    pub n_episodes: usize,
    pub episode_ids: Vec<String>,
    pub aggregates: SummaryAggregates,
}

pub fn evaluate_cmd(
    cfg: &ExperimentConfig,
    checkpoint: &Path,
    episode_files: &[PathBuf],
    opts: &EvalOptions,
    out_dir: &Path,
    force: bool,
) -> Result<EvalArtifacts> {
    let digest = cfg.digest();
    let (params, _) = load_checkpoint(checkpoint, Some(&digest), opts.allow_digest_mismatch)?;
    let policy = Policy::from_params(&cfg.policy_config(), params)?;
    let scan_cfg =
        ScanConfig { rays_per_sector: cfg.policy.rays_per_sector, max_range: cfg.policy.max_range };

    // Load episodes with their (marker-applied) grids.
    let mut work = Vec::new();
    for file in episode_files {
        let wf = WorldFile::load(file)?;
        if wf.digest != digest && wf.digest != "-" && !opts.allow_digest_mismatch {
            return Err(Error::DigestMismatch { expected: digest, found: wf.digest });
        }
        let base = Arc::new(wf.grid);
        for ep in wf.episodes {
            let marked = Arc::new(ep.apply_marker(&base)?);
            work.push((marked, Arc::new(ep)));
            if opts.max_episodes > 0 && work.len() >= opts.max_episodes {
                break;
            }
        }
        if opts.max_episodes > 0 && work.len() >= opts.max_episodes {
            break;
        }
    }

    std::fs::create_dir_all(out_dir)?;
    let metrics_path = out_dir.join("metrics.csv");
    let traj_path = out_dir.join("trajectories.jsonl");
    let summary_path = out_dir.join("summary.json");
    for p in [&metrics_path, &traj_path, &summary_path] {
        guard_overwrite(p, force)?;
    }

    if work.is_empty() {
        eprintln!("warning: no episodes to evaluate; writing header-only outputs");
    }

    // Evaluate episodes in parallel (pure per-episode work), in input order.
    let results: Vec<Result<(MetricsReport, TrajectoryRecord)>> = work
        .par_iter()
        .map(|(grid, ep)| -> Result<(MetricsReport, TrajectoryRecord)> {
            let run = run_episode(&policy, grid, ep, opts.navigator, &scan_cfg, &cfg.ppo)?;
            let result = run.to_result();
            let mut row = vln_metrics(&result, grid, DistanceMode::Geodesic)?;
            let oracle: Option<OracleTime> = if opts.with_sct {
                Some(minimal_time_lattice(grid, &ep.start, &ep.goal, &cfg.motion_model)?)
            } else {
                None
            };
            attach_time_metrics(&mut row, &result, oracle.as_ref(), &cfg.motion_model)?;
            let record = TrajectoryRecord {
                episode_id: ep.id.clone(),
                success: run.success,
                timed_out: run.timed_out,
                collisions: run.collisions,
                path: run.path.iter().map(|p| [p.x, p.y]).collect(),
                waypoints: run.waypoints.clone(),
                commands: crate::navigators::write_command_log(&run.commands),
                final_pose: [run.final_pose.x, run.final_pose.y, run.final_pose.heading],
                predicted_distances: run.predicted_distances.clone(),
            };
            Ok((row, record))
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut records = Vec::with_capacity(results.len());
    for r in results {
        let (row, record) = r?;
        rows.push(row);
        records.push(record);
    }

    // metrics.csv: exact column order, one row per episode.
    let mut csv = String::new();
    csv.push_str(&format!("# tool={TOOL_VERSION} digest={digest}\n"));
    csv.push_str(MetricsReport::CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv_row());
        csv.push('\n');
    }
    std::fs::write(&metrics_path, csv)?;

    // trajectories.jsonl: meta line then one record per episode.
    let mut traj = std::io::BufWriter::new(std::fs::File::create(&traj_path)?);
    writeln!(traj, "{}", serde_json::json!({ "tool": TOOL_VERSION, "digest": digest }))?;
    for record in &records {
        writeln!(traj, "{}", serde_json::to_string(record).expect("record serializes"))?;
    }
    traj.into_inner().map_err(|e| Error::Io(e.into_error()))?;

    // summary.json: aggregates plus episode ids (row order matches the CSV).
    let n = rows.len().max(1) as f64;
    let mean = |f: &dyn Fn(&MetricsReport) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let aggregates = SummaryAggregates {
        tl: mean(&|r| r.tl),
        ne: mean(&|r| r.ne),
        os: mean(&|r| r.os as f64),
        sr: mean(&|r| r.sr as f64),
        spl: mean(&|r| r.spl),
        eet: mean(&|r| r.eet),
        sct: mean(&|r| r.sct),
        commands_per_episode: mean(&|r| r.n_commands as f64),
        speed: mean(&|r| r.speed),
    };
    let summary = EvalSummary {
        tool: TOOL_VERSION.to_string(),
        digest: digest.clone(),
        expressivity: cfg.expressivity.code().to_string(),
        navigator: opts.navigator,
        with_sct: opts.with_sct,
        n_episodes: rows.len(),
        episode_ids: records.iter().map(|r| r.episode_id.clone()).collect(),
        aggregates,
    };
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary).expect("summary"))?;

    Ok(EvalArtifacts {
        metrics_csv: metrics_path,
        trajectories: traj_path,
        summary: summary_path,
        rows,
        episode_ids: records.into_iter().map(|r| r.episode_id).collect(),
    })
}
