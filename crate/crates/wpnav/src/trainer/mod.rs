//! PPO training of the waypoint policy: rollout collection, GAE, clipped
//! updates with decomposed entropy, checkpointing, and SPL-based selection on
//! held-out worlds.

mod adam;
mod config;
mod env;
mod gae;
mod losses;
mod reward;
mod rollout;

pub use adam::{clip_global_norm, Adam};
pub use config::PPOConfig;
pub use env::{derive_env_seed, EnvConfig, NavigatorKind, Observation, StepOutcome, VlnEnv};
pub use gae::{gae, normalize_advantages};
pub use losses::{ppo_losses, replay_logprobs, vanilla_pg_grads, ChainSlice, LossStats, ParamGrads};
pub use reward::step_reward;
pub use rollout::{collect_rollouts, EnvRunner, RolloutBuffer, Transition};

use crate::actionspace::{compose_waypoint, WaypointAction};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::metrics::{vln_metrics, DistanceMode, EpisodeResult};
use crate::navigators::Command;
use crate::policy::{save_checkpoint, Policy, PolicyConfig, PolicyState};
use crate::world::{
    generate_episode, generate_world, panorama_scan, DistanceField, Episode, EpisodeParams,
    OccupancyGrid, Pose, ScanConfig, WorldParams,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

/// One waypoint decision in a replayed episode, for rendering and statistics.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct WaypointMark {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub r: f64,
    pub theta: f64,
}

/// A full greedy episode rollout.
#[derive(Debug, Clone)]
pub struct EpisodeRun {
    pub episode: Arc<Episode>,
    pub success: bool,
    pub timed_out: bool,
    pub collisions: usize,
    pub path: Vec<Point>,
    pub commands: Vec<Command>,
    pub final_pose: Pose,
    pub waypoints: Vec<WaypointMark>,
    pub predicted_distances: Vec<f64>,
}

impl EpisodeRun {
    pub fn to_result(&self) -> EpisodeResult {
        EpisodeResult {
            success: self.success,
            path: self.path.clone(),
            commands: self.commands.clone(),
            final_position: self.final_pose.position(),
            episode: self.episode.clone(),
        }
    }
}

/// Run one episode with greedy (mode) actions until STOP or the step cap.
pub fn run_episode(
    policy: &Policy,
    grid: &OccupancyGrid,
    episode: &Arc<Episode>,
    navigator: NavigatorKind,
    scan_cfg: &ScanConfig,
    ppo: &PPOConfig,
) -> Result<EpisodeRun> {
    let goal_field = DistanceField::from_point(grid, &episode.goal)?;
    let mut pose = episode.start;
    let mut state = PolicyState::initial(&policy.cfg);
    let mut path = vec![pose.position()];
    let mut commands = Vec::new();
    let mut waypoints = Vec::new();
    let mut predicted_distances = Vec::new();
    let mut collisions = 0;
    let mut success = false;
    let mut timed_out = true;

    for _ in 0..ppo.episode_step_cap {
        let scan = panorama_scan(grid, &pose, scan_cfg)?;
        let eval = policy.evaluate(&scan, &episode.instruction, &state)?;
        let action = eval.heads.mode_action();
        match action {
            WaypointAction::Stop => {
                commands.push(Command::Stop);
                success = goal_field.at_point(grid, &pose.position()) <= ppo.success_distance;
                timed_out = false;
                break;
            }
            WaypointAction::Move { distance, .. } => {
                let (r, theta) = compose_waypoint(&action)?;
                waypoints.push(WaypointMark {
                    x: pose.x,
                    y: pose.y,
                    heading: pose.heading,
                    r,
                    theta,
                });
                predicted_distances.push(distance);
                let outcome = navigator.navigate(grid, &pose, r, theta)?;
                if outcome.collided {
                    collisions += 1;
                }
                commands.extend_from_slice(&outcome.commands);
                path.extend_from_slice(&outcome.path[1..]);
                pose = outcome.final_pose;
                state = policy.next_state(&eval, &action);
            }
        }
    }

    Ok(EpisodeRun {
        episode: episode.clone(),
        success,
        timed_out,
        collisions,
        path,
        commands,
        final_pose: pose,
        waypoints,
        predicted_distances,
    })
}

/// Deterministically generate an evaluation set over a pool of world seeds;
/// stored grids already carry each episode's goal marker.
pub fn make_eval_set(
    world_params: &WorldParams,
    world_seeds: &[u64],
    episode_params: &EpisodeParams,
    count: usize,
    salt: u64,
) -> Result<Vec<(Arc<OccupancyGrid>, Arc<Episode>)>> {
    if world_seeds.is_empty() {
        return Err(Error::Config("evaluation needs at least one world seed".into()));
    }
    let worlds: Vec<Arc<OccupancyGrid>> = world_seeds
        .iter()
        .map(|&s| generate_world(s, world_params).map(Arc::new))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let base = &worlds[i % worlds.len()];
        let mut made = None;
        for attempt in 0..50u64 {
            let seed = derive_env_seed(salt ^ 0xE7A1, i + attempt as usize * 7919);
            if let Ok(ep) = generate_episode(base, seed, episode_params) {
                let marked = Arc::new(ep.apply_marker(base)?);
                made = Some((marked, Arc::new(ep)));
                break;
            }
        }
        out.push(
            made.ok_or_else(|| Error::Sampling(format!("could not sample evaluation episode {i}")))?,
        );
    }
    Ok(out)
}

/// Greedy evaluation over a set: returns (success rate, mean SPL, runs).
pub fn evaluate_greedy(
    policy: &Policy,
    eval_set: &[(Arc<OccupancyGrid>, Arc<Episode>)],
    navigator: NavigatorKind,
    scan_cfg: &ScanConfig,
    ppo: &PPOConfig,
) -> Result<(f64, f64, Vec<EpisodeRun>)> {
    let runs: Vec<Result<EpisodeRun>> = eval_set
        .par_iter()
        .map(|(grid, ep)| run_episode(policy, grid, ep, navigator, scan_cfg, ppo))
        .collect();
    let mut out = Vec::with_capacity(runs.len());
    let mut sr_sum = 0.0;
    let mut spl_sum = 0.0;
    for run in runs {
        let run = run?;
        let (grid, _) = &eval_set[out.len()];
        let report = vln_metrics(&run.to_result(), grid, DistanceMode::Geodesic)?;
        sr_sum += report.sr as f64;
        spl_sum += report.spl;
        out.push(run);
    }
    let n = out.len().max(1) as f64;
    Ok((sr_sum / n, spl_sum / n, out))
}

#[derive(Debug, Clone)]
pub struct TrainParams {
    pub ppo: PPOConfig,
    pub policy: PolicyConfig,
    pub world_params: WorldParams,
    pub episode_params: EpisodeParams,
    pub navigator: NavigatorKind,
    pub train_world_seeds: Vec<u64>,
    pub val_world_seeds: Vec<u64>,
    pub run_seed: u64,
    pub total_env_steps: u64,
    /// Evaluate every this many env steps (0 disables periodic evaluation).
    pub eval_every_steps: u64,
    pub eval_episodes: usize,
    /// Stop early once held-out SR reaches this value.
    pub target_sr: Option<f64>,
    pub out_dir: PathBuf,
    pub digest: String,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub updates: u64,
    pub env_steps: u64,
    pub best_spl: f64,
    pub best_sr: f64,
    pub best_checkpoint: PathBuf,
    pub latest_checkpoint: PathBuf,
    pub log_path: PathBuf,
    /// Env steps at which the target SR was first reached.
    pub reached_target_at: Option<u64>,
}

/// The training loop: collect → GAE → clipped minibatch updates, with
/// periodic greedy evaluation on held-out worlds and best-SPL checkpointing.
/// Aborts on non-finite losses, preserving the latest checkpoint.
pub fn train(params: &TrainParams) -> Result<TrainOutcome> {
    for s in &params.train_world_seeds {
        if params.val_world_seeds.contains(s) {
            return Err(Error::Config(format!("world seed {s} appears in both train and val")));
        }
    }
    std::fs::create_dir_all(&params.out_dir)?;
    let ppo = params.ppo;
    let scan_cfg = ScanConfig {
        rays_per_sector: params.policy.rays_per_sector,
        max_range: params.policy.max_range,
    };

    let worlds: Vec<Arc<OccupancyGrid>> = params
        .train_world_seeds
        .iter()
        .map(|&s| generate_world(s, &params.world_params).map(Arc::new))
        .collect::<Result<_>>()?;
    let env_cfg = Arc::new(EnvConfig {
        worlds,
        episode_params: params.episode_params.clone(),
        navigator: params.navigator,
        scan: scan_cfg,
    });

    let mut policy = Policy::new(&params.policy, params.run_seed);
    let mut runners: Vec<EnvRunner> = (0..ppo.n_envs)
        .map(|i| -> Result<EnvRunner> {
            Ok(EnvRunner {
                env: VlnEnv::new(env_cfg.clone(), i, ppo.n_envs, params.run_seed)?,
                state: PolicyState::initial(&policy.cfg),
                rng: ChaCha8Rng::seed_from_u64(derive_env_seed(params.run_seed ^ 0x53414d50, i)),
            })
        })
        .collect::<Result<_>>()?;
    let mut adam = Adam::new(&policy.params, ppo.learning_rate, ppo.adam_epsilon);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(params.run_seed ^ 0x4d425348);

    let eval_set = if params.eval_every_steps > 0 && params.eval_episodes > 0 {
        make_eval_set(
            &params.world_params,
            &params.val_world_seeds,
            &params.episode_params,
            params.eval_episodes,
            params.run_seed,
        )?
    } else {
        Vec::new()
    };

    let log_path = params.out_dir.join("train_log.csv");
    let mut log = std::io::BufWriter::new(std::fs::File::create(&log_path)?);
    writeln!(
        log,
        "update,env_steps,l_action,l_value,s_pano,s_offset,s_dist,l_offset,l_total,grad_norm,mean_pred_dist,eval_sr,eval_spl"
    )?;

    let best_path = params.out_dir.join("best.ckpt");
    let latest_path = params.out_dir.join("latest.ckpt");
    let mut best_spl = f64::NEG_INFINITY;
    let mut best_sr = 0.0;
    let mut best_saved = false;
    let mut updates: u64 = 0;
    let mut env_steps: u64 = 0;
    let mut next_eval = params.eval_every_steps;
    let mut reached_target_at = None;

    let group_size = ppo.n_envs.div_ceil(ppo.minibatches.max(1)).max(1);

    'outer: while env_steps < params.total_env_steps {
        let buffer = collect_rollouts(&mut runners, &policy, &ppo)?;
        env_steps += buffer.total_steps() as u64;

        // GAE per chain, then one normalization across the update batch.
        let mut advantages: Vec<Vec<f64>> = Vec::with_capacity(buffer.per_env.len());
        let mut returns: Vec<Vec<f64>> = Vec::with_capacity(buffer.per_env.len());
        for (chain, &bootstrap) in buffer.per_env.iter().zip(&buffer.bootstrap) {
            let rewards: Vec<f64> = chain.iter().map(|t| t.reward).collect();
            let values: Vec<f64> = chain.iter().map(|t| t.value).collect();
            let dones: Vec<bool> = chain.iter().map(|t| t.done).collect();
            let (adv, ret) = gae(&rewards, &values, &dones, bootstrap, ppo.gamma, ppo.tau)?;
            advantages.push(adv);
            returns.push(ret);
        }
        let mut flat: Vec<f64> = advantages.iter().flatten().copied().collect();
        normalize_advantages(&mut flat, 1e-8);
        let mut cursor = 0;
        for adv in &mut advantages {
            let n = adv.len();
            adv.copy_from_slice(&flat[cursor..cursor + n]);
            cursor += n;
        }

        let mut stat_acc = LossStats::default();
        let mut norm_acc = 0.0;
        let mut n_batches = 0;
        for _epoch in 0..ppo.ppo_epochs {
            let mut order: Vec<usize> = (0..buffer.per_env.len()).collect();
            order.shuffle(&mut shuffle_rng);
            for group in order.chunks(group_size) {
                let minibatch: Vec<ChainSlice> = group
                    .iter()
                    .map(|&e| ChainSlice {
                        transitions: &buffer.per_env[e],
                        advantages: &advantages[e],
                        returns: &returns[e],
                    })
                    .collect();
                let (stats, mut grads) = match ppo_losses(&policy, &minibatch, &ppo) {
                    Ok(x) => x,
                    Err(e) => {
                        // Preserve the last good parameters before aborting.
                        save_checkpoint(&latest_path, &policy.params, &params.digest)?;
                        return Err(e);
                    }
                };
                let norm = clip_global_norm(&mut grads, ppo.max_grad_norm);
                adam.step(&mut policy.params, &grads);
                stat_acc.action += stats.action;
                stat_acc.value += stats.value;
                stat_acc.s_pano += stats.s_pano;
                stat_acc.s_offset += stats.s_offset;
                stat_acc.s_dist += stats.s_dist;
                stat_acc.offset_reg += stats.offset_reg;
                stat_acc.total += stats.total;
                stat_acc.mean_predicted_distance += stats.mean_predicted_distance;
                norm_acc += norm;
                n_batches += 1;
            }
        }
        updates += 1;
        let nb = n_batches.max(1) as f64;

        let mut eval_cells = (String::new(), String::new());
        if !eval_set.is_empty() && env_steps >= next_eval {
            next_eval += params.eval_every_steps;
            let (sr, spl, _) =
                evaluate_greedy(&policy, &eval_set, params.navigator, &scan_cfg, &ppo)?;
            eval_cells = (format!("{sr}"), format!("{spl}"));
            if spl > best_spl {
                best_spl = spl;
                best_sr = sr;
                save_checkpoint(&best_path, &policy.params, &params.digest)?;
                best_saved = true;
            }
            save_checkpoint(&latest_path, &policy.params, &params.digest)?;
            if let Some(target) = params.target_sr {
                if sr >= target {
                    reached_target_at = Some(env_steps);
                    write_log_row(&mut log, updates, env_steps, &stat_acc, nb, norm_acc, &eval_cells)?;
                    break 'outer;
                }
            }
        }
        write_log_row(&mut log, updates, env_steps, &stat_acc, nb, norm_acc, &eval_cells)?;
    }

    save_checkpoint(&latest_path, &policy.params, &params.digest)?;
    if !best_saved {
        save_checkpoint(&best_path, &policy.params, &params.digest)?;
        best_spl = 0.0;
    }
    log.flush()?;
    Ok(TrainOutcome {
        updates,
        env_steps,
        best_spl: best_spl.max(0.0),
        best_sr,
        best_checkpoint: best_path,
        latest_checkpoint: latest_path,
        log_path,
        reached_target_at,
    })
}

#[allow(clippy::too_many_arguments)]
fn write_log_row(
    log: &mut impl std::io::Write,
    updates: u64,
    env_steps: u64,
    acc: &LossStats,
    nb: f64,
    norm_acc: f64,
    eval_cells: &(String, String),
) -> Result<()> {
    writeln!(
        log,
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        updates,
        env_steps,
        acc.action / nb,
        acc.value / nb,
        acc.s_pano / nb,
        acc.s_offset / nb,
        acc.s_dist / nb,
        acc.offset_reg / nb,
        acc.total / nb,
        norm_acc / nb,
        acc.mean_predicted_distance / nb,
        eval_cells.0,
        eval_cells.1
    )?;
    Ok(())
}
