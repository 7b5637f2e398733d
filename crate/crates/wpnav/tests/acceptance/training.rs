//! Acceptance criteria 6-8: end-to-end learning, directional expressivity
//! findings, and the navigator-swap harness. The two trained policies are
//! built once and shared across criteria.

use super::common::{curriculum_episode_params, curriculum_world_params};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;
use wpnav::actionspace::ExpressivityConfig;
use wpnav::cli::compare_cmd;
use wpnav::cli::{evaluate_cmd, EvalOptions, ExperimentConfig, SeedsSection};
use wpnav::metrics::{attach_time_metrics, vln_metrics, DistanceMode, MotionModel};
use wpnav::policy::{load_checkpoint, Policy, PolicyConfig};
use wpnav::trainer::{
    evaluate_greedy, make_eval_set, train, NavigatorKind, PPOConfig, TrainParams,
};
use wpnav::world::{Episode, OccupancyGrid, ScanConfig};

/// Training budget per model. The criterion's bound is 500k env steps; early
/// stopping on held-out SR usually ends far sooner.
const STEP_BUDGET: u64 = 500_000;
/// Early-stop threshold on the internal validation set, above the criterion's
/// 0.9 so the fresh 200-episode confirmation has margin.
const VAL_TARGET: f64 = 0.93;

pub struct Trained {
    pub policy: Policy,
    pub policy_cfg: PolicyConfig,
    pub ppo: PPOConfig,
    pub env_steps: u64,
    pub reached_target_at: Option<u64>,
    pub out_dir: PathBuf,
    pub best_checkpoint: PathBuf,
}

fn acceptance_ppo() -> PPOConfig {
    // Table hyperparameters with the desk success distance; 16 parallel envs
    // stand in for the multi-GPU worker pool behind the shared settings
    // (per-update batch 256 steps instead of the distributed thousands).
    PPOConfig { n_envs: 16, success_distance: 0.5, ..PPOConfig::default() }
}

fn train_model(expressivity: ExpressivityConfig, run_seed: u64, target: Option<f64>) -> Trained {
    let out_dir = std::env::temp_dir().join(format!(
        "wpnav-acceptance-{}-{run_seed}-{}",
        expressivity.code(),
        std::process::id()
    ));
    let policy_cfg = PolicyConfig { expressivity, ..PolicyConfig::default() };
    let params = TrainParams {
        ppo: acceptance_ppo(),
        policy: policy_cfg,
        world_params: curriculum_world_params(false),
        episode_params: curriculum_episode_params(),
        navigator: NavigatorKind::Continuous,
        train_world_seeds: (0..8).collect(),
        val_world_seeds: (100..104).collect(),
        run_seed,
        total_env_steps: STEP_BUDGET,
        eval_every_steps: 16_384,
        eval_episodes: 100,
        target_sr: target,
        out_dir: out_dir.clone(),
        digest: format!("acceptance-{}", expressivity.code()),
    };
    let outcome = train(&params).expect("training runs");
    let (ckpt, _) = load_checkpoint(&outcome.best_checkpoint, None, true).expect("checkpoint");
    let policy = Policy::from_params(&policy_cfg, ckpt).expect("checkpoint matches config");
    Trained {
        policy,
        policy_cfg,
        ppo: params.ppo,
        env_steps: outcome.env_steps,
        reached_target_at: outcome.reached_target_at,
        out_dir,
        best_checkpoint: outcome.best_checkpoint,
    }
}

fn wpn() -> &'static Trained {
    static CELL: OnceLock<Trained> = OnceLock::new();
    static GUARD: Mutex<()> = Mutex::new(());
    let _guard = GUARD.lock().unwrap();
    CELL.get_or_init(|| train_model(ExpressivityConfig::wpn(), 1, Some(VAL_TARGET)))
}

fn hpn() -> &'static Trained {
    static CELL: OnceLock<Trained> = OnceLock::new();
    static GUARD: Mutex<()> = Mutex::new(());
    let _guard = GUARD.lock().unwrap();
    CELL.get_or_init(|| train_model(ExpressivityConfig::hpn(), 2, Some(VAL_TARGET)))
}

/// Fresh held-out episodes spanning empty to sparse worlds, disjoint from the
/// training and validation seed pools.
fn heldout_episodes(count: usize) -> Vec<(Arc<OccupancyGrid>, Arc<Episode>)> {
    let per_style = count / 2;
    let mut set = make_eval_set(
        &curriculum_world_params(false),
        &[500, 501, 502],
        &curriculum_episode_params(),
        per_style,
        4242,
    )
    .expect("empty-world eval set");
    set.extend(
        make_eval_set(
            &curriculum_world_params(true),
            &[600, 601, 602],
            &curriculum_episode_params(),
            count - per_style,
            4243,
        )
        .expect("sparse-world eval set"),
    );
    set
}

#[test]
fn criterion_6_end_to_end_learning() {
    let t0 = Instant::now();
    let trained = wpn();
    assert!(
        trained.reached_target_at.is_some(),
        "WPN did not reach {VAL_TARGET} held-out SR within {STEP_BUDGET} env steps"
    );
    let at = trained.reached_target_at.unwrap();
    assert!(at <= 500_000, "target reached only after {at} env steps");

    // Independent confirmation on 200 fresh held-out episodes.
    let eval_set = heldout_episodes(200);
    let (sr, spl, _) = evaluate_greedy(
        &trained.policy,
        &eval_set,
        NavigatorKind::Continuous,
        &ScanConfig::default(),
        &trained.ppo,
    )
    .unwrap();
    assert!(sr >= 0.9, "held-out SR {sr:.3} < 0.9 on 200 episodes");
    println!(
        "PASS criterion 6: WPN reached {VAL_TARGET} val SR at {at} env steps; fresh 200-episode SR {sr:.3}, SPL {spl:.3} ({:.0}s)",
        t0.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_7_directional_expressivity() {
    let t0 = Instant::now();
    let wpn = wpn();
    let hpn = hpn();
    let eval_set = heldout_episodes(120);
    let scan_cfg = ScanConfig::default();
    let model = MotionModel::default();

    let evaluate = |t: &Trained| {
        let (sr, _, runs) =
            evaluate_greedy(&t.policy, &eval_set, NavigatorKind::Continuous, &scan_cfg, &t.ppo)
                .unwrap();
        let mut rows = Vec::new();
        for ((grid, _), run) in eval_set.iter().zip(&runs) {
            let result = run.to_result();
            let mut row = vln_metrics(&result, grid, DistanceMode::Geodesic).unwrap();
            attach_time_metrics(&mut row, &result, None, &model).unwrap();
            rows.push(row);
        }
        (sr, rows)
    };
    let (wpn_sr, wpn_rows) = evaluate(wpn);
    let (hpn_sr, hpn_rows) = evaluate(hpn);

    // (a) Fixed-distance command counts at least double the waypoint model's.
    let mean_cmds = |rows: &[wpnav::metrics::MetricsReport]| {
        rows.iter().map(|r| r.n_commands as f64).sum::<f64>() / rows.len() as f64
    };
    let (wpn_cmds, hpn_cmds) = (mean_cmds(&wpn_rows), mean_cmds(&hpn_rows));
    assert!(
        hpn_cmds >= 2.0 * wpn_cmds,
        "command ratio {:.2} below 2 (HPN {hpn_cmds:.1} vs WPN {wpn_cmds:.1})",
        hpn_cmds / wpn_cmds
    );

    // (b) WPN executes faster on episodes both models complete.
    let mut wpn_eet = 0.0;
    let mut hpn_eet = 0.0;
    let mut both = 0;
    for (w, h) in wpn_rows.iter().zip(&hpn_rows) {
        if w.sr == 1 && h.sr == 1 {
            wpn_eet += w.eet;
            hpn_eet += h.eet;
            both += 1;
        }
    }
    assert!(both >= 20, "only {both} episodes solved by both models");
    assert!(
        wpn_eet <= 0.75 * hpn_eet,
        "WPN EET {:.1}s not <= 0.75x HPN EET {:.1}s over {both} shared successes",
        wpn_eet / both as f64,
        hpn_eet / both as f64
    );
    println!(
        "PASS criterion 7: commands/episode HPN {hpn_cmds:.1} vs WPN {wpn_cmds:.1} (x{:.2}); EET ratio {:.2} over {both} shared successes (SR {wpn_sr:.2}/{hpn_sr:.2}) ({:.0}s)",
        hpn_cmds / wpn_cmds,
        wpn_eet / hpn_eet,
        t0.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_8_navigator_swap_harness() {
    let t0 = Instant::now();
    let trained = wpn();

    // Drive the CLI evaluation path end to end: same checkpoint under CN and
    // DN, then the paired comparison table.
    let cfg = ExperimentConfig {
        world: curriculum_world_params(false),
        episode: curriculum_episode_params(),
        ppo: trained.ppo,
        seeds: SeedsSection {
            train_worlds: (0..8).collect(),
            val_worlds: (100..104).collect(),
            generate_worlds: vec![700],
        },
        generate: wpnav::cli::GenerateSection { episodes_per_world: 30 },
        ..ExperimentConfig::default()
    };
    let out_root = trained.out_dir.join("navswap");
    let worlds = wpnav::cli::generate_cmd(&cfg, &out_root.join("worlds"), true).unwrap();

    let mut summaries = Vec::new();
    let mut spl = [0.0f64; 2];
    for (i, navigator) in [NavigatorKind::Continuous, NavigatorKind::Discrete]
        .into_iter()
        .enumerate()
    {
        let opts = EvalOptions {
            navigator,
            with_sct: true,
            allow_digest_mismatch: true, // checkpoint digest is the training tag
            max_episodes: 0,
        };
        let arts = evaluate_cmd(
            &cfg,
            &trained.best_checkpoint,
            &worlds,
            &opts,
            &out_root.join(format!("eval_{}", navigator.code())),
            true,
        )
        .unwrap();
        assert_eq!(arts.rows.len(), 30, "evaluation must cover every episode");
        let summary: wpnav::cli::EvalSummary =
            serde_json::from_str(&std::fs::read_to_string(&arts.summary).unwrap()).unwrap();
        spl[i] = summary.aggregates.spl;
        summaries.push(arts.summary);
    }

    let table_path = out_root.join("navswap.csv");
    let table = compare_cmd(&summaries, Some(&table_path), true).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 4, "comment + header + one row per navigator");
    assert!(lines[1].starts_with("model,navigator,TL,NE,OS,SR,SPL,EET,SCT"));
    assert!(lines[2].starts_with("cc,cn,"));
    assert!(lines[3].starts_with("cc,dn,"));

    // The SPL delta is reported, not asserted.
    println!(
        "PASS criterion 8: paired CN/DN table emitted; SPL delta {:+.3} (cn {:.3}, dn {:.3}) ({:.0}s)",
        spl[0] - spl[1],
        spl[0],
        spl[1],
        t0.elapsed().as_secs_f64()
    );
}
