//! Acceptance criterion 10: fixed-seed generate / train (single env) /
//! evaluate pipelines produce byte-identical artifacts across two runs.

use std::path::Path;
use std::time::Instant;
use wpnav::cli::{
    evaluate_cmd, generate_cmd, train_cmd, EvalOptions, ExperimentConfig, GenerateSection,
    SeedsSection, TrainSection,
};
use wpnav::trainer::{NavigatorKind, PPOConfig};
use wpnav::world::{EpisodeParams, WorldParams, WorldStyle};

fn pipeline_cfg() -> ExperimentConfig {
    ExperimentConfig {
        world: WorldParams {
            width_cells: 32,
            height_cells: 32,
            resolution: 0.25,
            style: WorldStyle::Empty,
        },
        episode: EpisodeParams {
            min_geodesic: 1.5,
            max_geodesic: 4.0,
            marker_size: 2,
            ..EpisodeParams::default()
        },
        ppo: PPOConfig { n_envs: 1, rollout_length: 8, ..PPOConfig::desk() },
        seeds: SeedsSection {
            train_worlds: vec![0, 1],
            val_worlds: vec![100],
            generate_worlds: vec![200, 201],
        },
        generate: GenerateSection { episodes_per_world: 3 },
        train: TrainSection {
            total_env_steps: 64,
            eval_every_steps: 32,
            eval_episodes: 4,
            target_sr: None,
        },
        run_seed: 77,
        ..ExperimentConfig::default()
    }
}

fn file_bytes(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn criterion_10_pipeline_determinism() {
    let t0 = Instant::now();
    let cfg = pipeline_cfg();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();

    for dir in [dir_a.path(), dir_b.path()] {
        let worlds = generate_cmd(&cfg, &dir.join("worlds"), false).unwrap();
        let outcome = train_cmd(&cfg, &dir.join("train"), false).unwrap();
        let opts = EvalOptions {
            navigator: NavigatorKind::Continuous,
            with_sct: true,
            allow_digest_mismatch: false,
            max_episodes: 0,
        };
        evaluate_cmd(&cfg, &outcome.best_checkpoint, &worlds, &opts, &dir.join("eval"), false)
            .unwrap();
    }

    let artifacts = [
        "worlds/world_00200.wpw",
        "worlds/world_00201.wpw",
        "train/train_log.csv",
        "train/best.ckpt",
        "train/latest.ckpt",
        "eval/metrics.csv",
        "eval/trajectories.jsonl",
        "eval/summary.json",
    ];
    for rel in artifacts {
        let a = file_bytes(&dir_a.path().join(rel));
        let b = file_bytes(&dir_b.path().join(rel));
        assert_eq!(a, b, "artifact {rel} differs between identical runs");
    }
    println!(
        "PASS criterion 10: generate/train(n_envs=1)/evaluate artifacts byte-identical across runs ({:.2}s)",
        t0.elapsed().as_secs_f64()
    );
}
