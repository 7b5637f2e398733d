//! Experiment driver: configuration files with content digests, plus the
//! library entry points behind the `wpnav` subcommands (`generate`, `train`,
//! `evaluate`, `render`, `compare`).

mod compare;
mod evaluate;
mod generate;
mod render;

pub use compare::{command_ratio, compare_cmd, RunSummary};
pub use evaluate::{evaluate_cmd, EvalArtifacts, EvalOptions, EvalSummary, SummaryAggregates, TrajectoryRecord};
pub use generate::generate_cmd;
pub use render::render_cmd;

use crate::actionspace::ExpressivityConfig;
use crate::error::{Error, Result};
use crate::metrics::MotionModel;
use crate::policy::PolicyConfig;
use crate::trainer::{NavigatorKind, PPOConfig, TrainOutcome, TrainParams};
use crate::world::{EpisodeParams, Vocabulary, WorldParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Environment variable naming the default output root.
pub const OUT_ROOT_ENV: &str = "WPNAV_OUT_ROOT";

/// Policy dimensions as they appear in the config file (expressivity lives in
/// its own section; the vocabulary is the fixed template).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicySection {
    pub sector_dim: usize,
    pub h_vis_dim: usize,
    pub h_act_dim: usize,
    pub embed_dim: usize,
    pub rays_per_sector: usize,
    pub max_range: f64,
    pub use_pose_features: bool,
    pub split_sector_ranges: bool,
}

impl Default for PolicySection {
    fn default() -> Self {
        let d = PolicyConfig::default();
        PolicySection {
            sector_dim: d.sector_dim,
            h_vis_dim: d.h_vis_dim,
            h_act_dim: d.h_act_dim,
            embed_dim: d.embed_dim,
            rays_per_sector: d.rays_per_sector,
            max_range: d.max_range,
            use_pose_features: d.use_pose_features,
            split_sector_ranges: d.split_sector_ranges,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeedsSection {
    pub train_worlds: Vec<u64>,
    pub val_worlds: Vec<u64>,
    pub generate_worlds: Vec<u64>,
}

impl Default for SeedsSection {
    fn default() -> Self {
        SeedsSection {
            train_worlds: (0..8).collect(),
            val_worlds: (100..104).collect(),
            generate_worlds: (200..204).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerateSection {
    pub episodes_per_world: usize,
}

impl Default for GenerateSection {
    fn default() -> Self {
        GenerateSection { episodes_per_world: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSection {
    pub total_env_steps: u64,
    pub eval_every_steps: u64,
    pub eval_episodes: usize,
    pub target_sr: Option<f64>,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            total_env_steps: 200_000,
            eval_every_steps: 8_192,
            eval_episodes: 50,
            target_sr: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluateSection {
    /// Compute SCT against the lattice minimal-time oracle.
    pub with_sct: bool,
    /// Cap on evaluated episodes (0 = all in the given files).
    pub max_episodes: usize,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        EvaluateSection { with_sct: true, max_episodes: 0 }
    }
}

/// The full experiment configuration (`--config` TOML). A digest of the
/// effective config is embedded in every output artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub version: u32,
    pub run_seed: u64,
    pub world: WorldParams,
    pub episode: EpisodeParams,
    pub expressivity: ExpressivityConfig,
    pub navigator: NavigatorKind,
    pub policy: PolicySection,
    pub ppo: PPOConfig,
    pub motion_model: MotionModel,
    pub seeds: SeedsSection,
    pub generate: GenerateSection,
    pub train: TrainSection,
    pub evaluate: EvaluateSection,
    /// Default output root; overridden by `--out` and `WPNAV_OUT_ROOT`.
    pub output_root: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            version: 1,
            run_seed: 7,
            world: WorldParams::default(),
            episode: EpisodeParams::default(),
            expressivity: ExpressivityConfig::wpn(),
            navigator: NavigatorKind::Continuous,
            policy: PolicySection::default(),
            ppo: PPOConfig::desk(),
            motion_model: MotionModel::default(),
            seeds: SeedsSection::default(),
            generate: GenerateSection::default(),
            train: TrainSection::default(),
            evaluate: EvaluateSection::default(),
            output_root: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.motion_model.validate()?;
        if cfg.version != 1 {
            return Err(Error::Config(format!("unsupported config version {}", cfg.version)));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Content digest of the effective (normalized) configuration.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_toml().as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn policy_config(&self) -> PolicyConfig {
        PolicyConfig {
            expressivity: self.expressivity,
            sector_dim: self.policy.sector_dim,
            h_vis_dim: self.policy.h_vis_dim,
            h_act_dim: self.policy.h_act_dim,
            embed_dim: self.policy.embed_dim,
            vocab_size: Vocabulary::template().len(),
            rays_per_sector: self.policy.rays_per_sector,
            max_range: self.policy.max_range,
            use_pose_features: self.policy.use_pose_features,
            split_sector_ranges: self.policy.split_sector_ranges,
        }
    }

    pub fn train_params(&self, out_dir: &Path) -> TrainParams {
        TrainParams {
            ppo: self.ppo,
            policy: self.policy_config(),
            world_params: self.world.clone(),
            episode_params: self.episode.clone(),
            navigator: self.navigator,
            train_world_seeds: self.seeds.train_worlds.clone(),
            val_world_seeds: self.seeds.val_worlds.clone(),
            run_seed: self.run_seed,
            total_env_steps: self.train.total_env_steps,
            eval_every_steps: self.train.eval_every_steps,
            eval_episodes: self.train.eval_episodes,
            target_sr: self.train.target_sr,
            out_dir: out_dir.to_path_buf(),
            digest: self.digest(),
        }
    }
}

/// Resolve the output directory: explicit flag, then config root, then the
/// `WPNAV_OUT_ROOT` environment variable, then `./runs`.
pub fn resolve_out_dir(flag: Option<&Path>, cfg: &ExperimentConfig, name: &str) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    let root = cfg
        .output_root
        .clone()
        .or_else(|| std::env::var(OUT_ROOT_ENV).ok())
        .unwrap_or_else(|| "runs".to_string());
    Path::new(&root).join(name)
}

/// Refuse to overwrite an existing file unless forced.
pub fn guard_overwrite(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(Error::WouldOverwrite(path.display().to_string()));
    }
    Ok(())
}

/// Run training from a config (thin wrapper so the binary stays small).
pub fn train_cmd(cfg: &ExperimentConfig, out_dir: &Path, force: bool) -> Result<TrainOutcome> {
    guard_overwrite(&out_dir.join("train_log.csv"), force)?;
    std::fs::create_dir_all(out_dir)?;
    crate::trainer::train(&cfg.train_params(out_dir))
}
