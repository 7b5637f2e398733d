//! `generate`: write world/episode files from config seeds.

use super::{guard_overwrite, ExperimentConfig};
use crate::error::{Error, Result};
use crate::trainer::derive_env_seed;
use crate::world::{generate_episode, generate_world, Episode, WorldFile};
use std::path::{Path, PathBuf};

/// Generate one world file per `seeds.generate_worlds` entry, each holding
/// `generate.episodes_per_world` episodes. Deterministic in the config.
pub fn generate_cmd(cfg: &ExperimentConfig, out_dir: &Path, force: bool) -> Result<Vec<PathBuf>> {
    if cfg.seeds.generate_worlds.is_empty() {
        return Err(Error::Config("seeds.generate_worlds is empty".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let digest = cfg.digest();
    let mut written = Vec::new();
    for &world_seed in &cfg.seeds.generate_worlds {
        let path = out_dir.join(format!("world_{world_seed:05}.wpw"));
        guard_overwrite(&path, force)?;
        let grid = generate_world(world_seed, &cfg.world)?;
        let mut episodes: Vec<Episode> = Vec::with_capacity(cfg.generate.episodes_per_world);
        let mut attempt = 0u64;
        while episodes.len() < cfg.generate.episodes_per_world {
            if attempt > 50 * cfg.generate.episodes_per_world as u64 + 50 {
                return Err(Error::Sampling(format!(
                    "world {world_seed}: sampled only {} of {} episodes",
                    episodes.len(),
                    cfg.generate.episodes_per_world
                )));
            }
            let ep_seed = derive_env_seed(world_seed ^ cfg.run_seed, attempt as usize);
            attempt += 1;
            if let Ok(ep) = generate_episode(&grid, ep_seed, &cfg.episode) {
                episodes.push(ep);
            }
        }
        let file = WorldFile::new(grid, episodes, &digest);
        file.save(&path)?;
        written.push(path);
    }
    Ok(written)
}
