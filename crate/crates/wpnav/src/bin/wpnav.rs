//! Experiment driver for the waypoint navigation lab. All logic lives in the
//! library; this binary only parses arguments and maps errors to exit codes
//! (0 ok, 1 usage, 2 data/digest, 3 numeric abort).

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use wpnav::cli::{
    compare_cmd, evaluate_cmd, generate_cmd, render_cmd, resolve_out_dir, train_cmd, EvalOptions,
    ExperimentConfig,
};
use wpnav::trainer::NavigatorKind;

#[derive(Parser)]
#[command(name = "wpnav", version, about = "Waypoint navigation lab experiment driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's run seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the expressivity configuration
    /// (cc, dc, dd, dfixed, fixedc, fixedfixed).
    #[arg(long)]
    expressivity: Option<String>,
    /// Override the navigator (cn, dn).
    #[arg(long)]
    navigator: Option<String>,
    /// Output directory (defaults to the config root or $WPNAV_OUT_ROOT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing outputs.
    #[arg(long)]
    force: bool,
}

impl ConfigArgs {
    /// Load the config and apply CLI overrides; the digest embedded in
    /// artifacts reflects the effective configuration.
    fn load(&self) -> wpnav::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.run_seed = seed;
        }
        if let Some(code) = &self.expressivity {
            cfg.expressivity = wpnav::actionspace::ExpressivityConfig::from_code(code)?;
        }
        if let Some(code) = &self.navigator {
            cfg.navigator = NavigatorKind::from_code(code)?;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate world/episode files from the config seeds.
    Generate {
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Train a policy and keep the best-SPL checkpoint.
    Train {
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Evaluate a checkpoint greedily over episode files.
    Evaluate {
        #[command(flatten)]
        common: ConfigArgs,
        /// Checkpoint to evaluate.
        #[arg(long)]
        checkpoint: PathBuf,
        /// World/episode files (.wpw).
        #[arg(long, num_args = 1.., required = true)]
        episodes: Vec<PathBuf>,
        /// Skip the SCT oracle (faster).
        #[arg(long)]
        no_sct: bool,
        /// Evaluate a checkpoint whose config digest does not match.
        #[arg(long)]
        allow_digest_mismatch: bool,
    },
    /// Render one evaluated episode to SVG.
    Render {
        /// World/episode file the episode came from.
        #[arg(long)]
        world: PathBuf,
        /// trajectories.jsonl produced by `evaluate`.
        #[arg(long)]
        trajectories: PathBuf,
        /// Episode id (defaults to the first in the log).
        #[arg(long)]
        episode: Option<String>,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Merge evaluation summaries into one expressivity table.
    Compare {
        /// summary.json files produced by `evaluate`.
        #[arg(long, num_args = 1.., required = true)]
        summaries: Vec<PathBuf>,
        /// Output CSV path (prints to stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
}

fn run(cli: Cli) -> wpnav::Result<()> {
    match cli.command {
        Command::Generate { common } => {
            let cfg = common.load()?;
            let out = resolve_out_dir(common.out.as_deref(), &cfg, "worlds");
            let files = generate_cmd(&cfg, &out, common.force)?;
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::Train { common } => {
            let cfg = common.load()?;
            let out = resolve_out_dir(common.out.as_deref(), &cfg, "train");
            let outcome = train_cmd(&cfg, &out, common.force)?;
            println!(
                "trained {} updates / {} env steps; best SPL {:.4} (SR {:.4})",
                outcome.updates, outcome.env_steps, outcome.best_spl, outcome.best_sr
            );
            println!("best checkpoint: {}", outcome.best_checkpoint.display());
            if let Some(at) = outcome.reached_target_at {
                println!("target SR reached at {at} env steps");
            }
        }
        Command::Evaluate { common, checkpoint, episodes, no_sct, allow_digest_mismatch } => {
            let cfg = common.load()?;
            let out = resolve_out_dir(common.out.as_deref(), &cfg, "eval");
            let opts = EvalOptions {
                navigator: cfg.navigator,
                with_sct: cfg.evaluate.with_sct && !no_sct,
                allow_digest_mismatch,
                max_episodes: cfg.evaluate.max_episodes,
            };
            let artifacts =
                evaluate_cmd(&cfg, &checkpoint, &episodes, &opts, &out, common.force)?;
            println!("{}", artifacts.summary.display());
        }
        Command::Render { world, trajectories, episode, out, force } => {
            render_cmd(&world, &trajectories, episode.as_deref(), &out, force)?;
            println!("{}", out.display());
        }
        Command::Compare { summaries, out, force } => {
            let table = compare_cmd(&summaries, out.as_deref(), force)?;
            match out {
                Some(path) => println!("{}", path.display()),
                None => print!("{table}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are not usage errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
