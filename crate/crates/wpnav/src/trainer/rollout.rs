//! Parallel rollout collection into a replayable buffer.

use super::env::{Observation, VlnEnv};
use super::PPOConfig;
use crate::actionspace::WaypointAction;
use crate::error::{Error, Result};
use crate::policy::{Policy, PolicyState};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// One waypoint-level transition, with enough state to replay the policy's
/// log-probability exactly.
#[derive(Debug, Clone)]
pub struct Transition {
    pub obs: Observation,
    /// Recurrent state at the start of the step.
    pub state: PolicyState,
    pub action: WaypointAction,
    pub logprob: f64,
    pub value: f64,
    pub reward: f64,
    pub done: bool,
}

/// Fixed-size on-policy buffer: `n_envs` chains of `rollout_length` steps plus
/// a bootstrap value per chain.
#[derive(Debug, Clone, Default)]
pub struct RolloutBuffer {
    pub per_env: Vec<Vec<Transition>>,
    pub bootstrap: Vec<f64>,
}

impl RolloutBuffer {
    pub fn total_steps(&self) -> usize {
        self.per_env.iter().map(|c| c.len()).sum()
    }
}

/// One logical rollout worker: an environment, the policy's recurrent state,
/// and a private action-sampling stream.
pub struct EnvRunner {
    pub env: VlnEnv,
    pub state: PolicyState,
    pub rng: ChaCha8Rng,
}

/// Collect `rollout_length` steps from every worker. Workers run in parallel
/// and are fully independent (own env, own RNG), so the buffer is bitwise
/// deterministic for a fixed seed regardless of thread scheduling; chains are
/// concatenated in env-index order.
pub fn collect_rollouts(
    runners: &mut [EnvRunner],
    policy: &Policy,
    cfg: &PPOConfig,
) -> Result<RolloutBuffer> {
    let results: Vec<Result<(Vec<Transition>, f64)>> = runners
        .par_iter_mut()
        .enumerate()
        .map(|(idx, runner)| {
            collect_one(runner, policy, cfg).map_err(|e| Error::Worker {
                env: idx,
                source: Box::new(e),
            })
        })
        .collect();

    let mut buffer = RolloutBuffer::default();
    for result in results {
        let (chain, bootstrap) = result?;
        buffer.per_env.push(chain);
        buffer.bootstrap.push(bootstrap);
    }
    Ok(buffer)
}

fn collect_one(
    runner: &mut EnvRunner,
    policy: &Policy,
    cfg: &PPOConfig,
) -> Result<(Vec<Transition>, f64)> {
    let mut chain = Vec::with_capacity(cfg.rollout_length);
    for _ in 0..cfg.rollout_length {
        let obs = runner.env.observe()?;
        let eval = policy.evaluate(&obs.scan, &obs.tokens, &runner.state)?;
        let action = eval.heads.sample(&mut runner.rng);
        let logprob = eval.heads.joint_logprob(&action);
        let out = runner.env.step(&action, cfg)?;
        chain.push(Transition {
            obs,
            state: runner.state.clone(),
            action,
            logprob,
            value: eval.value,
            reward: out.reward,
            done: out.done,
        });
        if out.done {
            runner.env.reset()?;
            runner.state = PolicyState::initial(&policy.cfg);
        } else {
            runner.state = policy.next_state(&eval, &action);
        }
    }
    // Bootstrap from the state after the last step (masked out by GAE when
    // that step ended an episode).
    let obs = runner.env.observe()?;
    let eval = policy.evaluate(&obs.scan, &obs.tokens, &runner.state)?;
    Ok((chain, eval.value))
}
