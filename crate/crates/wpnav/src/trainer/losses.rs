//! The PPO loss on the tape: clipped surrogate, clipped value loss,
//! decomposed entropy bonus, and the zero-trending offset regularizer.
//!
//! Minibatches are whole env-chains replayed from their stored states with
//! gradients flowing through the recurrence (truncated at rollout
//! boundaries and episode resets, exactly as collected).

use super::rollout::Transition;
use super::PPOConfig;
use crate::actionspace::{
    atom_index, discrete_distances, discrete_offsets, HeadMode, WaypointAction, DIST_MAX,
    DIST_MIN, OFFSET_LIMIT, SECTOR_COUNT, SIGMA_FLOOR, STOP_INDEX,
};
use crate::error::{Error, Result};
use crate::policy::{Policy, Tape, TapeState, Tensor, Var};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_74;

/// One chain of transitions with its precomputed targets.
pub struct ChainSlice<'a> {
    pub transitions: &'a [Transition],
    pub advantages: &'a [f64],
    pub returns: &'a [f64],
}

/// Scalar loss values of one minibatch (means over its steps).
#[derive(Debug, Clone, Copy, Default)]
pub struct LossStats {
    pub action: f64,
    pub value: f64,
    pub s_pano: f64,
    pub s_offset: f64,
    pub s_dist: f64,
    pub offset_reg: f64,
    pub total: f64,
    pub n_steps: usize,
    /// Mean predicted waypoint distance over the minibatch's motion steps.
    pub mean_predicted_distance: f64,
}

/// Per-parameter gradients aligned with `ParamSet` order.
pub type ParamGrads = Vec<Tensor>;

/// Truncated-Gaussian head parameters as tape nodes.
struct TruncVars {
    mu: Var,
    sigma: Var,
    alpha: Var,
    beta: Var,
    z: Var,
}

fn trunc_vars(tape: &mut Tape, raw: Var, scale_limit: f64, lo: f64, hi: f64) -> Result<TruncVars> {
    let raw_mean = tape.index(raw, 0)?;
    let raw_spread = tape.index(raw, 1)?;
    let mu = match () {
        // Offset heads map through tanh, distance heads through sigmoid; the
        // caller distinguishes them via the bounds.
        _ if lo < 0.0 => {
            let t = tape.tanh(raw_mean);
            tape.scale(t, scale_limit)
        }
        _ => {
            let s = tape.sigmoid(raw_mean);
            let scaled = tape.scale(s, hi - lo);
            tape.add_const(scaled, lo)
        }
    };
    let half = 0.5 * (hi - lo);
    let sig = tape.sigmoid(raw_spread);
    let sig = tape.scale(sig, half);
    let sigma = tape.clamp_min(sig, SIGMA_FLOOR);
    let lo_leaf = tape.scalar(lo);
    let hi_leaf = tape.scalar(hi);
    let alpha = {
        let d = tape.sub(lo_leaf, mu)?;
        tape.div(d, sigma)?
    };
    let beta = {
        let d = tape.sub(hi_leaf, mu)?;
        tape.div(d, sigma)?
    };
    let z = {
        let eb = tape.scale(beta, 1.0 / SQRT_2);
        let eb = tape.erf(eb);
        let ea = tape.scale(alpha, 1.0 / SQRT_2);
        let ea = tape.erf(ea);
        let diff = tape.sub(eb, ea)?;
        tape.scale(diff, 0.5)
    };
    Ok(TruncVars { mu, sigma, alpha, beta, z })
}

fn trunc_offset_vars(tape: &mut Tape, raw: Var) -> Result<TruncVars> {
    trunc_vars(tape, raw, OFFSET_LIMIT, -OFFSET_LIMIT, OFFSET_LIMIT)
}

fn trunc_distance_vars(tape: &mut Tape, raw: Var) -> Result<TruncVars> {
    trunc_vars(tape, raw, 0.0, DIST_MIN, DIST_MAX)
}

/// log pdf(x) = −ln σ − ln Z − ξ²/2 − ln √(2π)
fn trunc_logpdf(tape: &mut Tape, tv: &TruncVars, x: f64) -> Result<Var> {
    let x_leaf = tape.scalar(x);
    let xi = {
        let d = tape.sub(x_leaf, tv.mu)?;
        tape.div(d, tv.sigma)?
    };
    let ln_sigma = tape.ln(tv.sigma);
    let ln_z = tape.ln(tv.z);
    let xi2 = tape.mul(xi, xi)?;
    let t = tape.neg(ln_sigma);
    let t = tape.sub(t, ln_z)?;
    let half_xi2 = tape.scale(xi2, 0.5);
    let t = tape.sub(t, half_xi2)?;
    Ok(tape.add_const(t, -LN_SQRT_2PI))
}

/// H = ln √(2πe) + ln σ + ln Z + (α φ(α) − β φ(β)) / (2Z)
fn trunc_entropy(tape: &mut Tape, tv: &TruncVars) -> Result<Var> {
    let phi = |tape: &mut Tape, x: Var| -> Result<Var> {
        let x2 = tape.mul(x, x)?;
        let e = tape.scale(x2, -0.5);
        let e = tape.exp(e);
        Ok(tape.scale(e, 1.0 / (SQRT_2 * std::f64::consts::PI.sqrt())))
    };
    let pa = phi(tape, tv.alpha)?;
    let pb = phi(tape, tv.beta)?;
    let a_term = tape.mul(tv.alpha, pa)?;
    let b_term = tape.mul(tv.beta, pb)?;
    let num = tape.sub(a_term, b_term)?;
    let denom = tape.scale(tv.z, 2.0);
    let corr = tape.div(num, denom)?;
    let ln_sigma = tape.ln(tv.sigma);
    let ln_z = tape.ln(tv.z);
    let t = tape.add(ln_sigma, ln_z)?;
    let t = tape.add(t, corr)?;
    let const_term = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    Ok(tape.add_const(t, const_term))
}

/// Categorical entropy from logits: −⟨softmax, log_softmax⟩.
fn categorical_entropy(tape: &mut Tape, logits: Var) -> Result<Var> {
    let p = tape.softmax(logits)?;
    let lp = tape.log_softmax(logits)?;
    let inner = tape.dot(p, lp)?;
    Ok(tape.neg(inner))
}

struct StepVars {
    logprob: Var,
    value: Var,
    s_pano: Var,
    s_offset: Var,
    s_dist: Var,
    /// |sampled offset| for motion steps (constant factor of the surrogate).
    offset_mag: Option<f64>,
}

/// Replay one step on the tape and assemble its loss ingredients.
#[allow(clippy::too_many_arguments)]
fn step_vars(
    tape: &mut Tape,
    policy: &Policy,
    vars: &crate::policy::PolicyVars,
    tr: &Transition,
    state: TapeState,
) -> Result<(StepVars, crate::policy::ForwardVars)> {
    let fwd = policy.forward_on_tape(tape, vars, &tr.obs.scan, &tr.obs.tokens, state)?;
    let (off_mode, dist_mode) =
        (policy.cfg.expressivity.offset_mode, policy.cfg.expressivity.distance_mode);

    // Per-sector head entropies (zero for fixed heads), weighted by the pano
    // sector probabilities renormalized over motion sectors.
    let pano_probs = tape.softmax(fwd.pano_logits)?;
    let motion_mass = {
        let motion = tape.slice(pano_probs, 0, SECTOR_COUNT)?;
        tape.sum(motion)
    };
    let weighted = |tape: &mut Tape, entropies: Vec<Var>| -> Result<Var> {
        let mut acc = tape.scalar(0.0);
        for (i, h) in entropies.into_iter().enumerate() {
            let p = tape.index(pano_probs, i)?;
            let w = tape.div(p, motion_mass)?;
            let term = tape.mul(w, h)?;
            acc = tape.add(acc, term)?;
        }
        Ok(acc)
    };

    let s_pano = categorical_entropy(tape, fwd.pano_logits)?;
    let s_offset = match (off_mode, fwd.offset_raw) {
        (HeadMode::Fixed, _) | (_, None) => tape.scalar(0.0),
        (HeadMode::Continuous, Some(raw)) => {
            let mut hs = Vec::with_capacity(SECTOR_COUNT);
            for i in 0..SECTOR_COUNT {
                let row = tape.row(raw, i)?;
                let tv = trunc_offset_vars(tape, row)?;
                hs.push(trunc_entropy(tape, &tv)?);
            }
            weighted(tape, hs)?
        }
        (HeadMode::Discrete, Some(raw)) => {
            let mut hs = Vec::with_capacity(SECTOR_COUNT);
            for i in 0..SECTOR_COUNT {
                let row = tape.row(raw, i)?;
                hs.push(categorical_entropy(tape, row)?);
            }
            weighted(tape, hs)?
        }
    };
    let s_dist = match (dist_mode, fwd.dist_raw) {
        (HeadMode::Fixed, _) | (_, None) => tape.scalar(0.0),
        (HeadMode::Continuous, Some(raw)) => {
            let mut hs = Vec::with_capacity(SECTOR_COUNT);
            for i in 0..SECTOR_COUNT {
                let row = tape.row(raw, i)?;
                let tv = trunc_distance_vars(tape, row)?;
                hs.push(trunc_entropy(tape, &tv)?);
            }
            weighted(tape, hs)?
        }
        (HeadMode::Discrete, Some(raw)) => {
            let mut hs = Vec::with_capacity(SECTOR_COUNT);
            for i in 0..SECTOR_COUNT {
                let row = tape.row(raw, i)?;
                hs.push(categorical_entropy(tape, row)?);
            }
            weighted(tape, hs)?
        }
    };

    // Joint log-probability of the stored action.
    let pano_ls = tape.log_softmax(fwd.pano_logits)?;
    let (logprob, offset_mag) = match &tr.action {
        WaypointAction::Stop => (tape.index(pano_ls, STOP_INDEX)?, None),
        WaypointAction::Move { sector, offset, distance } => {
            let mut lp = tape.index(pano_ls, *sector)?;
            if let Some(raw) = fwd.offset_raw {
                let row = tape.row(raw, *sector)?;
                let term = match off_mode {
                    HeadMode::Continuous => {
                        let tv = trunc_offset_vars(tape, row)?;
                        trunc_logpdf(tape, &tv, *offset)?
                    }
                    HeadMode::Discrete => {
                        let idx = atom_index(&discrete_offsets(), *offset).ok_or_else(|| {
                            Error::NumericAbort(format!("offset {offset} is not an atom"))
                        })?;
                        let ls = tape.log_softmax(row)?;
                        tape.index(ls, idx)?
                    }
                    HeadMode::Fixed => unreachable!("fixed heads carry no raw outputs"),
                };
                lp = tape.add(lp, term)?;
            }
            if let Some(raw) = fwd.dist_raw {
                let row = tape.row(raw, *sector)?;
                let term = match dist_mode {
                    HeadMode::Continuous => {
                        let tv = trunc_distance_vars(tape, row)?;
                        trunc_logpdf(tape, &tv, *distance)?
                    }
                    HeadMode::Discrete => {
                        let idx = atom_index(&discrete_distances(), *distance).ok_or_else(|| {
                            Error::NumericAbort(format!("distance {distance} is not an atom"))
                        })?;
                        let ls = tape.log_softmax(row)?;
                        tape.index(ls, idx)?
                    }
                    HeadMode::Fixed => unreachable!("fixed heads carry no raw outputs"),
                };
                lp = tape.add(lp, term)?;
            }
            (lp, Some(offset.abs()))
        }
    };

    Ok((
        StepVars { logprob, value: fwd.value, s_pano, s_offset, s_dist, offset_mag },
        fwd,
    ))
}

/// Compute the full loss for a minibatch of chains and its parameter
/// gradients. Both are exact analytic quantities for the replayed graph.
pub fn ppo_losses(
    policy: &Policy,
    minibatch: &[ChainSlice<'_>],
    cfg: &PPOConfig,
) -> Result<(LossStats, ParamGrads)> {
    let mut tape = Tape::new();
    let vars = policy.params_on_tape(&mut tape);

    let mut steps: Vec<StepVars> = Vec::new();
    let mut old_logprobs = Vec::new();
    let mut old_values = Vec::new();
    let mut advantages = Vec::new();
    let mut returns = Vec::new();

    for chain in minibatch {
        let n = chain.transitions.len();
        if chain.advantages.len() != n || chain.returns.len() != n {
            return Err(Error::LengthMismatch("chain targets".into()));
        }
        let mut carried: Option<TapeState> = None;
        for (t, tr) in chain.transitions.iter().enumerate() {
            // Replay from the stored state at chunk starts and episode
            // resets; otherwise carry the recurrent state on the tape.
            let state = match carried.take() {
                Some(s) if t > 0 && !chain.transitions[t - 1].done => s,
                _ => policy.state_on_tape(&mut tape, &tr.state),
            };
            let (sv, fwd) = step_vars(&mut tape, policy, &vars, tr, state)?;
            // Prepare the next step's state from this forward pass.
            if let WaypointAction::Move { sector, offset, distance } = tr.action {
                let angle = sector as f64 * crate::actionspace::SECTOR_WIDTH;
                let prev_action = tape.leaf(Tensor::vector(vec![
                    distance,
                    angle.sin(),
                    angle.cos(),
                    offset,
                ]));
                let prev_feat = tape.row(fwd.sector_features, sector)?;
                carried = Some(TapeState {
                    h_vis: fwd.h_vis,
                    h_act: fwd.h_act,
                    prev_action,
                    prev_sector_feature: prev_feat,
                });
            }
            steps.push(sv);
            old_logprobs.push(tr.logprob);
            old_values.push(tr.value);
            advantages.push(chain.advantages[t]);
            returns.push(chain.returns[t]);
        }
    }
    let n_steps = steps.len();
    if n_steps == 0 {
        return Err(Error::LengthMismatch("empty minibatch".into()));
    }

    // Ratios r = exp(lp − lp_old), vectorized over the minibatch.
    let lp_vars: Vec<Var> = steps.iter().map(|s| s.logprob).collect();
    let lp_vec = tape.concat(&lp_vars)?;
    let old_lp = tape.leaf(Tensor::vector(old_logprobs));
    let diff = tape.sub(lp_vec, old_lp)?;
    let ratio = tape.exp(diff);

    // Clipped surrogate: −mean(min(r·A, clip(r)·A)).
    let adv = tape.leaf(Tensor::vector(advantages));
    let surr1 = tape.mul(ratio, adv)?;
    let clipped = tape.clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
    let surr2 = tape.mul(clipped, adv)?;
    let obj = tape.min_elem(surr1, surr2)?;
    let mean_obj = tape.mean(obj);
    let l_action = tape.neg(mean_obj);

    // Clipped value loss: ½·mean(max((v−R)², (v_old + clip(v−v_old) − R)²)).
    let value_vars: Vec<Var> = steps.iter().map(|s| s.value).collect();
    let v_vec = tape.concat(&value_vars)?;
    let ret = tape.leaf(Tensor::vector(returns));
    let l_value = if cfg.value_clip {
        let v_old = tape.leaf(Tensor::vector(old_values));
        let delta = tape.sub(v_vec, v_old)?;
        let delta_c = tape.clamp(delta, -cfg.clip, cfg.clip);
        let v_clipped = tape.add(v_old, delta_c)?;
        let e1 = tape.sub(v_vec, ret)?;
        let e1 = tape.mul(e1, e1)?;
        let e2 = tape.sub(v_clipped, ret)?;
        let e2 = tape.mul(e2, e2)?;
        let worst = tape.max_elem(e1, e2)?;
        let m = tape.mean(worst);
        tape.scale(m, 0.5)
    } else {
        let e = tape.sub(v_vec, ret)?;
        let e2 = tape.mul(e, e)?;
        let m = tape.mean(e2);
        tape.scale(m, 0.5)
    };

    // Entropy bonus, decomposed per action component.
    let pano_vars: Vec<Var> = steps.iter().map(|s| s.s_pano).collect();
    let s_pano = {
        let v = tape.concat(&pano_vars)?;
        tape.mean(v)
    };
    let off_vars: Vec<Var> = steps.iter().map(|s| s.s_offset).collect();
    let s_offset = {
        let v = tape.concat(&off_vars)?;
        tape.mean(v)
    };
    let dist_vars: Vec<Var> = steps.iter().map(|s| s.s_dist).collect();
    let s_dist = {
        let v = tape.concat(&dist_vars)?;
        tape.mean(v)
    };
    let l_entropy = {
        let p = tape.scale(s_pano, cfg.c_p);
        let o = tape.scale(s_offset, cfg.c_o);
        let d = tape.scale(s_dist, cfg.c_d);
        let po = tape.add(p, o)?;
        tape.add(po, d)?
    };

    // Zero-trending offset regularizer: mean over motion steps of
    // |sampled offset| · ratio. At replay the ratio is 1 so the value equals
    // mean |offset|; its gradient is the importance-weighted score-function
    // estimate of ∇E|offset|. Fixed-offset configs contribute exactly 0.
    let l_offset = if policy.cfg.expressivity.offset_mode == HeadMode::Fixed {
        tape.scalar(0.0)
    } else {
        let mut terms = Vec::new();
        for (i, s) in steps.iter().enumerate() {
            if let Some(mag) = s.offset_mag {
                let r_i = tape.index(ratio, i)?;
                terms.push(tape.scale(r_i, mag));
            }
        }
        if terms.is_empty() {
            tape.scalar(0.0)
        } else {
            let v = tape.concat(&terms)?;
            tape.mean(v)
        }
    };

    // L_total = L_action + c_v·L_value − c_e·L_S + c_r·L_offset
    let total = {
        let v = tape.scale(l_value, cfg.c_v);
        let e = tape.scale(l_entropy, -cfg.c_e);
        let o = tape.scale(l_offset, cfg.c_r);
        let t = tape.add(l_action, v)?;
        let t = tape.add(t, e)?;
        tape.add(t, o)?
    };

    let total_value = tape.value(total).item();
    if !total_value.is_finite() {
        return Err(Error::NumericAbort(format!("loss became {total_value}")));
    }

    let grads = tape.backward(total)?;
    let param_grads: ParamGrads = policy
        .params
        .iter()
        .map(|(name, _)| grads.of(vars.get(name), &tape))
        .collect();

    let n_motion = steps.iter().filter(|s| s.offset_mag.is_some()).count();
    let mean_predicted_distance = if n_motion > 0 {
        minibatch
            .iter()
            .flat_map(|c| c.transitions.iter())
            .filter_map(|t| t.action.distance())
            .sum::<f64>()
            / n_motion as f64
    } else {
        0.0
    };

    let stats = LossStats {
        action: tape.value(l_action).item(),
        value: tape.value(l_value).item(),
        s_pano: tape.value(s_pano).item(),
        s_offset: tape.value(s_offset).item(),
        s_dist: tape.value(s_dist).item(),
        offset_reg: tape.value(l_offset).item(),
        total: total_value,
        n_steps,
        mean_predicted_distance,
    };
    Ok((stats, param_grads))
}

/// Gradients of the plain REINFORCE objective −mean(logπ(a)·Â) over the same
/// replayed chains. With `clip = 0` and an untouched policy, the clipped
/// surrogate's action-loss gradient must match this exactly.
pub fn vanilla_pg_grads(
    policy: &Policy,
    minibatch: &[ChainSlice<'_>],
) -> Result<ParamGrads> {
    let mut tape = Tape::new();
    let vars = policy.params_on_tape(&mut tape);
    let mut lp_vars = Vec::new();
    let mut advantages = Vec::new();
    for chain in minibatch {
        let mut carried: Option<TapeState> = None;
        for (t, tr) in chain.transitions.iter().enumerate() {
            let state = match carried.take() {
                Some(s) if t > 0 && !chain.transitions[t - 1].done => s,
                _ => policy.state_on_tape(&mut tape, &tr.state),
            };
            let (sv, fwd) = step_vars(&mut tape, policy, &vars, tr, state)?;
            if let WaypointAction::Move { sector, offset, distance } = tr.action {
                let angle = sector as f64 * crate::actionspace::SECTOR_WIDTH;
                let prev_action = tape.leaf(Tensor::vector(vec![
                    distance,
                    angle.sin(),
                    angle.cos(),
                    offset,
                ]));
                let prev_feat = tape.row(fwd.sector_features, sector)?;
                carried = Some(TapeState {
                    h_vis: fwd.h_vis,
                    h_act: fwd.h_act,
                    prev_action,
                    prev_sector_feature: prev_feat,
                });
            }
            lp_vars.push(sv.logprob);
            advantages.push(chain.advantages[t]);
        }
    }
    let lp_vec = tape.concat(&lp_vars)?;
    let adv = tape.leaf(Tensor::vector(advantages));
    let weighted = tape.mul(lp_vec, adv)?;
    let mean = tape.mean(weighted);
    let loss = tape.neg(mean);
    let grads = tape.backward(loss)?;
    Ok(policy.params.iter().map(|(name, _)| grads.of(vars.get(name), &tape)).collect())
}

/// Replay each transition independently from its stored recurrent state and
/// return the recomputed log-probabilities.
pub fn replay_logprobs(policy: &Policy, transitions: &[Transition]) -> Result<Vec<f64>> {
    transitions
        .iter()
        .map(|tr| {
            let eval = policy.evaluate(&tr.obs.scan, &tr.obs.tokens, &tr.state)?;
            Ok(eval.heads.joint_logprob(&tr.action))
        })
        .collect()
}
