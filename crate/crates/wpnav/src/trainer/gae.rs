//! Generalized advantage estimation.

use crate::error::{Error, Result};

/// Standard GAE recursion over one environment's step sequence:
/// `A_t = δ_t + γτ(1−done_t)·A_{t+1}` with
/// `δ_t = r_t + γ(1−done_t)·V_{t+1} − V_t` and `V_T = bootstrap`.
/// Returns raw (unnormalized) advantages and `returns = A + V`.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    tau: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(Error::LengthMismatch(format!(
            "rewards {n}, values {}, dones {}",
            values.len(),
            dones.len()
        )));
    }
    let mut advantages = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let mask = if dones[t] { 0.0 } else { 1.0 };
        let next_value = if t == n - 1 { bootstrap } else { values[t + 1] };
        let delta = rewards[t] + gamma * mask * next_value - values[t];
        acc = delta + gamma * tau * mask * acc;
        advantages[t] = acc;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((advantages, returns))
}

/// In-place normalization to zero mean and unit variance (applied once per
/// update batch).
pub fn normalize_advantages(advantages: &mut [f64], epsilon: f64) {
    if advantages.is_empty() {
        return;
    }
    let n = advantages.len() as f64;
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    for a in advantages {
        *a = (*a - mean) / (std + epsilon);
    }
}
