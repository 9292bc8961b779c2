//! Clipped-surrogate policy loss, value regression, and advantage shaping.

use crate::error::Result;
use crate::neural::{GaussianPolicy, Mlp};

/// Diagnostics from one policy minibatch evaluation.
#[derive(Debug, Clone, Copy)]
pub struct PolicyLossStats {
    pub loss: f64,
    /// Sample KL estimate: mean(logp_old - logp_new).
    pub kl: f64,
    /// Fraction of samples with the ratio outside [1-eps, 1+eps].
    pub clip_fraction: f64,
}

/// Clipped PPO surrogate over the minibatch `idx`, with gradients accumulated
/// into the policy's flat buffers.
///
/// loss = -mean(min(rho * A, clip(rho, 1-eps, 1+eps) * A)) with
/// rho = exp(logp_new - logp_old). Advantages must arrive normalized.
/// Clipped samples contribute zero gradient through rho.
#[allow(clippy::too_many_arguments)]
pub fn ppo_policy_loss(
    policy: &GaussianPolicy,
    obs: &[Vec<f64>],
    actions: &[Vec<f64>],
    log_probs_old: &[f64],
    advantages: &[f64],
    idx: &[usize],
    clip_eps: f64,
    mean_grads: &mut [f64],
    log_std_grads: &mut [f64],
) -> Result<PolicyLossStats> {
    let n = idx.len() as f64;
    let mut loss = 0.0;
    let mut kl = 0.0;
    let mut clipped = 0usize;
    for &i in idx {
        let (mean, cache) = policy.forward_cached(&obs[i])?;
        let logp_new = policy.log_prob_of(&mean, &actions[i]);
        let ratio = (logp_new - log_probs_old[i]).exp();
        let adv = advantages[i];
        let surr_unclipped = ratio * adv;
        let surr_clipped = ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps) * adv;
        loss += -surr_unclipped.min(surr_clipped) / n;
        kl += (log_probs_old[i] - logp_new) / n;
        if (ratio - 1.0).abs() > clip_eps {
            clipped += 1;
        }
        if surr_unclipped <= surr_clipped {
            // d(-surr)/d(logp_new) = -rho * A; the clipped branch is constant in rho
            policy.accumulate_log_prob_grads(
                &cache,
                &mean,
                &actions[i],
                -surr_unclipped / n,
                mean_grads,
                log_std_grads,
            )?;
        }
    }
    Ok(PolicyLossStats {
        loss,
        kl,
        clip_fraction: clipped as f64 / n,
    })
}

/// Mean squared error regression of `net` onto `targets` over `idx`;
/// gradients accumulate into `grads`.
pub fn value_loss(
    net: &Mlp,
    obs: &[Vec<f64>],
    targets: &[f64],
    idx: &[usize],
    grads: &mut [f64],
) -> Result<f64> {
    let n = idx.len() as f64;
    let mut loss = 0.0;
    for &i in idx {
        let (out, cache) = net.forward(&obs[i])?;
        let err = out[0] - targets[i];
        loss += err * err / n;
        net.backward(&cache, &[2.0 * err / n], grads)?;
    }
    Ok(loss)
}

/// Lagrangian-penalized advantage: (A_r - lambda * A_c) / (1 + lambda).
/// PPO consumes the result exactly as it would a reward advantage.
pub fn penalized_advantage(adv_r: &[f64], adv_c: &[f64], lambda: f64) -> Vec<f64> {
    assert_eq!(adv_r.len(), adv_c.len());
    assert!(lambda >= 0.0);
    adv_r
        .iter()
        .zip(adv_c)
        .map(|(&r, &c)| (r - lambda * c) / (1.0 + lambda))
        .collect()
}

/// In-place normalization to mean 0 / std 1 (std guarded at 1e-8).
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt().max(1e-8);
    for a in adv.iter_mut() {
        *a = (*a - mean) / std;
    }
}
