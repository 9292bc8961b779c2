//! The PPO / constrained-PPO training loop.

use super::buffer::{collect_rollout, RolloutBuffer};
use super::lagrange::LagrangeState;
use super::ppo::{normalize_advantages, penalized_advantage, ppo_policy_loss, value_loss};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::neural::{AdamState, GaussianPolicy, Mlp, NamedTensor};
use crate::rng::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ppo,
    Cppo,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::Ppo => write!(f, "ppo"),
            Algorithm::Cppo => write!(f, "cppo"),
        }
    }
}

fn d_gamma() -> f64 {
    0.99
}
fn d_gae_lambda() -> f64 {
    0.95
}
fn d_clip_eps() -> f64 {
    0.2
}
fn d_policy_lr() -> f64 {
    3e-4
}
fn d_value_lr() -> f64 {
    1e-3
}
fn d_minibatch() -> usize {
    64
}
fn d_passes() -> usize {
    10
}
fn d_target_kl() -> f64 {
    0.015
}
fn d_steps_per_epoch() -> usize {
    1000
}
fn d_max_epochs() -> usize {
    200
}
fn d_cost_limit() -> f64 {
    10.0
}
fn d_dual_lr() -> f64 {
    0.05
}
fn d_hidden() -> Vec<usize> {
    vec![64, 64]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainerConfig {
    pub algorithm: Algorithm,
    #[serde(default = "d_gamma")]
    pub gamma: f64,
    #[serde(default = "d_gae_lambda")]
    pub gae_lambda: f64,
    #[serde(default = "d_clip_eps")]
    pub clip_eps: f64,
    #[serde(default = "d_policy_lr")]
    pub policy_lr: f64,
    #[serde(default = "d_value_lr")]
    pub value_lr: f64,
    #[serde(default = "d_minibatch")]
    pub update_minibatch: usize,
    #[serde(default = "d_passes")]
    pub update_passes: usize,
    #[serde(default = "d_target_kl")]
    pub target_kl: f64,
    #[serde(default = "d_steps_per_epoch")]
    pub steps_per_epoch: usize,
    #[serde(default = "d_max_epochs")]
    pub max_epochs: usize,
    /// Hidden layer widths of every network.
    #[serde(default = "d_hidden")]
    pub hidden_sizes: Vec<usize>,
    /// cPPO only: allowed mean episode cost.
    #[serde(default = "d_cost_limit")]
    pub cost_limit: f64,
    /// cPPO only: dual ascent step size.
    #[serde(default = "d_dual_lr")]
    pub dual_lr: f64,
    /// cPPO only: starting multiplier.
    #[serde(default)]
    pub lambda_init: f64,
}

impl TrainerConfig {
    pub fn defaults(algorithm: Algorithm) -> TrainerConfig {
        TrainerConfig {
            algorithm,
            gamma: d_gamma(),
            gae_lambda: d_gae_lambda(),
            clip_eps: d_clip_eps(),
            policy_lr: d_policy_lr(),
            value_lr: d_value_lr(),
            update_minibatch: d_minibatch(),
            update_passes: d_passes(),
            target_kl: d_target_kl(),
            steps_per_epoch: d_steps_per_epoch(),
            max_epochs: d_max_epochs(),
            hidden_sizes: d_hidden(),
            cost_limit: d_cost_limit(),
            dual_lr: d_dual_lr(),
            lambda_init: 0.0,
        }
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // negated guards also reject NaN
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config("gamma must be in (0, 1]"));
        }
        if !(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0) {
            return Err(Error::config("gae_lambda must be in (0, 1]"));
        }
        if !(self.clip_eps > 0.0 && self.clip_eps < 1.0) {
            return Err(Error::config("clip_eps must be in (0, 1)"));
        }
        if !(self.policy_lr > 0.0 && self.value_lr > 0.0 && self.target_kl > 0.0) {
            return Err(Error::config("learning rates and target_kl must be > 0"));
        }
        if self.update_minibatch == 0 || self.update_passes == 0 || self.steps_per_epoch == 0 {
            return Err(Error::config("update sizes must be >= 1"));
        }
        if self.max_epochs == 0 {
            return Err(Error::config("max_epochs must be >= 1"));
        }
        if self.hidden_sizes.is_empty() {
            return Err(Error::config("at least one hidden layer is required"));
        }
        if self.dual_lr < 0.0 || self.lambda_init < 0.0 {
            return Err(Error::config("dual_lr and lambda_init must be >= 0"));
        }
        Ok(())
    }
}

/// Per-epoch training metrics. The CSV log keeps the first nine fields; the
/// rest are in-memory diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub mean_ep_reward: f64,
    pub mean_ep_cost: f64,
    pub mean_ep_len: f64,
    pub lambda: f64,
    pub kl: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub cost_value_loss: f64,
    #[serde(default)]
    pub episodes: usize,
    #[serde(default)]
    pub success_rate: f64,
    #[serde(default)]
    pub kl_early_stop: bool,
}

/// Owns the networks, optimizer states, and RNG streams of one training run.
pub struct Trainer {
    pub cfg: TrainerConfig,
    pub policy: GaussianPolicy,
    pub value_r: Mlp,
    pub value_c: Mlp,
    pub lagrange: Option<LagrangeState>,
    opt_mean: AdamState,
    opt_log_std: AdamState,
    opt_value_r: AdamState,
    opt_value_c: AdamState,
    rollout_rng: Rng,
    shuffle_rng: Rng,
    epochs_done: usize,
}

impl Trainer {
    /// Network shapes derive from the dimensions; every stream (inits,
    /// rollouts, shuffles) is derived from `seed` by label, so PPO and cPPO
    /// trainers with the same seed start bit-identically.
    pub fn new(cfg: TrainerConfig, obs_dim: usize, act_dim: usize, seed: u64) -> Result<Trainer> {
        cfg.validate()?;
        let root = Rng::from_seed(seed);
        let policy = GaussianPolicy::new(obs_dim, act_dim, &cfg.hidden_sizes, &mut root.derive("policy-init"));
        let mut value_dims = vec![obs_dim];
        value_dims.extend_from_slice(&cfg.hidden_sizes);
        value_dims.push(1);
        let value_r = Mlp::init(&value_dims, 2.0f64.sqrt(), 1.0, &mut root.derive("value-r-init"));
        let value_c = Mlp::init(&value_dims, 2.0f64.sqrt(), 1.0, &mut root.derive("value-c-init"));
        let lagrange = match cfg.algorithm {
            Algorithm::Ppo => None,
            Algorithm::Cppo => Some(LagrangeState::new(cfg.cost_limit, cfg.dual_lr, cfg.lambda_init)),
        };
        Ok(Trainer {
            opt_mean: AdamState::new(policy.mean.params().len()),
            opt_log_std: AdamState::new(act_dim),
            opt_value_r: AdamState::new(value_r.params().len()),
            opt_value_c: AdamState::new(value_c.params().len()),
            rollout_rng: root.derive("rollout"),
            shuffle_rng: root.derive("shuffle"),
            policy,
            value_r,
            value_c,
            lagrange,
            cfg,
            epochs_done: 0,
        })
    }

    pub fn epochs_done(&self) -> usize {
        self.epochs_done
    }

    pub fn lambda(&self) -> f64 {
        self.lagrange.as_ref().map_or(0.0, |l| l.lambda)
    }

    /// Collect one epoch of experience and run the clipped-surrogate update.
    pub fn train_epoch<E: Environment>(&mut self, env: &mut E) -> Result<EpochMetrics> {
        let mut buf = collect_rollout(
            &self.policy,
            &self.value_r,
            &self.value_c,
            env,
            self.cfg.steps_per_epoch,
            &mut self.rollout_rng,
        )?;
        buf.compute_advantages(self.cfg.gamma, self.cfg.gae_lambda);

        let mean_ep_cost = buf.mean_episode_cost();
        // dual ascent first, so this epoch's penalty uses the updated multiplier
        if let Some(lagrange) = &mut self.lagrange {
            lagrange.update(mean_ep_cost);
        }
        let mut advantages = match &self.lagrange {
            Some(lagrange) => penalized_advantage(&buf.adv_r, &buf.adv_c, lagrange.lambda),
            None => buf.adv_r.clone(),
        };
        normalize_advantages(&mut advantages);

        let stats = self.run_updates(&buf, &advantages)?;

        self.epochs_done += 1;
        let metrics = EpochMetrics {
            epoch: self.epochs_done,
            mean_ep_reward: buf.mean_episode_reward(),
            mean_ep_cost,
            mean_ep_len: buf.mean_episode_len(),
            lambda: self.lambda(),
            kl: stats.kl,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            cost_value_loss: stats.cost_value_loss,
            episodes: buf.episode_lens.len(),
            success_rate: if buf.episode_lens.is_empty() {
                0.0
            } else {
                buf.episode_successes as f64 / buf.episode_lens.len() as f64
            },
            kl_early_stop: stats.kl_early_stop,
        };
        if !metrics.policy_loss.is_finite()
            || !metrics.value_loss.is_finite()
            || !metrics.cost_value_loss.is_finite()
        {
            return Err(Error::numerical(format!(
                "non-finite loss at epoch {}: policy {}, value {}, cost value {}, lambda {}",
                metrics.epoch,
                metrics.policy_loss,
                metrics.value_loss,
                metrics.cost_value_loss,
                metrics.lambda
            )));
        }
        Ok(metrics)
    }

    /// Sample KL estimate mean(logp_old - logp_new) over the whole rollout.
    fn full_batch_kl(&self, buf: &RolloutBuffer) -> Result<f64> {
        let mut kl = 0.0;
        for i in 0..buf.len() {
            let logp_new = self.policy.log_prob(&buf.obs[i], &buf.actions[i])?;
            kl += (buf.log_probs[i] - logp_new) / buf.len() as f64;
        }
        Ok(kl)
    }

    fn run_updates(&mut self, buf: &RolloutBuffer, advantages: &[f64]) -> Result<UpdateStats> {
        let n = buf.len();
        let mut idx: Vec<usize> = (0..n).collect();
        let mut kl_stopped = false;
        let mut last_kl = 0.0;
        let mut policy_losses = Vec::new();
        let mut value_losses = Vec::new();
        let mut cost_value_losses = Vec::new();

        for _ in 0..self.cfg.update_passes {
            self.shuffle_rng.shuffle(&mut idx);
            // KL guard at pass boundaries: once the full-batch estimate exceeds
            // target_kl, policy updates stop for this epoch (values continue)
            if !kl_stopped {
                let kl = self.full_batch_kl(buf)?;
                last_kl = kl;
                if kl > self.cfg.target_kl {
                    kl_stopped = true;
                }
            }
            for chunk in idx.chunks(self.cfg.update_minibatch) {
                if !kl_stopped {
                    let mut mean_grads = self.policy.mean.zeros_like();
                    let mut log_std_grads = vec![0.0; self.policy.act_dim()];
                    let stats = ppo_policy_loss(
                        &self.policy,
                        &buf.obs,
                        &buf.actions,
                        &buf.log_probs,
                        advantages,
                        chunk,
                        self.cfg.clip_eps,
                        &mut mean_grads,
                        &mut log_std_grads,
                    )?;
                    policy_losses.push(stats.loss);
                    self.opt_mean.update(
                        self.policy.mean.params_mut(),
                        &mean_grads,
                        self.cfg.policy_lr,
                    )?;
                    self.opt_log_std.update(
                        &mut self.policy.log_std,
                        &log_std_grads,
                        self.cfg.policy_lr,
                    )?;
                    self.policy.clamp_log_std();
                }

                let mut vr_grads = self.value_r.zeros_like();
                let loss_r = value_loss(&self.value_r, &buf.obs, &buf.ret_r, chunk, &mut vr_grads)?;
                self.opt_value_r
                    .update(self.value_r.params_mut(), &vr_grads, self.cfg.value_lr)?;
                value_losses.push(loss_r);

                if self.lagrange.is_some() {
                    let mut vc_grads = self.value_c.zeros_like();
                    let loss_c =
                        value_loss(&self.value_c, &buf.obs, &buf.ret_c, chunk, &mut vc_grads)?;
                    self.opt_value_c
                        .update(self.value_c.params_mut(), &vc_grads, self.cfg.value_lr)?;
                    cost_value_losses.push(loss_c);
                }
            }
        }
        // final measurement so the logged KL reflects the applied updates
        if !kl_stopped {
            last_kl = self.full_batch_kl(buf)?;
        }

        let mean = |xs: &[f64]| {
            if xs.is_empty() {
                0.0
            } else {
                xs.iter().sum::<f64>() / xs.len() as f64
            }
        };
        Ok(UpdateStats {
            kl: last_kl,
            policy_loss: mean(&policy_losses),
            value_loss: mean(&value_losses),
            cost_value_loss: mean(&cost_value_losses),
            kl_early_stop: kl_stopped,
        })
    }

    /// All trainable parameters as named tensors for checkpointing.
    pub fn checkpoint_tensors(&self) -> Vec<NamedTensor> {
        let mut tensors = Vec::new();
        for (name, shape, data) in self.policy.mean.tensors("policy.mean") {
            tensors.push(NamedTensor { name, shape, data });
        }
        tensors.push(NamedTensor {
            name: "policy.log_std".into(),
            shape: vec![self.policy.log_std.len()],
            data: self.policy.log_std.clone(),
        });
        for (name, shape, data) in self.value_r.tensors("value_r") {
            tensors.push(NamedTensor { name, shape, data });
        }
        for (name, shape, data) in self.value_c.tensors("value_c") {
            tensors.push(NamedTensor { name, shape, data });
        }
        tensors
    }
}

struct UpdateStats {
    kl: f64,
    policy_loss: f64,
    value_loss: f64,
    cost_value_loss: f64,
    kl_early_stop: bool,
}
