//! Diagonal-Gaussian policy head over an MLP mean network.

use super::mlp::{Mlp, MlpCache};
use crate::error::{Error, Result};
use crate::rng::Rng;

const LOG_STD_MIN: f64 = -5.0;
const LOG_STD_MAX: f64 = 2.0;
const HALF_LOG_TAU: f64 = 0.918_938_533_204_672_8; // 0.5 * ln(2*pi)

/// Policy with a state-dependent mean and state-independent log standard
/// deviations (clamped to [-5, 2] after every update).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    pub mean: Mlp,
    pub log_std: Vec<f64>,
}

impl GaussianPolicy {
    pub fn new(obs_dim: usize, act_dim: usize, hidden: &[usize], rng: &mut Rng) -> GaussianPolicy {
        let mut dims = vec![obs_dim];
        dims.extend_from_slice(hidden);
        dims.push(act_dim);
        GaussianPolicy {
            mean: Mlp::init(&dims, 2.0f64.sqrt(), 0.01, rng),
            log_std: vec![-0.5; act_dim],
        }
    }

    pub fn act_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn clamp_log_std(&mut self) {
        for v in &mut self.log_std {
            *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }

    pub(crate) fn log_prob_of(&self, mean: &[f64], action: &[f64]) -> f64 {
        mean.iter()
            .zip(action)
            .zip(&self.log_std)
            .map(|((&mu, &a), &ls)| {
                let sigma = ls.exp();
                let z = (a - mu) / sigma;
                -0.5 * z * z - ls - HALF_LOG_TAU
            })
            .sum()
    }

    /// Log density of `action` under the policy at `obs`.
    pub fn log_prob(&self, obs: &[f64], action: &[f64]) -> Result<f64> {
        if action.len() != self.act_dim() {
            return Err(Error::contract("action dimension mismatch"));
        }
        let mean = self.mean.forward_value(obs)?;
        Ok(self.log_prob_of(&mean, action))
    }

    /// Draw an action and return its log probability.
    pub fn sample(&self, obs: &[f64], rng: &mut Rng) -> Result<(Vec<f64>, f64)> {
        let mean = self.mean.forward_value(obs)?;
        let action: Vec<f64> = mean
            .iter()
            .zip(&self.log_std)
            .map(|(&mu, &ls)| mu + ls.exp() * rng.normal())
            .collect();
        let logp = self.log_prob_of(&mean, &action);
        Ok((action, logp))
    }

    /// Mean action (deterministic evaluation).
    pub fn mean_action(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.mean.forward_value(obs)
    }

    /// Forward pass that keeps the mean-net cache for a later backward call.
    pub fn forward_cached(&self, obs: &[f64]) -> Result<(Vec<f64>, MlpCache)> {
        self.mean.forward(obs)
    }

    /// Accumulate d(coeff * log_prob)/d(params) into the gradient buffers.
    ///
    /// `mean` / `cache` must come from `forward_cached` on the same `obs`.
    /// Mean-net gradients go to `mean_grads` (flat layout), log-std gradients
    /// to `log_std_grads`.
    pub fn accumulate_log_prob_grads(
        &self,
        cache: &MlpCache,
        mean: &[f64],
        action: &[f64],
        coeff: f64,
        mean_grads: &mut [f64],
        log_std_grads: &mut [f64],
    ) -> Result<()> {
        let mut grad_mu = vec![0.0; self.act_dim()];
        for (i, ((&mu, &a), &ls)) in mean.iter().zip(action).zip(&self.log_std).enumerate() {
            let inv_var = (-2.0 * ls).exp();
            // d logp / d mu_i and d logp / d log_std_i
            grad_mu[i] = coeff * (a - mu) * inv_var;
            log_std_grads[i] += coeff * ((a - mu) * (a - mu) * inv_var - 1.0);
        }
        self.mean.backward(cache, &grad_mu, mean_grads)?;
        Ok(())
    }
}
