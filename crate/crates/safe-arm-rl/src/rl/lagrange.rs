//! Projected dual ascent on the Lagrange multiplier.

use serde::{Deserialize, Serialize};

/// Dual variable for the episode-cost constraint J_c <= cost_limit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagrangeState {
    /// Multiplier, kept >= 0 by projection.
    pub lambda: f64,
    /// Allowed expected episode cost.
    pub cost_limit: f64,
    pub dual_lr: f64,
}

impl LagrangeState {
    pub fn new(cost_limit: f64, dual_lr: f64, lambda_init: f64) -> LagrangeState {
        LagrangeState {
            lambda: lambda_init.max(0.0),
            cost_limit,
            dual_lr,
        }
    }

    /// Projected gradient step: lambda <- max(0, lambda + lr * (cost - limit)).
    pub fn update(&mut self, mean_episode_cost: f64) {
        self.lambda = (self.lambda + self.dual_lr * (mean_episode_cost - self.cost_limit)).max(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_at_limit_leaves_lambda_unchanged() {
        let mut s = LagrangeState::new(10.0, 0.05, 0.3);
        s.update(10.0);
        assert_eq!(s.lambda, 0.3);
    }

    #[test]
    fn projection_keeps_lambda_at_zero() {
        let mut s = LagrangeState::new(10.0, 0.05, 0.0);
        s.update(2.0);
        assert_eq!(s.lambda, 0.0);
    }

    #[test]
    fn ascent_arithmetic() {
        let mut s = LagrangeState::new(10.0, 0.05, 0.5);
        s.update(12.0);
        assert!((s.lambda - 0.6).abs() < 1e-12);
    }

    #[test]
    fn monotone_response_to_cost_signal() {
        let mut s = LagrangeState::new(5.0, 0.1, 1.0);
        let before = s.lambda;
        s.update(7.0);
        assert!(s.lambda > before);
        let above = s.lambda;
        s.update(3.0);
        assert!(s.lambda < above);
    }
}
