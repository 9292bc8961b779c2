//! PPO and Lagrangian-constrained PPO: rollout collection, reward/cost GAE,
//! the clipped surrogate, value regression, and projected dual ascent.

mod buffer;
mod gae;
mod lagrange;
mod ppo;
mod trainer;

pub use buffer::{collect_rollout, RolloutBuffer};
pub use gae::compute_gae;
pub use lagrange::LagrangeState;
pub use ppo::{normalize_advantages, penalized_advantage, ppo_policy_loss, value_loss, PolicyLossStats};
pub use trainer::{Algorithm, EpochMetrics, Trainer, TrainerConfig};
