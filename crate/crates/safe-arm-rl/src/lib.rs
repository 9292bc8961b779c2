//! Constrained reinforcement learning for a simulated n-DoF robotic arm.
//!
//! The crate trains a policy to reach a target while avoiding a box obstacle,
//! comparing plain PPO against its Lagrangian-constrained version (cPPO) under
//! two action representations (Cartesian tip deltas via IK, or direct joint
//! deltas). Everything is self-contained: kinematics, collision queries, the
//! environment, the dense-network substrate, the trainers, and the experiment
//! harness.

pub mod collision;
pub mod env;
pub mod error;
pub mod harness;
pub mod kinematics;
pub mod math;
pub mod neural;
pub mod rl;
pub mod rng;

pub use error::{Error, Result};
