//! The reach-with-obstacle task: episodic environment with dense distance
//! reward, binary collision cost, and two action representations.
//!
//! AR1 actions are Cartesian tip deltas resolved to joint motion by inverse
//! kinematics; AR2 actions are direct joint-angle deltas. Reward is the
//! negated tip-target distance. Cost is 1 on any step where a link capsule
//! touches the obstacle box, 0 otherwise; collisions never terminate the
//! episode, only success or the step limit do.

use crate::collision::{arm_obstacle_query, Aabb};
use crate::error::{Error, Result};
use crate::kinematics::{ArmModel, IkParams, JointVector};
use crate::math::Vec3;
use crate::rng::Rng;
use serde::{Deserialize, Serialize};

/// How policy outputs map onto arm motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionRepr {
    /// Cartesian tip delta `[dx, dy, dz]`, resolved via inverse kinematics.
    Ar1,
    /// One angle delta per joint, applied directly.
    Ar2,
}

impl std::fmt::Display for ActionRepr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ActionRepr::Ar1 => write!(f, "ar1"),
            ActionRepr::Ar2 => write!(f, "ar2"),
        }
    }
}

fn default_arm() -> ArmModel {
    ArmModel::default_panda()
}
fn default_max_steps() -> usize {
    500
}
fn default_cart_scale() -> f64 {
    0.05
}
fn default_joint_scale() -> f64 {
    0.05
}
fn default_success_radius() -> f64 {
    0.05
}
fn default_target_region() -> Aabb {
    Aabb::new(Vec3::new(0.30, -0.10, 0.03), Vec3::new(0.50, 0.10, 0.23))
}
fn default_obstacle_region() -> Aabb {
    Aabb::new(Vec3::new(0.16, -0.08, 0.05), Vec3::new(0.30, 0.08, 0.05))
}
fn default_obstacle_size() -> Vec3 {
    Vec3::new(0.10, 0.10, 0.10)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvConfig {
    #[serde(default = "default_arm")]
    pub arm: ArmModel,
    pub action_repr: ActionRepr,
    #[serde(default = "default_max_steps")]
    pub max_episode_steps: usize,
    /// Meters of tip motion per unit of AR1 action.
    #[serde(default = "default_cart_scale")]
    pub action_scale_cart: f64,
    /// Radians of joint motion per unit of AR2 action.
    #[serde(default = "default_joint_scale")]
    pub action_scale_joint: f64,
    #[serde(default = "default_success_radius")]
    pub success_radius: f64,
    /// Sampling volume for the target point.
    #[serde(default = "default_target_region")]
    pub target_region: Aabb,
    /// Sampling volume for the obstacle center.
    #[serde(default = "default_obstacle_region")]
    pub obstacle_region: Aabb,
    #[serde(default = "default_obstacle_size")]
    pub obstacle_size: Vec3,
    #[serde(default)]
    pub seed: u64,
}

impl EnvConfig {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // negated guards also reject NaN
    pub fn validate(&self) -> Result<()> {
        self.arm.validate()?;
        if self.max_episode_steps < 1 {
            return Err(Error::config("max_episode_steps must be >= 1"));
        }
        if !(self.action_scale_cart > 0.0) || !(self.action_scale_joint > 0.0) {
            return Err(Error::config("action scales must be > 0"));
        }
        if !(self.success_radius > 0.0) {
            return Err(Error::config("success_radius must be > 0"));
        }
        if !self.target_region.is_valid() || !self.obstacle_region.is_valid() {
            return Err(Error::config("sampling regions must have min <= max"));
        }
        if !(self.obstacle_size.x > 0.0 && self.obstacle_size.y > 0.0 && self.obstacle_size.z > 0.0)
        {
            return Err(Error::config("obstacle_size must be positive"));
        }
        Ok(())
    }

    pub fn observation_dim(&self) -> usize {
        match self.action_repr {
            ActionRepr::Ar1 => 9,
            ActionRepr::Ar2 => self.arm.dof() + 9,
        }
    }

    pub fn action_dim(&self) -> usize {
        match self.action_repr {
            ActionRepr::Ar1 => 3,
            ActionRepr::Ar2 => self.arm.dof(),
        }
    }
}

/// Per-step diagnostics beyond (obs, reward, cost, done).
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub distance: f64,
    pub min_clearance: f64,
    pub success: bool,
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// 1.0 while any link touches the obstacle, else 0.0.
    pub cost: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Dense reward: negated Euclidean tip-target distance (maximum 0 at contact).
pub fn compute_reward(tip: Vec3, target: Vec3) -> f64 {
    -(tip - target).norm()
}

/// Episodic environment interface consumed by the rollout collector.
pub trait Environment {
    fn reset(&mut self) -> Result<Vec<f64>>;
    fn step(&mut self, action: &[f64]) -> Result<StepResult>;
    fn observation_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
}

/// One episodic environment instance. Single-owner mutable state; run several
/// instances (each with its own RNG stream) for parallel collection.
#[derive(Debug, Clone)]
pub struct ReachEnv {
    cfg: EnvConfig,
    ik: IkParams,
    rng: Rng,
    q: JointVector,
    tip: Vec3,
    target: Vec3,
    obstacle: Aabb,
    step_count: usize,
    radii: Vec<f64>,
}

const PLACEMENT_ATTEMPTS: usize = 100;

impl ReachEnv {
    pub fn new(cfg: EnvConfig) -> Result<ReachEnv> {
        let rng = Rng::from_seed(cfg.seed).derive("env");
        ReachEnv::with_stream(cfg, rng)
    }

    /// Build with an explicit RNG stream (worker streams in parallel collection).
    pub fn with_stream(cfg: EnvConfig, rng: Rng) -> Result<ReachEnv> {
        cfg.validate()?;
        let q = cfg.arm.clamp_joints(&vec![0.0; cfg.arm.dof()])?;
        let tip = cfg.arm.forward_kinematics(&q)?.tip;
        let radii = cfg.arm.collision_radii();
        Ok(ReachEnv {
            cfg,
            ik: IkParams::default(),
            rng,
            q,
            tip,
            target: Vec3::ZERO,
            obstacle: Aabb::new(Vec3::ZERO, Vec3::ZERO),
            step_count: 0,
            radii,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn joint_angles(&self) -> &JointVector {
        &self.q
    }

    pub fn tip(&self) -> Vec3 {
        self.tip
    }

    pub fn target(&self) -> Vec3 {
        self.target
    }

    pub fn obstacle(&self) -> Aabb {
        self.obstacle
    }

    fn sample_in(rng: &mut Rng, region: &Aabb) -> Vec3 {
        Vec3::new(
            rng.range(region.min_corner.x, region.max_corner.x),
            rng.range(region.min_corner.y, region.max_corner.y),
            rng.range(region.min_corner.z, region.max_corner.z),
        )
    }

    /// Obstacle placement rule: the box must not contain the target, and its
    /// center must sit between base and target along the base->target bearing
    /// (projection inside the segment, small lateral offset from the line).
    fn obstacle_placement_ok(&self, center: Vec3, target: Vec3) -> bool {
        let bx = Aabb::centered(center, self.cfg.obstacle_size);
        if bx.contains(target) {
            return false;
        }
        let base = self.cfg.arm.base_pose.trans;
        let to_target = Vec3::new(target.x - base.x, target.y - base.y, 0.0);
        let span = to_target.norm();
        if span < 1e-9 {
            return true;
        }
        let dir = to_target * (1.0 / span);
        let rel = Vec3::new(center.x - base.x, center.y - base.y, 0.0);
        let along = rel.dot(dir);
        if along <= 0.0 || along >= span {
            return false;
        }
        let lateral = (rel - dir * along).norm();
        lateral <= 0.25 * (self.cfg.obstacle_size.x + self.cfg.obstacle_size.y) + 0.01
    }

    /// Home the arm, sample a fresh (target, obstacle) pair, return the initial
    /// observation.
    pub fn reset(&mut self) -> Result<Vec<f64>> {
        self.q = self.cfg.arm.clamp_joints(&vec![0.0; self.cfg.arm.dof()])?;
        self.tip = self.cfg.arm.forward_kinematics(&self.q)?.tip;
        self.target = Self::sample_in(&mut self.rng, &self.cfg.target_region);

        let mut placed = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let center = Self::sample_in(&mut self.rng, &self.cfg.obstacle_region);
            if self.obstacle_placement_ok(center, self.target) {
                self.obstacle = Aabb::centered(center, self.cfg.obstacle_size);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::config(
                "obstacle placement failed 100 times; regions are infeasible",
            ));
        }
        self.step_count = 0;
        Ok(self.observation())
    }

    pub fn observation(&self) -> Vec<f64> {
        let mut obs = Vec::with_capacity(self.cfg.observation_dim());
        if self.cfg.action_repr == ActionRepr::Ar2 {
            obs.extend_from_slice(self.q.as_slice());
        }
        obs.extend_from_slice(&self.tip.to_array());
        obs.extend_from_slice(&self.target.to_array());
        obs.extend_from_slice(&self.obstacle.center().to_array());
        obs
    }

    /// Advance one step. Components of `action` are clipped to [-1, 1].
    pub fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let want = self.cfg.action_dim();
        if action.len() != want {
            return Err(Error::contract(format!(
                "action has {} components, expected {want}",
                action.len()
            )));
        }
        let a: Vec<f64> = action.iter().map(|v| v.clamp(-1.0, 1.0)).collect();

        match self.cfg.action_repr {
            ActionRepr::Ar1 => {
                let delta = Vec3::new(a[0], a[1], a[2]) * self.cfg.action_scale_cart;
                let desired = self.tip + delta;
                self.q = self.cfg.arm.solve_ik_delta(&self.q, desired, &self.ik)?;
            }
            ActionRepr::Ar2 => {
                let raw: Vec<f64> = self
                    .q
                    .as_slice()
                    .iter()
                    .zip(&a)
                    .map(|(&qi, &ai)| qi + ai * self.cfg.action_scale_joint)
                    .collect();
                self.q = self.cfg.arm.clamp_joints(&raw)?;
            }
        }

        let frames = self.cfg.arm.forward_kinematics(&self.q)?;
        self.tip = frames.tip;
        let distance = (self.tip - self.target).norm();
        let reward = compute_reward(self.tip, self.target);
        let query = arm_obstacle_query(&frames, &self.radii, &[self.obstacle]);
        let cost = if query.any_collision { 1.0 } else { 0.0 };

        self.step_count += 1;
        let success = distance < self.cfg.success_radius;
        let done = success || self.step_count >= self.cfg.max_episode_steps;
        let truncated = done && !success;

        Ok(StepResult {
            obs: self.observation(),
            reward,
            cost,
            done,
            info: StepInfo {
                distance,
                min_clearance: query.min_clearance,
                success,
                truncated,
            },
        })
    }
}

impl Environment for ReachEnv {
    fn reset(&mut self) -> Result<Vec<f64>> {
        ReachEnv::reset(self)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        ReachEnv::step(self, action)
    }

    fn observation_dim(&self) -> usize {
        self.cfg.observation_dim()
    }

    fn action_dim(&self) -> usize {
        self.cfg.action_dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ar1_cfg(seed: u64) -> EnvConfig {
        EnvConfig {
            arm: ArmModel::default_panda(),
            action_repr: ActionRepr::Ar1,
            max_episode_steps: 500,
            action_scale_cart: 0.05,
            action_scale_joint: 0.05,
            success_radius: 0.05,
            target_region: default_target_region(),
            obstacle_region: default_obstacle_region(),
            obstacle_size: default_obstacle_size(),
            seed,
        }
    }

    fn ar2_cfg(seed: u64) -> EnvConfig {
        EnvConfig {
            action_repr: ActionRepr::Ar2,
            ..ar1_cfg(seed)
        }
    }

    #[test]
    fn reset_is_deterministic_per_seed() {
        let mut a = ReachEnv::new(ar1_cfg(5)).unwrap();
        let mut b = ReachEnv::new(ar1_cfg(5)).unwrap();
        let oa = a.reset().unwrap();
        let ob = b.reset().unwrap();
        assert_eq!(oa, ob);
        assert_eq!(a.target().to_array(), b.target().to_array());
        assert_eq!(a.obstacle().min_corner.to_array(), b.obstacle().min_corner.to_array());
    }

    #[test]
    fn observation_shapes() {
        let mut e1 = ReachEnv::new(ar1_cfg(1)).unwrap();
        let mut e2 = ReachEnv::new(ar2_cfg(1)).unwrap();
        assert_eq!(e1.reset().unwrap().len(), 9);
        assert_eq!(e2.reset().unwrap().len(), 16);
    }

    #[test]
    fn obstacle_never_contains_target_over_many_resets() {
        let mut env = ReachEnv::new(ar1_cfg(17)).unwrap();
        for _ in 0..1000 {
            env.reset().unwrap();
            assert!(!env.obstacle().contains(env.target()));
        }
    }

    #[test]
    fn obstacle_sits_between_base_and_target() {
        let mut env = ReachEnv::new(ar1_cfg(23)).unwrap();
        for _ in 0..200 {
            env.reset().unwrap();
            let c = env.obstacle().center();
            let t = env.target();
            let dir = Vec3::new(t.x, t.y, 0.0).normalized();
            let along = Vec3::new(c.x, c.y, 0.0).dot(dir);
            assert!(along > 0.0 && along < Vec3::new(t.x, t.y, 0.0).norm());
        }
    }

    #[test]
    fn zero_action_ar2_leaves_joints_unchanged() {
        let mut env = ReachEnv::new(ar2_cfg(3)).unwrap();
        env.reset().unwrap();
        let q0 = env.joint_angles().clone();
        let tip0 = env.tip();
        let r = env.step(&[0.0; 7]).unwrap();
        assert_eq!(env.joint_angles().as_slice(), q0.as_slice());
        let d = (tip0 - env.target()).norm();
        assert!((r.reward + d).abs() < 1e-12);
    }

    #[test]
    fn ar1_step_moves_tip_by_scaled_action() {
        let mut env = ReachEnv::new(ar1_cfg(7)).unwrap();
        env.reset().unwrap();
        let tip0 = env.tip();
        env.step(&[1.0, 0.0, 0.0]).unwrap();
        let tip1 = env.tip();
        // IK residual tolerance: new tip x within 1e-3 of tip0.x + 0.05
        assert!(
            (tip1.x - (tip0.x + 0.05)).abs() < 1e-3,
            "tip0.x {} tip1.x {}",
            tip0.x,
            tip1.x
        );
    }

    #[test]
    fn action_dimension_mismatch_is_contract_error() {
        let mut env = ReachEnv::new(ar1_cfg(1)).unwrap();
        env.reset().unwrap();
        assert!(matches!(env.step(&[0.0; 7]), Err(Error::Contract(_))));
    }

    #[test]
    fn success_terminates_episode() {
        let mut env = ReachEnv::new(ar1_cfg(11)).unwrap();
        env.reset().unwrap();
        // drive straight at the target with greedy cartesian actions
        let mut done = false;
        for _ in 0..200 {
            let d = env.target() - env.tip();
            let a = [
                (d.x / 0.05).clamp(-1.0, 1.0),
                (d.y / 0.05).clamp(-1.0, 1.0),
                (d.z / 0.05).clamp(-1.0, 1.0),
            ];
            let r = env.step(&a).unwrap();
            if r.done {
                assert!(r.info.success);
                assert!(r.info.distance < 0.05);
                done = true;
                break;
            }
        }
        assert!(done, "greedy policy should reach the target");
    }

    #[test]
    fn episode_truncates_at_step_limit() {
        let mut cfg = ar2_cfg(9);
        cfg.max_episode_steps = 5;
        let mut env = ReachEnv::new(cfg).unwrap();
        env.reset().unwrap();
        let mut last = None;
        for _ in 0..5 {
            last = Some(env.step(&[0.0; 7]).unwrap());
        }
        let last = last.unwrap();
        assert!(last.done);
        assert!(last.info.truncated);
        assert!(!last.info.success);
    }

    #[test]
    fn cost_matches_collision_query_equivalence() {
        let mut env = ReachEnv::new(ar1_cfg(41)).unwrap();
        env.reset().unwrap();
        let mut saw_cost = false;
        for _ in 0..300 {
            let d = env.target() - env.tip();
            let a = [
                (d.x / 0.05).clamp(-1.0, 1.0),
                (d.y / 0.05).clamp(-1.0, 1.0),
                (d.z / 0.05).clamp(-1.0, 1.0),
            ];
            let r = env.step(&a).unwrap();
            let frames = env.cfg.arm.forward_kinematics(env.joint_angles()).unwrap();
            let q = arm_obstacle_query(&frames, &env.radii, &[env.obstacle()]);
            assert_eq!(r.cost == 1.0, q.any_collision);
            saw_cost |= r.cost == 1.0;
            if r.done {
                env.reset().unwrap();
            }
        }
        // the default layout must actually exercise the cost signal
        assert!(saw_cost, "greedy trajectories never touched the obstacle");
    }

    #[test]
    fn trajectory_is_pure_function_of_seed_and_actions() {
        let actions: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![((i * 7) % 13) as f64 / 6.5 - 1.0; 3])
            .collect();
        let run = |seed: u64| -> Vec<(Vec<f64>, f64, f64)> {
            let mut env = ReachEnv::new(ar1_cfg(seed)).unwrap();
            env.reset().unwrap();
            actions
                .iter()
                .map(|a| {
                    let r = env.step(a).unwrap();
                    (r.obs, r.reward, r.cost)
                })
                .collect()
        };
        assert_eq!(run(13), run(13));
        assert_ne!(run(13), run(14));
    }

    #[test]
    fn reward_bounds_hold() {
        let mut env = ReachEnv::new(ar2_cfg(29)).unwrap();
        env.reset().unwrap();
        let bound = env.cfg.arm.reach() + (env.target() - env.cfg.arm.base_pose.trans).norm();
        for i in 0..200 {
            let a: Vec<f64> = (0..7).map(|j| (((i + j) % 5) as f64 - 2.0) / 2.0).collect();
            let r = env.step(&a).unwrap();
            assert!(r.reward <= 0.0);
            assert!(r.reward >= -bound);
            if r.done {
                env.reset().unwrap();
            }
        }
    }

    #[test]
    fn reward_is_negated_distance() {
        assert_eq!(compute_reward(Vec3::new(0.2, 0.1, 0.3), Vec3::new(0.2, 0.1, 0.3)), 0.0);
        assert_eq!(compute_reward(Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO), -1.0);
        // strictly increasing as the tip approaches along a ray
        let target = Vec3::new(0.4, 0.0, 0.1);
        let dir = Vec3::new(1.0, 2.0, -0.5).normalized();
        let mut prev = f64::NEG_INFINITY;
        for k in (1..=10).rev() {
            let r = compute_reward(target + dir * (0.05 * k as f64), target);
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn generic_arm_shapes_flow_through_ar2() {
        // a 2-DoF planar arm gives 11-dim observations and 2-dim actions
        let mut cfg = ar2_cfg(31);
        cfg.arm = crate::kinematics::tests::planar_two_joint_arm();
        cfg.target_region = Aabb::new(Vec3::new(0.8, -0.5, -0.1), Vec3::new(1.6, 0.5, 0.1));
        cfg.obstacle_region = Aabb::new(Vec3::new(0.3, -0.3, 0.0), Vec3::new(0.7, 0.3, 0.0));
        assert_eq!(cfg.observation_dim(), 11);
        assert_eq!(cfg.action_dim(), 2);
        let mut env = ReachEnv::new(cfg).unwrap();
        let obs = env.reset().unwrap();
        assert_eq!(obs.len(), 11);
        let r = env.step(&[0.3, -0.2]).unwrap();
        assert_eq!(r.obs.len(), 11);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = ar1_cfg(99);
        let json = serde_json::to_string(&cfg).unwrap();
        let back: EnvConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.seed, 99);
        assert_eq!(back.action_repr, ActionRepr::Ar1);
        assert_eq!(back.observation_dim(), 9);
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg: EnvConfig = serde_json::from_str(r#"{"action_repr":"ar2"}"#).unwrap();
        assert_eq!(cfg.max_episode_steps, 500);
        assert_eq!(cfg.arm.dof(), 7);
        assert_eq!(cfg.observation_dim(), 16);
    }
}
