//! Browser demo for the reaching arm: interactive inverse kinematics,
//! obstacle clearance queries, and live PPO / constrained-PPO training,
//! compiled to WebAssembly behind a thin wasm-bindgen layer.
//!
//! All state lives in plain structs so the logic also runs (and is tested)
//! natively; the `#[wasm_bindgen]` exports just forward to them.

use safe_arm_rl::collision::{arm_obstacle_query, Aabb};
use safe_arm_rl::env::{EnvConfig, ReachEnv};
use safe_arm_rl::kinematics::{ArmModel, IkParams, JointVector};
use safe_arm_rl::math::Vec3;
use safe_arm_rl::rl::{Algorithm, Trainer, TrainerConfig};
use wasm_bindgen::prelude::*;

fn desk_trainer_config(algorithm: Algorithm) -> TrainerConfig {
    TrainerConfig {
        policy_lr: 1e-3,
        value_lr: 3e-3,
        steps_per_epoch: 600,
        max_epochs: 60,
        cost_limit: 8.0,
        dual_lr: 5e-4,
        lambda_init: 0.3,
        ..TrainerConfig::defaults(algorithm)
    }
}

fn demo_env_config(seed: u64) -> EnvConfig {
    let mut cfg: EnvConfig = serde_json::from_str(r#"{"action_repr":"ar1"}"#).expect("static config");
    cfg.max_episode_steps = 200;
    cfg.success_radius = 0.03;
    cfg.target_region = Aabb::new(Vec3::new(0.30, -0.10, 0.03), Vec3::new(0.50, 0.10, 0.15));
    cfg.seed = seed;
    cfg
}

/// Interactive arm scene: a 7-DoF arm, one box obstacle, one target point.
pub struct ArmScene {
    arm: ArmModel,
    q: JointVector,
    obstacle: Aabb,
    target: Vec3,
}

impl Default for ArmScene {
    fn default() -> Self {
        let arm = ArmModel::default_panda();
        let q = JointVector::zeros(arm.dof());
        ArmScene {
            q,
            arm,
            obstacle: Aabb::centered(Vec3::new(0.23, 0.0, 0.05), Vec3::new(0.1, 0.1, 0.1)),
            target: Vec3::new(0.4, 0.0, 0.1),
        }
    }
}

impl ArmScene {
    /// Solve IK toward the target and keep the result as the current pose.
    pub fn reach(&mut self, target: Vec3) {
        self.target = target;
        if let Ok(q) = self.arm.solve_ik_delta(&self.q, target, &IkParams::converged()) {
            self.q = q;
        }
    }

    pub fn home(&mut self) {
        self.q = JointVector::zeros(self.arm.dof());
    }

    pub fn set_obstacle_center(&mut self, center: Vec3) {
        let size = self.obstacle.max_corner - self.obstacle.min_corner;
        self.obstacle = Aabb::centered(center, size);
    }

    /// Joint frame origins plus tip, flattened to [x, y, z, x, y, z, ...].
    pub fn joint_points(&self) -> Vec<f64> {
        let frames = self.arm.forward_kinematics(&self.q).expect("dims fixed");
        frames
            .frames
            .iter()
            .flat_map(|f| f.trans.to_array())
            .collect()
    }

    /// (any_collision, min_clearance, tip_error) for the current pose.
    pub fn status(&self) -> (bool, f64, f64) {
        let frames = self.arm.forward_kinematics(&self.q).expect("dims fixed");
        let query = arm_obstacle_query(&frames, &self.arm.collision_radii(), &[self.obstacle]);
        let tip_err = (frames.tip - self.target).norm();
        (query.any_collision, query.min_clearance, tip_err)
    }

    pub fn link_radii(&self) -> Vec<f64> {
        self.arm.collision_radii()
    }

    pub fn obstacle_box(&self) -> (Vec3, Vec3) {
        (self.obstacle.min_corner, self.obstacle.max_corner)
    }
}

/// One live training session (environment + trainer of one algorithm).
pub struct TrainingSession {
    env: ReachEnv,
    trainer: Trainer,
    pub rewards: Vec<f64>,
    pub costs: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl TrainingSession {
    pub fn new(algorithm: Algorithm, seed: u64) -> TrainingSession {
        let env_cfg = demo_env_config(seed);
        let obs_dim = env_cfg.observation_dim();
        let act_dim = env_cfg.action_dim();
        let env = ReachEnv::new(env_cfg).expect("valid demo env");
        let trainer =
            Trainer::new(desk_trainer_config(algorithm), obs_dim, act_dim, seed).expect("valid config");
        TrainingSession {
            env,
            trainer,
            rewards: Vec::new(),
            costs: Vec::new(),
            lambdas: Vec::new(),
        }
    }

    /// Train one epoch; returns (mean_ep_reward, mean_ep_cost, lambda).
    pub fn train_epoch(&mut self) -> (f64, f64, f64) {
        let m = self.trainer.train_epoch(&mut self.env).expect("finite losses");
        self.rewards.push(m.mean_ep_reward);
        self.costs.push(m.mean_ep_cost);
        self.lambdas.push(m.lambda);
        (m.mean_ep_reward, m.mean_ep_cost, m.lambda)
    }

    /// Roll one greedy episode with the current policy mean.
    pub fn rollout(&mut self, max_steps: usize) -> RolloutTrace {
        let mut obs = self.env.reset().expect("reset");
        let mut steps = Vec::new();
        for _ in 0..max_steps {
            let action = self.trainer.policy.mean_action(&obs).expect("dims fixed");
            let r = self.env.step(&action).expect("step");
            steps.push((self.env.tip(), r.cost));
            obs = r.obs;
            if r.done {
                break;
            }
        }
        RolloutTrace {
            steps,
            target: self.env.target(),
            obstacle: self.env.obstacle(),
        }
    }
}

pub struct RolloutTrace {
    pub steps: Vec<(Vec3, f64)>,
    pub target: Vec3,
    pub obstacle: Aabb,
}

// ---------------------------------------------------------------------------
// wasm-bindgen exports
// ---------------------------------------------------------------------------

/// Interactive IK + clearance playground.
#[wasm_bindgen]
pub struct ArmDemo {
    scene: ArmScene,
}

#[wasm_bindgen]
impl ArmDemo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> ArmDemo {
        ArmDemo {
            scene: ArmScene::default(),
        }
    }

    /// Drive the arm toward a Cartesian target with damped-least-squares IK.
    pub fn reach(&mut self, x: f64, y: f64, z: f64) {
        self.scene.reach(Vec3::new(x, y, z));
    }

    /// Reset to the home pose.
    pub fn home(&mut self) {
        self.scene.home();
    }

    pub fn set_obstacle(&mut self, x: f64, y: f64, z: f64) {
        self.scene.set_obstacle_center(Vec3::new(x, y, z));
    }

    /// Joint positions plus tip as a flat [x,y,z,...] array.
    pub fn joint_points(&self) -> Vec<f64> {
        self.scene.joint_points()
    }

    pub fn link_radii(&self) -> Vec<f64> {
        self.scene.link_radii()
    }

    /// Scene status as JSON: {"collides":bool,"clearance":m,"tip_error":m}.
    pub fn status_json(&self) -> String {
        let (collides, clearance, tip_error) = self.scene.status();
        format!(r#"{{"collides":{collides},"clearance":{clearance},"tip_error":{tip_error}}}"#)
    }

    /// Obstacle corners as `[min_x,min_y,min_z,max_x,max_y,max_z]`.
    pub fn obstacle_corners(&self) -> Vec<f64> {
        let (lo, hi) = self.scene.obstacle_box();
        vec![lo.x, lo.y, lo.z, hi.x, hi.y, hi.z]
    }

    /// Target as `[x,y,z]`.
    pub fn target(&self) -> Vec<f64> {
        self.scene.target.to_array().to_vec()
    }
}

impl Default for ArmDemo {
    fn default() -> Self {
        ArmDemo::new()
    }
}

/// Live PPO / cPPO training driven epoch by epoch from the page.
#[wasm_bindgen]
pub struct TrainDemo {
    session: TrainingSession,
}

#[wasm_bindgen]
impl TrainDemo {
    /// `algorithm` is "ppo" or "cppo".
    #[wasm_bindgen(constructor)]
    pub fn new(algorithm: &str, seed: u64) -> Result<TrainDemo, JsError> {
        let algorithm = match algorithm {
            "ppo" => Algorithm::Ppo,
            "cppo" => Algorithm::Cppo,
            other => return Err(JsError::new(&format!("unknown algorithm {other}"))),
        };
        Ok(TrainDemo {
            session: TrainingSession::new(algorithm, seed),
        })
    }

    /// Run one training epoch; returns {"reward":..,"cost":..,"lambda":..}.
    pub fn train_epoch(&mut self) -> String {
        let (reward, cost, lambda) = self.session.train_epoch();
        format!(r#"{{"reward":{reward},"cost":{cost},"lambda":{lambda}}}"#)
    }

    pub fn epochs_done(&self) -> usize {
        self.session.rewards.len()
    }

    pub fn reward_series(&self) -> Vec<f64> {
        self.session.rewards.clone()
    }

    pub fn cost_series(&self) -> Vec<f64> {
        self.session.costs.clone()
    }

    pub fn lambda_series(&self) -> Vec<f64> {
        self.session.lambdas.clone()
    }

    pub fn cost_limit(&self) -> f64 {
        8.0
    }

    /// Greedy-policy episode trace: flat [tip_x,tip_y,tip_z,cost, ...].
    pub fn rollout_trace(&mut self, max_steps: usize) -> Vec<f64> {
        let trace = self.session.rollout(max_steps);
        trace
            .steps
            .iter()
            .flat_map(|(tip, cost)| [tip.x, tip.y, tip.z, *cost])
            .collect()
    }

    /// Scene of the last rollout: [target xyz, obstacle min xyz, obstacle max xyz].
    pub fn rollout_scene(&mut self) -> Vec<f64> {
        let target = self.session.env.target();
        let bx = self.session.env.obstacle();
        vec![
            target.x,
            target.y,
            target.z,
            bx.min_corner.x,
            bx.min_corner.y,
            bx.min_corner.z,
            bx.max_corner.x,
            bx.max_corner.y,
            bx.max_corner.z,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scene_reaches_reachable_target() {
        let mut scene = ArmScene::default();
        scene.reach(Vec3::new(0.35, 0.05, 0.2));
        let (_, _, tip_err) = scene.status();
        assert!(tip_err < 1e-3, "tip error {tip_err}");
        assert_eq!(scene.joint_points().len(), 8 * 3);
    }

    #[test]
    fn obstacle_enclosing_tip_reports_collision() {
        let mut scene = ArmScene::default();
        scene.reach(Vec3::new(0.4, 0.0, 0.1));
        scene.set_obstacle_center(Vec3::new(0.4, 0.0, 0.1));
        let (collides, clearance, _) = scene.status();
        assert!(collides);
        assert!(clearance < 0.0);
    }

    #[test]
    fn training_session_improves_and_rolls_out() {
        let mut session = TrainingSession::new(Algorithm::Ppo, 1);
        let first = session.train_epoch().0;
        for _ in 0..3 {
            session.train_epoch();
        }
        let last = *session.rewards.last().unwrap();
        assert!(last > first, "reward {first} -> {last}");
        let trace = session.rollout(50);
        assert!(!trace.steps.is_empty());
        assert!(trace.steps.len() <= 50);
    }

    #[test]
    fn cppo_session_tracks_lambda() {
        let mut session = TrainingSession::new(Algorithm::Cppo, 2);
        session.train_epoch();
        assert!(session.lambdas[0] > 0.0);
    }

    #[test]
    fn status_json_is_parseable() {
        let demo = ArmDemo::new();
        let parsed: serde_json::Value = serde_json::from_str(&demo.status_json()).unwrap();
        assert!(parsed["clearance"].is_number());
        assert!(parsed["collides"].is_boolean());
    }
}
