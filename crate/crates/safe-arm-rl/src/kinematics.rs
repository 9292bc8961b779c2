//! Serial-chain kinematics for an n-DoF revolute arm described by data.
//!
//! The arm is a list of joints, each contributing a fixed translation from its
//! parent frame followed by a rotation about a fixed axis. Forward kinematics,
//! the positional tip Jacobian, and a damped-least-squares inverse kinematics
//! step are all defined on that description, so alternative arms are loadable
//! as JSON joint tables without touching code.

use crate::error::{Error, Result};
use crate::math::{solve3, Mat3, RigidTransform, Vec3};
use serde::{Deserialize, Serialize};

/// One revolute joint: translation `origin` from the parent joint frame, then
/// rotation about `axis` (given in the parent frame).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointSpec {
    pub axis: Vec3,
    pub origin: Vec3,
    pub limit_lo: f64,
    pub limit_hi: f64,
    /// Capsule radius of the link that follows this joint (meters).
    pub collision_radius: f64,
}

/// Data-driven description of a serial revolute arm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArmModel {
    pub joints: Vec<JointSpec>,
    /// Offset from the last joint frame to the tool tip (meters).
    pub tip_offset: Vec3,
    /// Pose of the first joint's parent frame in the world. Identity when absent.
    #[serde(skip, default)]
    pub base_pose: RigidTransform,
}

/// Joint angles in radians, one per joint of the model they were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct JointVector(pub Vec<f64>);

impl JointVector {
    pub fn zeros(n: usize) -> Self {
        JointVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// World poses of every joint frame plus the tip: `frames.len() == n + 1`.
#[derive(Debug, Clone)]
pub struct LinkFrames {
    pub frames: Vec<RigidTransform>,
    pub tip: Vec3,
}

impl LinkFrames {
    /// Capsule segment endpoints for link `i` (joint-i frame origin to the next
    /// frame origin; the last link ends at the tip).
    pub fn link_segment(&self, i: usize) -> (Vec3, Vec3) {
        (self.frames[i].trans, self.frames[i + 1].trans)
    }

    pub fn link_count(&self) -> usize {
        self.frames.len() - 1
    }
}

/// Damped-least-squares IK settings. The defaults keep the per-env-step cost
/// small while staying robust near singular configurations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IkParams {
    pub damping: f64,
    pub max_iters: usize,
    pub tol: f64,
    /// Per-iteration cap on the largest joint step (radians). Near-singular
    /// poses make the damped solve produce enormous steps; capping keeps the
    /// iteration contractive instead of oscillating.
    pub max_step_rad: f64,
}

impl Default for IkParams {
    fn default() -> Self {
        IkParams {
            damping: 0.05,
            max_iters: 10,
            tol: 1e-4,
            max_step_rad: 0.5,
        }
    }
}

impl IkParams {
    /// Budget for solving to convergence from an arbitrary start (verification
    /// suites, one-shot solves). The env-step default keeps only 10 iterations
    /// because its targets are a few centimeters away.
    pub fn converged() -> IkParams {
        IkParams {
            max_iters: 60,
            ..IkParams::default()
        }
    }
}

impl ArmModel {
    /// Parse and validate a model from its JSON representation.
    pub fn from_json(json: &str) -> Result<ArmModel> {
        let model: ArmModel = serde_json::from_str(json)?;
        model.validate()?;
        Ok(model)
    }

    /// Load and validate a model from a JSON joint-table file.
    pub fn load_file(path: &std::path::Path) -> Result<ArmModel> {
        ArmModel::from_json(&std::fs::read_to_string(path)?)
    }

    /// The 7-DoF arm shipped with the crate.
    pub fn default_panda() -> ArmModel {
        ArmModel::from_json(include_str!("../assets/panda_arm.json"))
            .expect("bundled arm model must be valid")
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    /// Upper bound on tip distance from the first joint: sum of link lengths.
    pub fn reach(&self) -> f64 {
        self.joints
            .iter()
            .skip(1)
            .map(|j| j.origin.norm())
            .sum::<f64>()
            + self.tip_offset.norm()
    }

    pub fn collision_radii(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.collision_radius).collect()
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // negated guards also reject NaN
    pub fn validate(&self) -> Result<()> {
        if self.joints.is_empty() {
            return Err(Error::config("arm model needs at least one joint"));
        }
        for (i, j) in self.joints.iter().enumerate() {
            if !j.axis.is_finite() || (j.axis.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::config(format!("joint {i}: axis must be a unit vector")));
            }
            if !j.origin.is_finite() {
                return Err(Error::config(format!("joint {i}: origin must be finite")));
            }
            if !(j.limit_lo < j.limit_hi) {
                return Err(Error::config(format!("joint {i}: limit_lo must be < limit_hi")));
            }
            if !(j.collision_radius > 0.0) {
                return Err(Error::config(format!("joint {i}: collision_radius must be > 0")));
            }
        }
        if !self.tip_offset.is_finite() {
            return Err(Error::config("tip_offset must be finite"));
        }
        Ok(())
    }

    fn check_dims(&self, q: &JointVector) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::contract(format!(
                "joint vector has {} entries, model has {} joints",
                q.len(),
                self.dof()
            )));
        }
        Ok(())
    }

    /// World pose of every joint frame plus the tip.
    pub fn forward_kinematics(&self, q: &JointVector) -> Result<LinkFrames> {
        self.check_dims(q)?;
        let mut frames = Vec::with_capacity(self.dof() + 1);
        let mut pose = self.base_pose;
        for (joint, &angle) in self.joints.iter().zip(q.as_slice()) {
            let local = RigidTransform::new(Mat3::rotation(joint.axis, angle), joint.origin);
            pose = pose.compose(&local);
            frames.push(pose);
        }
        let last = *frames.last().expect("validated model has >= 1 joint");
        let tip = last.transform_point(self.tip_offset);
        frames.push(RigidTransform::new(last.rot, tip));
        Ok(LinkFrames { frames, tip })
    }

    /// Positional tip Jacobian, one 3-vector column per joint (m/rad):
    /// column i = world_axis_i x (tip - joint_origin_i).
    pub fn tip_jacobian(&self, q: &JointVector) -> Result<Vec<Vec3>> {
        let lf = self.forward_kinematics(q)?;
        Ok(self.tip_jacobian_from_frames(&lf))
    }

    /// Jacobian reusing already-computed frames (saves an FK pass in the IK loop).
    pub fn tip_jacobian_from_frames(&self, lf: &LinkFrames) -> Vec<Vec3> {
        self.joints
            .iter()
            .enumerate()
            .map(|(i, joint)| {
                let frame = &lf.frames[i];
                let world_axis = frame.transform_dir(joint.axis);
                world_axis.cross(lf.tip - frame.trans)
            })
            .collect()
    }

    /// Clip a raw angle vector into the joint limits.
    pub fn clamp_joints(&self, raw: &[f64]) -> Result<JointVector> {
        if raw.len() != self.dof() {
            return Err(Error::contract(format!(
                "raw joint vector has {} entries, model has {} joints",
                raw.len(),
                self.dof()
            )));
        }
        Ok(JointVector(
            raw.iter()
                .zip(&self.joints)
                .map(|(&v, j)| v.clamp(j.limit_lo, j.limit_hi))
                .collect(),
        ))
    }

    /// Damped-least-squares IK toward `target_tip`, starting from `q`.
    ///
    /// Iterates dq = J^T (J J^T + mu^2 I)^-1 e with e = target - tip(q), clamping
    /// into joint limits after every update, for at most `params.max_iters`
    /// iterations or until ||e|| < `params.tol`. Unreachable targets are not an
    /// error: the best iterate found is returned.
    pub fn solve_ik_delta(
        &self,
        q: &JointVector,
        target_tip: Vec3,
        params: &IkParams,
    ) -> Result<JointVector> {
        self.check_dims(q)?;
        if !target_tip.is_finite() {
            return Err(Error::contract("IK target must be finite"));
        }
        if q.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("IK start configuration must be finite"));
        }

        let mu2 = params.damping * params.damping;
        let mut current = self.clamp_joints(q.as_slice())?;
        let mut best = current.clone();
        let mut best_err = f64::INFINITY;

        for _ in 0..params.max_iters {
            let lf = self.forward_kinematics(&current)?;
            let e = target_tip - lf.tip;
            let err = e.norm();
            if err < best_err {
                best = current.clone();
                best_err = err;
            }
            if err < params.tol {
                return Ok(best);
            }

            let cols = self.tip_jacobian_from_frames(&lf);
            // J J^T + mu^2 I (3x3, symmetric positive definite for mu > 0)
            let mut jjt = [[0.0f64; 3]; 3];
            for c in &cols {
                let a = c.to_array();
                for (r, row) in jjt.iter_mut().enumerate() {
                    for (s, cell) in row.iter_mut().enumerate() {
                        *cell += a[r] * a[s];
                    }
                }
            }
            for (r, row) in jjt.iter_mut().enumerate() {
                row[r] += mu2;
            }
            let y = solve3(&Mat3 { m: jjt }, e)
                .ok_or_else(|| Error::numerical("damped normal matrix was singular"))?;

            let dq: Vec<f64> = cols.iter().map(|col| col.dot(y)).collect();
            let largest = dq.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = if largest > params.max_step_rad {
                params.max_step_rad / largest
            } else {
                1.0
            };
            let stepped: Vec<f64> = current
                .as_slice()
                .iter()
                .zip(&dq)
                .map(|(&qi, &d)| qi + d * scale)
                .collect();
            current = self.clamp_joints(&stepped)?;
        }

        let final_err = (target_tip - self.forward_kinematics(&current)?.tip).norm();
        if final_err < best_err {
            best = current;
        }
        Ok(best)
    }
}
