//! Numerical and simulation verification suites behind the `gradcheck` and
//! `simcheck` subcommands.
//!
//! Every check compares an implementation path against an independent oracle
//! (central finite differences, brute-force recursion, dense sampling, or
//! Monte-Carlo point tests) and reports a pass/fail line with the worst
//! observed error.

use crate::collision::{capsule_aabb_collides, point_aabb_distance, Aabb, Capsule};
use crate::error::Result;
use crate::kinematics::{ArmModel, IkParams, JointSpec, JointVector};
use crate::math::Vec3;
use crate::neural::{GaussianPolicy, Mlp};
use crate::rl::{compute_gae, normalize_advantages, ppo_policy_loss};
use crate::rng::Rng;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {} ({})\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        out
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Central finite difference of a scalar function over one parameter slot.
fn central_diff(mut f: impl FnMut(f64) -> f64, at: f64, h: f64) -> f64 {
    (f(at + h) - f(at - h)) / (2.0 * h)
}

/// Gradient checks for the MLP, the Gaussian log-prob, and the full clipped
/// surrogate, plus the GAE brute-force comparison.
#[allow(clippy::needless_range_loop)]
pub fn gradcheck() -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let mut rng = Rng::from_seed(0xC0FFEE);

    // MLP backward vs finite differences, 50 random nets
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let din = 2 + rng.next_below(4) as usize;
        let dhid = 4 + rng.next_below(8) as usize;
        let dout = 1 + rng.next_below(3) as usize;
        let net = Mlp::init(&[din, dhid, dhid, dout], 2.0f64.sqrt(), 1.0, &mut rng);
        let x: Vec<f64> = (0..din).map(|_| rng.range(-1.0, 1.0)).collect();
        let gy: Vec<f64> = (0..dout).map(|_| rng.range(-1.0, 1.0)).collect();
        let (_, cache) = net.forward(&x)?;
        let mut grads = net.zeros_like();
        net.backward(&cache, &gy, &mut grads)?;
        let step = (net.params().len() / 25).max(1);
        for i in (0..net.params().len()).step_by(step) {
            let mut probe = net.clone();
            let numeric = central_diff(
                |v| {
                    probe.params_mut()[i] = v;
                    probe
                        .forward_value(&x)
                        .unwrap()
                        .iter()
                        .zip(&gy)
                        .map(|(a, b)| a * b)
                        .sum()
                },
                net.params()[i],
                1e-5,
            );
            worst = worst.max(rel_err(grads[i], numeric));
        }
    }
    // plus the exact network shapes the artifact trains (strided probes)
    for dims in [vec![9, 64, 64, 3], vec![16, 64, 64, 7], vec![16, 64, 64, 1]] {
        let net = Mlp::init(&dims, 2.0f64.sqrt(), 0.01, &mut rng);
        let x: Vec<f64> = (0..dims[0]).map(|_| rng.range(-1.0, 1.0)).collect();
        let gy: Vec<f64> = (0..*dims.last().unwrap()).map(|_| rng.range(-1.0, 1.0)).collect();
        let (_, cache) = net.forward(&x)?;
        let mut grads = net.zeros_like();
        net.backward(&cache, &gy, &mut grads)?;
        for i in (0..net.params().len()).step_by(97) {
            let mut probe = net.clone();
            let numeric = central_diff(
                |v| {
                    probe.params_mut()[i] = v;
                    probe
                        .forward_value(&x)
                        .unwrap()
                        .iter()
                        .zip(&gy)
                        .map(|(a, b)| a * b)
                        .sum()
                },
                net.params()[i],
                1e-5,
            );
            worst = worst.max(rel_err(grads[i], numeric));
        }
    }
    report.push("mlp gradients vs central differences", worst < 1e-4, format!("50 instances + artifact shapes, worst rel err {worst:.2e}"));

    // Gaussian log-prob gradients, 50 random policies
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let obs_dim = 2 + rng.next_below(3) as usize;
        let act_dim = 1 + rng.next_below(3) as usize;
        let policy = GaussianPolicy::new(obs_dim, act_dim, &[6], &mut rng);
        let obs: Vec<f64> = (0..obs_dim).map(|_| rng.range(-1.0, 1.0)).collect();
        let (action, _) = policy.sample(&obs, &mut rng)?;
        let (mean, cache) = policy.forward_cached(&obs)?;
        let mut mean_grads = policy.mean.zeros_like();
        let mut ls_grads = vec![0.0; act_dim];
        policy.accumulate_log_prob_grads(&cache, &mean, &action, 1.0, &mut mean_grads, &mut ls_grads)?;
        let step = (policy.mean.params().len() / 20).max(1);
        for i in (0..policy.mean.params().len()).step_by(step) {
            let mut probe = policy.clone();
            let numeric = central_diff(
                |v| {
                    probe.mean.params_mut()[i] = v;
                    probe.log_prob(&obs, &action).unwrap()
                },
                policy.mean.params()[i],
                1e-5,
            );
            worst = worst.max(rel_err(mean_grads[i], numeric));
        }
        for i in 0..act_dim {
            let mut probe = policy.clone();
            let numeric = central_diff(
                |v| {
                    probe.log_std[i] = v;
                    probe.log_prob(&obs, &action).unwrap()
                },
                policy.log_std[i],
                1e-5,
            );
            worst = worst.max(rel_err(ls_grads[i], numeric));
        }
    }
    report.push("gaussian log-prob gradients vs central differences", worst < 1e-4, format!("50 instances, worst rel err {worst:.2e}"));

    // full clipped surrogate end to end, 50 random batches
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let obs_dim = 2 + rng.next_below(3) as usize;
        let act_dim = 1 + rng.next_below(2) as usize;
        let policy = GaussianPolicy::new(obs_dim, act_dim, &[5], &mut rng);
        let batch = 8;
        let obs: Vec<Vec<f64>> = (0..batch)
            .map(|_| (0..obs_dim).map(|_| rng.range(-1.0, 1.0)).collect())
            .collect();
        let mut actions = Vec::new();
        let mut logp_old = Vec::new();
        for o in &obs {
            let (a, lp) = policy.sample(o, &mut rng)?;
            actions.push(a);
            logp_old.push(lp + 0.05 * rng.normal());
        }
        let mut advantages: Vec<f64> = (0..batch).map(|_| rng.normal()).collect();
        normalize_advantages(&mut advantages);
        let idx: Vec<usize> = (0..batch).collect();

        let mut mean_grads = policy.mean.zeros_like();
        let mut ls_grads = vec![0.0; act_dim];
        ppo_policy_loss(&policy, &obs, &actions, &logp_old, &advantages, &idx, 0.2, &mut mean_grads, &mut ls_grads)?;

        let loss_of = |p: &GaussianPolicy| -> f64 {
            let mut mg = p.mean.zeros_like();
            let mut lg = vec![0.0; act_dim];
            ppo_policy_loss(p, &obs, &actions, &logp_old, &advantages, &idx, 0.2, &mut mg, &mut lg)
                .unwrap()
                .loss
        };
        let step = (policy.mean.params().len() / 15).max(1);
        for i in (0..policy.mean.params().len()).step_by(step) {
            let mut probe = policy.clone();
            let numeric = central_diff(
                |v| {
                    probe.mean.params_mut()[i] = v;
                    loss_of(&probe)
                },
                policy.mean.params()[i],
                1e-6,
            );
            worst = worst.max(rel_err(mean_grads[i], numeric));
        }
        for i in 0..act_dim {
            let mut probe = policy.clone();
            let numeric = central_diff(
                |v| {
                    probe.log_std[i] = v;
                    loss_of(&probe)
                },
                policy.log_std[i],
                1e-6,
            );
            worst = worst.max(rel_err(ls_grads[i], numeric));
        }
    }
    report.push("clipped surrogate gradients vs central differences", worst < 1e-4, format!("50 instances, worst rel err {worst:.2e}"));

    // GAE vs brute-force double loop, 100 instances of 5..20 steps
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = 5 + rng.next_below(16) as usize;
        let rewards: Vec<f64> = (0..n).map(|_| rng.range(-2.0, 2.0)).collect();
        let values: Vec<f64> = (0..n).map(|_| rng.range(-2.0, 2.0)).collect();
        let dones: Vec<bool> = (0..n).map(|_| rng.uniform() < 0.2).collect();
        let bootstrap = rng.range(-1.0, 1.0);
        let gamma = rng.range(0.9, 1.0);
        let lam = rng.range(0.8, 1.0);
        let (adv, _) = compute_gae(&rewards, &values, &dones, bootstrap, gamma, lam);
        let oracle = gae_brute_force(&rewards, &values, &dones, bootstrap, gamma, lam);
        for (a, o) in adv.iter().zip(&oracle) {
            worst = worst.max((a - o).abs());
        }
    }
    report.push("gae vs brute-force recursion", worst < 1e-12, format!("100 instances, worst abs err {worst:.2e}"));

    Ok(report)
}

/// Independent double-loop GAE oracle.
#[allow(clippy::needless_range_loop)]
fn gae_brute_force(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lam: f64,
) -> Vec<f64> {
    let n = rewards.len();
    let delta = |t: usize| -> f64 {
        let next = if dones[t] {
            0.0
        } else if t + 1 < n {
            values[t + 1]
        } else {
            bootstrap
        };
        rewards[t] + gamma * next - values[t]
    };
    (0..n)
        .map(|t| {
            let mut acc = 0.0;
            let mut w = 1.0;
            for k in t..n {
                acc += w * delta(k);
                if dones[k] {
                    break;
                }
                w *= gamma * lam;
            }
            acc
        })
        .collect()
}

fn random_arm(rng: &mut Rng, n: usize) -> ArmModel {
    let joints = (0..n)
        .map(|i| JointSpec {
            axis: if i % 2 == 0 {
                Vec3::new(0.0, 0.0, 1.0)
            } else {
                Vec3::new(0.0, 1.0, 0.0)
            },
            origin: Vec3::new(rng.range(-0.05, 0.1), rng.range(-0.05, 0.05), rng.range(0.05, 0.2)),
            limit_lo: -2.9,
            limit_hi: 2.9,
            collision_radius: 0.05,
        })
        .collect();
    ArmModel {
        joints,
        tip_offset: Vec3::new(0.1, 0.0, 0.0),
        base_pose: Default::default(),
    }
}

/// Kinematics and collision suites: Jacobian vs finite differences, IK
/// round-trips on the bundled arm, capsule/box verdicts vs the Monte-Carlo
/// oracle.
pub fn simcheck() -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let mut rng = Rng::from_seed(0x51A5EED);

    // Jacobian vs central differences of the FK tip
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = 2 + (trial % 6);
        let arm = random_arm(&mut rng, n);
        let q = JointVector((0..n).map(|_| rng.range(-2.5, 2.5)).collect());
        let analytic = arm.tip_jacobian(&q)?;
        for (i, col) in analytic.iter().enumerate() {
            let numeric = {
                let mut hi = q.0.clone();
                let mut lo = q.0.clone();
                hi[i] += 1e-5;
                lo[i] -= 1e-5;
                let t_hi = arm.forward_kinematics(&JointVector(hi))?.tip;
                let t_lo = arm.forward_kinematics(&JointVector(lo))?.tip;
                (t_hi - t_lo) * (1.0 / 2e-5)
            };
            let d = *col - numeric;
            for c in d.to_array() {
                worst = worst.max(c.abs());
            }
        }
    }
    report.push("tip jacobian vs central differences", worst < 1e-6, format!("100 instances, worst abs err {worst:.2e}"));

    // IK round-trips: reachable targets sampled by forward kinematics
    let arm = ArmModel::default_panda();
    let params = IkParams::converged();
    let trials = 1000;
    let mut hits = 0;
    let mut worst_miss = 0.0f64;
    for _ in 0..trials {
        let q_rand = JointVector(
            arm.joints
                .iter()
                .map(|j| rng.range(0.6 * j.limit_lo, 0.6 * j.limit_hi))
                .collect(),
        );
        let target = arm.forward_kinematics(&q_rand)?.tip;
        let solved = arm.solve_ik_delta(&JointVector::zeros(arm.dof()), target, &params)?;
        let err = (arm.forward_kinematics(&solved)?.tip - target).norm();
        if err < 1e-3 {
            hits += 1;
        } else {
            worst_miss = worst_miss.max(err);
        }
    }
    report.push("ik round-trip tip error", hits * 100 >= trials * 99, format!("{hits}/{trials} under 1e-3 m (worst miss {worst_miss:.2e})"));

    // capsule/box verdicts vs Monte-Carlo point sampling, skipping boundary cases
    let mut checked = 0;
    let mut agreed = 0;
    while checked < 1000 {
        let capsule = Capsule {
            p0: Vec3::new(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)),
            p1: Vec3::new(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)),
            radius: rng.range(0.02, 0.3),
        };
        let corner = Vec3::new(rng.range(-1.0, 0.6), rng.range(-1.0, 0.6), rng.range(-1.0, 0.6));
        let size = Vec3::new(rng.range(0.1, 0.8), rng.range(0.1, 0.8), rng.range(0.1, 0.8));
        let bx = Aabb::new(corner, corner + size);
        let fast = capsule_aabb_collides(&capsule, &bx);
        if fast.clearance.abs() <= 1e-3 {
            continue;
        }
        let mc = {
            let samples = 10_000;
            let mut hit = false;
            for s in 0..=samples {
                let p = capsule.p0 + (capsule.p1 - capsule.p0) * (s as f64 / samples as f64);
                if point_aabb_distance(p, &bx) <= capsule.radius {
                    hit = true;
                    break;
                }
            }
            hit
        };
        checked += 1;
        if mc == fast.collides {
            agreed += 1;
        }
    }
    report.push("capsule/box verdicts vs monte-carlo oracle", agreed == checked, format!("{agreed}/{checked} agree (boundary |clearance| <= 1e-3 excluded)"));

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradcheck_passes_on_fresh_build() {
        let report = gradcheck().unwrap();
        assert!(report.all_passed(), "{}", report.render());
        assert_eq!(report.checks.len(), 4);
    }

    #[test]
    fn simcheck_passes_on_fresh_build() {
        let report = simcheck().unwrap();
        assert!(report.all_passed(), "{}", report.render());
        assert_eq!(report.checks.len(), 3);
    }
}
