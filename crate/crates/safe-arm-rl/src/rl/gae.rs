//! Generalized advantage estimation.

/// Backward-recursive GAE over one array of steps.
///
/// delta_t = r_t + gamma * v_{t+1} * (1 - done_t) - v_t, with v_T taken from
/// `bootstrap_value`; A_t = delta_t + gamma * lam * (1 - done_t) * A_{t+1};
/// returns_t = A_t + v_t. Episodes never leak across `done` flags.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap_value: f64,
    gamma: f64,
    lam: f64,
) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(rewards.len(), values.len());
    assert_eq!(rewards.len(), dones.len());
    let n = rewards.len();
    let mut advantages = vec![0.0; n];
    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        let not_done = if dones[t] { 0.0 } else { 1.0 };
        let next_value = if t + 1 < n { values[t + 1] } else { bootstrap_value };
        let delta = rewards[t] + gamma * next_value * not_done - values[t];
        next_adv = delta + gamma * lam * not_done * next_adv;
        advantages[t] = next_adv;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    (advantages, returns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    /// Brute-force double-loop oracle: A_t = sum over k >= t of
    /// (gamma*lam)^(k-t) * delta_k, cut at the first done.
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn gae_oracle(
        rewards: &[f64],
        values: &[f64],
        dones: &[bool],
        bootstrap_value: f64,
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
                bootstrap_value
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

    #[test]
    fn monte_carlo_limit_with_unit_gamma_lambda() {
        // gamma = lam = 1, zero values, single episode: A_t = sum of future rewards
        let rewards = [1.0, 2.0, 3.0, 4.0];
        let values = [0.0; 4];
        let dones = [false, false, false, true];
        let (adv, ret) = compute_gae(&rewards, &values, &dones, 0.0, 1.0, 1.0);
        assert_eq!(adv, vec![10.0, 9.0, 7.0, 4.0]);
        assert_eq!(ret, adv);
    }

    #[test]
    fn zero_rewards_zero_values_give_zero_advantages() {
        let (adv, ret) = compute_gae(&[0.0; 6], &[0.0; 6], &[false; 6], 0.0, 0.99, 0.95);
        assert!(adv.iter().all(|&a| a == 0.0));
        assert!(ret.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn five_step_instance_matches_brute_force() {
        let rewards = [0.3, -1.2, 0.7, 2.0, -0.4];
        let values = [0.1, 0.4, -0.3, 0.9, 0.2];
        let dones = [false, false, true, false, false];
        let bootstrap = 0.8;
        let (adv, _) = compute_gae(&rewards, &values, &dones, bootstrap, 0.99, 0.95);
        let oracle = gae_oracle(&rewards, &values, &dones, bootstrap, 0.99, 0.95);
        for (a, o) in adv.iter().zip(&oracle) {
            assert!((a - o).abs() < 1e-12, "{a} vs {o}");
        }
    }

    #[test]
    fn random_instances_match_brute_force() {
        let mut rng = Rng::from_seed(55);
        for _ in 0..100 {
            let n = 5 + rng.next_below(16) as usize;
            let rewards: Vec<f64> = (0..n).map(|_| rng.range(-2.0, 2.0)).collect();
            let values: Vec<f64> = (0..n).map(|_| rng.range(-2.0, 2.0)).collect();
            let dones: Vec<bool> = (0..n).map(|_| rng.uniform() < 0.2).collect();
            let bootstrap = rng.range(-1.0, 1.0);
            let gamma = rng.range(0.9, 1.0);
            let lam = rng.range(0.8, 1.0);
            let (adv, ret) = compute_gae(&rewards, &values, &dones, bootstrap, gamma, lam);
            let oracle = gae_oracle(&rewards, &values, &dones, bootstrap, gamma, lam);
            for ((a, o), (r, v)) in adv.iter().zip(&oracle).zip(ret.iter().zip(&values)) {
                assert!((a - o).abs() < 1e-12);
                assert!((r - (a + v)).abs() < 1e-12);
            }
        }
    }
}
