//! Seeded experiment execution with crash-safe incremental logging.

use super::config::ExperimentConfig;
use crate::env::ReachEnv;
use crate::error::{Error, Result};
use crate::neural::save_tensors;
use crate::rl::{Algorithm, EpochMetrics, Trainer};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

/// CSV column order of the per-epoch metrics log.
pub const METRICS_CSV_HEADER: &str =
    "epoch,mean_ep_reward,mean_ep_cost,mean_ep_len,lambda,kl,policy_loss,value_loss,cost_value_loss";

/// Reward level counting as "task solved": an agent holding 10 cm from the
/// target for a full-length episode.
pub fn reward_threshold(max_episode_steps: usize) -> f64 {
    -0.1 * max_episode_steps as f64
}

/// A plateau needs this many consecutive fully-successful epochs at threshold
/// level with a flat reward before a run stops early.
const PLATEAU_EPOCHS: usize = 8;
const PLATEAU_FLATNESS: f64 = 0.02;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    /// Mean episode cost over the final window of epochs.
    pub mean_final_cost: f64,
    /// Std of the per-epoch mean episode cost inside that window.
    pub std_final_cost: f64,
    pub mean_final_reward: f64,
    /// First epoch whose mean episode reward beat `reward_threshold`, if any.
    pub epochs_to_reward_threshold: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub algorithm: Algorithm,
    pub action_repr: crate::env::ActionRepr,
    pub seed: u64,
    /// Epochs used by the summary window (recorded for recomputability).
    pub final_window: usize,
    pub reward_threshold: f64,
    pub epochs: Vec<EpochMetrics>,
    pub summary: RunSummary,
}

impl RunReport {
    pub fn run_id(&self) -> String {
        format!("{}_{}_seed{}", self.algorithm, self.action_repr, self.seed)
    }

    pub fn load(path: &Path) -> Result<RunReport> {
        let text = std::fs::read_to_string(path)?;
        let report: RunReport = serde_json::from_str(&text)?;
        if report.schema != 1 {
            return Err(Error::config(format!("unsupported report schema {}", report.schema)));
        }
        Ok(report)
    }
}

/// Compute the end-of-run summary from an epoch series.
pub fn summarize_series(epochs: &[EpochMetrics], window: usize, threshold: f64) -> RunSummary {
    let w = window.min(epochs.len()).max(1);
    let tail = &epochs[epochs.len().saturating_sub(w)..];
    let n = tail.len() as f64;
    let mean_cost = tail.iter().map(|m| m.mean_ep_cost).sum::<f64>() / n;
    let var_cost = tail
        .iter()
        .map(|m| (m.mean_ep_cost - mean_cost) * (m.mean_ep_cost - mean_cost))
        .sum::<f64>()
        / n;
    let mean_reward = tail.iter().map(|m| m.mean_ep_reward).sum::<f64>() / n;
    RunSummary {
        mean_final_cost: mean_cost,
        std_final_cost: var_cost.sqrt(),
        mean_final_reward: mean_reward,
        epochs_to_reward_threshold: epochs
            .iter()
            .position(|m| m.mean_ep_reward > threshold)
            .map(|i| i + 1),
    }
}

pub fn format_csv_row(m: &EpochMetrics) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        m.epoch,
        m.mean_ep_reward,
        m.mean_ep_cost,
        m.mean_ep_len,
        m.lambda,
        m.kl,
        m.policy_loss,
        m.value_loss,
        m.cost_value_loss
    )
}

fn plateau_reached(epochs: &[EpochMetrics], threshold: f64) -> bool {
    if epochs.len() < PLATEAU_EPOCHS {
        return false;
    }
    let tail = &epochs[epochs.len() - PLATEAU_EPOCHS..];
    if !tail
        .iter()
        .all(|m| m.success_rate == 1.0 && m.mean_ep_reward >= threshold)
    {
        return false;
    }
    let hi = tail.iter().map(|m| m.mean_ep_reward).fold(f64::MIN, f64::max);
    let lo = tail.iter().map(|m| m.mean_ep_reward).fold(f64::MAX, f64::min);
    hi - lo <= PLATEAU_FLATNESS * threshold.abs()
}

/// Run one seed to completion, writing `metrics.csv` (one flushed row per
/// epoch), `config.json` (the fully resolved single-seed config),
/// `report.json`, and `checkpoint.json` under `dir`.
pub fn run_single_seed(
    effective: &ExperimentConfig,
    seed: u64,
    dir: &Path,
    quiet: bool,
) -> Result<RunReport> {
    std::fs::create_dir_all(dir)?;

    let mut env_cfg = effective.env.clone();
    env_cfg.seed = seed;
    let mut single = effective.clone();
    single.env = env_cfg.clone();
    single.seeds = vec![seed];
    single.output_dir = dir.to_path_buf();
    single.save(&dir.join("config.json"))?;

    let obs_dim = env_cfg.observation_dim();
    let act_dim = env_cfg.action_dim();
    let threshold = reward_threshold(env_cfg.max_episode_steps);
    let mut env = ReachEnv::new(env_cfg)?;
    let mut trainer = Trainer::new(effective.trainer.clone(), obs_dim, act_dim, seed)?;

    let mut csv = File::create(dir.join("metrics.csv"))?;
    csv.write_all(METRICS_CSV_HEADER.as_bytes())?;
    csv.write_all(b"\n")?;
    csv.flush()?;

    let mut epochs: Vec<EpochMetrics> = Vec::new();
    for _ in 0..effective.trainer.max_epochs {
        let metrics = trainer
            .train_epoch(&mut env)
            .map_err(|e| Error::numerical(format!("seed {seed}: {e}")))?;
        csv.write_all(format_csv_row(&metrics).as_bytes())?;
        csv.write_all(b"\n")?;
        csv.flush()?;
        if !quiet {
            eprintln!(
                "[seed {seed}] epoch {:3}  reward {:9.2}  cost {:7.2}  lambda {:6.3}  kl {:.4}",
                metrics.epoch, metrics.mean_ep_reward, metrics.mean_ep_cost, metrics.lambda, metrics.kl
            );
        }
        epochs.push(metrics);
        if plateau_reached(&epochs, threshold) {
            break;
        }
    }

    let report = RunReport {
        schema: 1,
        algorithm: effective.trainer.algorithm,
        action_repr: effective.env.action_repr,
        seed,
        final_window: effective.final_window(),
        reward_threshold: threshold,
        summary: summarize_series(&epochs, effective.final_window(), threshold),
        epochs,
    };
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    save_tensors(&dir.join("checkpoint.json"), &trainer.checkpoint_tensors())?;
    Ok(report)
}

/// Worker cap: SAFE_ARM_RL_THREADS when set, otherwise the machine's
/// parallelism.
fn worker_cap() -> usize {
    std::env::var("SAFE_ARM_RL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Execute every seed of the experiment (in parallel up to the worker cap)
/// and return the reports in seed order.
pub fn run_experiment(config: &ExperimentConfig, quiet: bool) -> Result<Vec<RunReport>> {
    config.validate()?;
    let effective = config.effective();
    std::fs::create_dir_all(&effective.output_dir)?;

    let jobs: Vec<(u64, PathBuf)> = effective
        .seeds
        .iter()
        .map(|&seed| {
            let dir = effective.output_dir.join(format!(
                "{}_{}_seed{}",
                effective.trainer.algorithm, effective.env.action_repr, seed
            ));
            (seed, dir)
        })
        .collect();

    let cap = worker_cap().max(1);
    let mut reports: Vec<Option<RunReport>> = vec![None; jobs.len()];
    for chunk_start in (0..jobs.len()).step_by(cap) {
        let chunk = &jobs[chunk_start..(chunk_start + cap).min(jobs.len())];
        let results: Vec<Result<RunReport>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|(seed, dir)| {
                    let eff = &effective;
                    scope.spawn(move || run_single_seed(eff, *seed, dir, quiet))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for (offset, result) in results.into_iter().enumerate() {
            reports[chunk_start + offset] = Some(result?);
        }
    }
    Ok(reports.into_iter().map(|r| r.expect("all seeds ran")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::TrainerConfig;

    fn tiny_experiment(dir: &Path, algorithm: Algorithm) -> ExperimentConfig {
        let env: crate::env::EnvConfig =
            serde_json::from_str(r#"{"action_repr":"ar1","max_episode_steps":40}"#).unwrap();
        ExperimentConfig {
            env,
            trainer: TrainerConfig {
                steps_per_epoch: 80,
                max_epochs: 2,
                update_passes: 2,
                update_minibatch: 40,
                hidden_sizes: vec![8, 8],
                ..TrainerConfig::defaults(algorithm)
            },
            seeds: vec![1, 2],
            output_dir: dir.to_path_buf(),
            desk_scale: true,
        }
    }

    #[test]
    fn run_experiment_writes_expected_files_per_seed() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = tiny_experiment(tmp.path(), Algorithm::Cppo);
        let reports = run_experiment(&cfg, true).unwrap();
        assert_eq!(reports.len(), 2);
        for seed in [1u64, 2] {
            let dir = tmp.path().join(format!("cppo_ar1_seed{seed}"));
            for file in ["metrics.csv", "report.json", "config.json", "checkpoint.json"] {
                assert!(dir.join(file).exists(), "missing {file} for seed {seed}");
            }
            let csv = std::fs::read_to_string(dir.join("metrics.csv")).unwrap();
            let lines: Vec<&str> = csv.lines().collect();
            assert_eq!(lines[0], METRICS_CSV_HEADER);
            assert_eq!(lines.len(), 3); // header + 2 epochs
        }
    }

    #[test]
    fn rerun_with_same_seed_is_byte_identical() {
        let tmp_a = tempfile::tempdir().unwrap();
        let tmp_b = tempfile::tempdir().unwrap();
        let mut cfg_a = tiny_experiment(tmp_a.path(), Algorithm::Ppo);
        cfg_a.seeds = vec![7];
        let mut cfg_b = tiny_experiment(tmp_b.path(), Algorithm::Ppo);
        cfg_b.seeds = vec![7];
        run_experiment(&cfg_a, true).unwrap();
        run_experiment(&cfg_b, true).unwrap();
        let a = std::fs::read(tmp_a.path().join("ppo_ar1_seed7/metrics.csv")).unwrap();
        let b = std::fs::read(tmp_b.path().join("ppo_ar1_seed7/metrics.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn report_round_trips_and_summary_is_recomputable() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = tiny_experiment(tmp.path(), Algorithm::Ppo);
        cfg.seeds = vec![3];
        let reports = run_experiment(&cfg, true).unwrap();
        let loaded = RunReport::load(&tmp.path().join("ppo_ar1_seed3/report.json")).unwrap();
        assert_eq!(loaded.run_id(), reports[0].run_id());
        let recomputed = summarize_series(&loaded.epochs, loaded.final_window, loaded.reward_threshold);
        assert_eq!(recomputed.mean_final_cost, loaded.summary.mean_final_cost);
        assert_eq!(recomputed.mean_final_reward, loaded.summary.mean_final_reward);
    }

    #[test]
    fn summary_single_epoch_window() {
        let epochs = vec![EpochMetrics {
            epoch: 1,
            mean_ep_reward: -12.0,
            mean_ep_cost: 4.0,
            mean_ep_len: 40.0,
            lambda: 0.0,
            kl: 0.01,
            policy_loss: 0.0,
            value_loss: 1.0,
            cost_value_loss: 0.0,
            episodes: 2,
            success_rate: 0.0,
            kl_early_stop: false,
        }];
        let s = summarize_series(&epochs, 1, -50.0);
        assert_eq!(s.mean_final_cost, 4.0);
        assert_eq!(s.std_final_cost, 0.0);
        assert_eq!(s.epochs_to_reward_threshold, Some(1));
    }

    #[test]
    fn threshold_detection_uses_first_crossing() {
        let mk = |r: f64| EpochMetrics {
            epoch: 0,
            mean_ep_reward: r,
            mean_ep_cost: 0.0,
            mean_ep_len: 0.0,
            lambda: 0.0,
            kl: 0.0,
            policy_loss: 0.0,
            value_loss: 0.0,
            cost_value_loss: 0.0,
            episodes: 1,
            success_rate: 0.0,
            kl_early_stop: false,
        };
        let epochs: Vec<EpochMetrics> = [-80.0, -60.0, -45.0, -70.0, -30.0].iter().map(|&r| mk(r)).collect();
        let s = summarize_series(&epochs, 2, reward_threshold(500));
        assert_eq!(s.epochs_to_reward_threshold, Some(3));
    }
}
