//! Command-line experiment runner.

use clap::{Parser, Subcommand, ValueEnum};
use safe_arm_rl::env::ActionRepr;
use safe_arm_rl::harness::{
    emit_curves, gradcheck, run_experiment, simcheck, summarize_runs, ExperimentConfig, RunReport,
};
use safe_arm_rl::rl::Algorithm;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "safe-arm-rl", version, about = "PPO / constrained-PPO training for a simulated reaching arm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Ppo,
    Cppo,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArArg {
    Ar1,
    Ar2,
}

#[derive(Subcommand)]
enum Command {
    /// Train one experiment from a config file, with optional overrides.
    Train {
        /// Experiment config JSON.
        #[arg(long)]
        config: PathBuf,
        /// Override the algorithm.
        #[arg(long, value_enum)]
        algo: Option<AlgoArg>,
        /// Override the action representation.
        #[arg(long, value_enum)]
        ar: Option<ArArg>,
        /// Run a single seed instead of the config's list.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cap epochs at 30 and episode length at 500.
        #[arg(long)]
        desk_scale: bool,
        /// Suppress per-epoch progress lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Aggregate run reports into the cost summary table and curve files.
    Summarize {
        /// Directory containing per-run subdirectories with report.json files.
        #[arg(long)]
        runs: PathBuf,
        /// Final-window size in epochs.
        #[arg(long, default_value_t = 10)]
        window: usize,
    },
    /// Gradient verification suite (MLP, Gaussian log-prob, surrogate, GAE).
    Gradcheck,
    /// Kinematics and collision verification suite.
    Simcheck,
}

fn collect_reports(dir: &PathBuf) -> safe_arm_rl::Result<Vec<RunReport>> {
    let mut reports = Vec::new();
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() && path.join("report.json").exists() {
            paths.push(path.join("report.json"));
        } else if path.file_name().is_some_and(|n| n == "report.json") {
            paths.push(path);
        }
    }
    paths.sort();
    for path in paths {
        reports.push(RunReport::load(&path)?);
    }
    Ok(reports)
}

fn run() -> safe_arm_rl::Result<bool> {
    match Cli::parse().command {
        Command::Train {
            config,
            algo,
            ar,
            seed,
            out,
            desk_scale,
            quiet,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(algo) = algo {
                cfg.trainer.algorithm = match algo {
                    AlgoArg::Ppo => Algorithm::Ppo,
                    AlgoArg::Cppo => Algorithm::Cppo,
                };
            }
            if let Some(ar) = ar {
                cfg.env.action_repr = match ar {
                    ArArg::Ar1 => ActionRepr::Ar1,
                    ArArg::Ar2 => ActionRepr::Ar2,
                };
            }
            if let Some(seed) = seed {
                cfg.seeds = vec![seed];
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            cfg.desk_scale |= desk_scale;

            let reports = run_experiment(&cfg, quiet)?;
            for report in &reports {
                let s = &report.summary;
                println!(
                    "{}: {} epochs, final reward {:.2}, final cost {:.2}+-{:.2}, threshold epoch {}",
                    report.run_id(),
                    report.epochs.len(),
                    s.mean_final_reward,
                    s.mean_final_cost,
                    s.std_final_cost,
                    s.epochs_to_reward_threshold
                        .map_or("-".to_string(), |e| e.to_string()),
                );
            }
            Ok(true)
        }
        Command::Summarize { runs, window } => {
            let reports = collect_reports(&runs)?;
            if reports.is_empty() {
                eprintln!("no report.json files found under {}", runs.display());
                return Ok(false);
            }
            let table = summarize_runs(&reports, window);
            print!("{}", table.render_text());
            std::fs::write(runs.join("summary.csv"), table.to_csv())?;
            let cost_limit = reports
                .iter()
                .find(|r| r.algorithm == Algorithm::Cppo)
                .map(|_| safe_arm_rl::rl::TrainerConfig::defaults(Algorithm::Cppo).cost_limit);
            emit_curves(&reports, &runs, cost_limit)?;
            println!(
                "wrote summary.csv, reward_curves.csv/svg, cost_curves.csv/svg to {}",
                runs.display()
            );
            Ok(true)
        }
        Command::Gradcheck => {
            let report = gradcheck()?;
            print!("{}", report.render());
            Ok(report.all_passed())
        }
        Command::Simcheck => {
            let report = simcheck()?;
            print!("{}", report.render());
            Ok(report.all_passed())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
