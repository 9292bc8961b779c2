//! Cross-run summaries: the 2x2 algorithm x action-representation cost table.

use super::runner::{summarize_series, RunReport};
use crate::env::ActionRepr;
use crate::rl::Algorithm;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

/// Mean +- std (across seeds) of final-window episode cost, one cell per
/// (action representation, algorithm) pair.
#[derive(Debug, Clone)]
pub struct SummaryTable {
    pub window: usize,
    pub cells: BTreeMap<(String, String), CellStats>,
}

/// Aggregate reports into the cost table. `final_window` overrides the
/// window recorded in each report.
pub fn summarize_runs(reports: &[RunReport], final_window: usize) -> SummaryTable {
    let mut grouped: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for report in reports {
        let summary = summarize_series(&report.epochs, final_window, report.reward_threshold);
        grouped
            .entry((report.action_repr.to_string(), report.algorithm.to_string()))
            .or_default()
            .push(summary.mean_final_cost);
    }
    let cells = grouped
        .into_iter()
        .map(|(key, values)| {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            (
                key,
                CellStats {
                    mean,
                    std: var.sqrt(),
                    runs: values.len(),
                },
            )
        })
        .collect();
    SummaryTable {
        window: final_window,
        cells,
    }
}

impl SummaryTable {
    fn cell(&self, ar: ActionRepr, algo: Algorithm) -> Option<&CellStats> {
        self.cells.get(&(ar.to_string(), algo.to_string()))
    }

    /// Aligned text table mirroring the 2x2 comparison shape.
    pub fn render_text(&self) -> String {
        let fmt = |c: Option<&CellStats>| match c {
            Some(s) => format!("{:.1}+-{:.1}", s.mean, s.std),
            None => "-".to_string(),
        };
        let mut out = String::new();
        out.push_str(&format!(
            "Average episode cost over the final {} epochs (mean+-std across seeds)\n",
            self.window
        ));
        out.push_str(&format!("{:<6} {:>14} {:>14}\n", "", "PPO", "cPPO"));
        for (label, ar) in [("ar1", ActionRepr::Ar1), ("ar2", ActionRepr::Ar2)] {
            out.push_str(&format!(
                "{:<6} {:>14} {:>14}\n",
                label,
                fmt(self.cell(ar, Algorithm::Ppo)),
                fmt(self.cell(ar, Algorithm::Cppo)),
            ));
        }
        out
    }

    /// CSV form: action_repr,algorithm,mean_final_cost,std_final_cost,runs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("action_repr,algorithm,mean_final_cost,std_final_cost,runs\n");
        for ((ar, algo), stats) in &self.cells {
            out.push_str(&format!("{ar},{algo},{},{},{}\n", stats.mean, stats.std, stats.runs));
        }
        out
    }
}
