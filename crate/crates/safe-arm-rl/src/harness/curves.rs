//! Per-epoch curve files: CSVs with one column per run, plus self-contained
//! SVG line charts overlaying PPO and cPPO.

use super::runner::RunReport;
use crate::error::Result;
use crate::rl::Algorithm;
use std::path::Path;

const PPO_COLOR: &str = "#c62828";
const CPPO_COLOR: &str = "#1565c0";

fn curve_csv(reports: &[RunReport], field: impl Fn(&crate::rl::EpochMetrics) -> f64) -> String {
    let max_epochs = reports.iter().map(|r| r.epochs.len()).max().unwrap_or(0);
    let mut out = String::from("epoch");
    for r in reports {
        out.push(',');
        out.push_str(&r.run_id());
    }
    out.push('\n');
    for e in 0..max_epochs {
        out.push_str(&(e + 1).to_string());
        for r in reports {
            out.push(',');
            if let Some(m) = r.epochs.get(e) {
                out.push_str(&field(m).to_string());
            }
        }
        out.push('\n');
    }
    out
}

struct SvgChart {
    width: f64,
    height: f64,
    margin: f64,
}

impl SvgChart {
    fn render(
        &self,
        title: &str,
        reports: &[RunReport],
        field: impl Fn(&crate::rl::EpochMetrics) -> f64,
        rule: Option<f64>,
    ) -> String {
        let max_epochs = reports.iter().map(|r| r.epochs.len()).max().unwrap_or(1).max(1);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in reports {
            for m in &r.epochs {
                lo = lo.min(field(m));
                hi = hi.max(field(m));
            }
        }
        if let Some(v) = rule {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        if hi - lo < 1e-9 {
            hi = lo + 1.0;
        }
        let pad = 0.05 * (hi - lo);
        let (lo, hi) = (lo - pad, hi + pad);

        let plot_w = self.width - 2.0 * self.margin;
        let plot_h = self.height - 2.0 * self.margin;
        let x = |epoch: f64| self.margin + (epoch - 1.0) / (max_epochs as f64 - 1.0).max(1.0) * plot_w;
        let y = |v: f64| self.margin + (hi - v) / (hi - lo) * plot_h;

        let mut svg = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            w = self.width,
            h = self.height
        );
        svg.push_str(&format!(
            "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
            self.width, self.height
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{title}</text>\n",
            self.width / 2.0,
            self.margin / 2.0
        ));
        // axes
        svg.push_str(&format!(
            "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
            m = self.margin,
            b = self.height - self.margin,
            r = self.width - self.margin,
            t = self.margin
        ));
        for (frac, label) in [(0.0, lo), (0.5, (lo + hi) / 2.0), (1.0, hi)] {
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{label:.1}</text>\n",
                self.margin - 4.0,
                y(lo + frac * (hi - lo)) + 3.0
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">epoch (1..{max_epochs})</text>\n",
            self.width / 2.0,
            self.height - self.margin / 3.0
        ));

        if let Some(v) = rule {
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{yv}\" x2=\"{}\" y2=\"{yv}\" stroke=\"#444\" stroke-dasharray=\"6 4\"/>\n<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">limit {v}</text>\n",
                self.margin,
                self.width - self.margin,
                self.width - self.margin + 2.0,
                y(v) + 3.0,
                yv = y(v)
            ));
        }

        for r in reports {
            let color = match r.algorithm {
                Algorithm::Ppo => PPO_COLOR,
                Algorithm::Cppo => CPPO_COLOR,
            };
            let points: Vec<String> = r
                .epochs
                .iter()
                .enumerate()
                .map(|(i, m)| format!("{:.1},{:.1}", x(i as f64 + 1.0), y(field(m))))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" opacity=\"0.85\" points=\"{}\"><title>{}</title></polyline>\n",
                points.join(" "),
                r.run_id()
            ));
        }

        // legend
        svg.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"{PPO_COLOR}\" stroke-width=\"2\"/><text x=\"{x2}\" y=\"{y1}\" font-family=\"sans-serif\" font-size=\"11\">PPO</text>\n",
            x0 = self.width - self.margin - 110.0,
            x1 = self.width - self.margin - 90.0,
            x2 = self.width - self.margin - 85.0,
            y0 = self.margin + 10.0,
            y1 = self.margin + 14.0
        ));
        svg.push_str(&format!(
            "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"{CPPO_COLOR}\" stroke-width=\"2\"/><text x=\"{x2}\" y=\"{y1}\" font-family=\"sans-serif\" font-size=\"11\">cPPO</text>\n",
            x0 = self.width - self.margin - 110.0,
            x1 = self.width - self.margin - 90.0,
            x2 = self.width - self.margin - 85.0,
            y0 = self.margin + 26.0,
            y1 = self.margin + 30.0
        ));
        svg.push_str("</svg>\n");
        svg
    }
}

/// Write `reward_curves.csv`, `cost_curves.csv`, and matching SVG charts into
/// `dir`. The cost chart carries a dashed rule at the cost limit when one is
/// supplied.
pub fn emit_curves(reports: &[RunReport], dir: &Path, cost_limit: Option<f64>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join("reward_curves.csv"),
        curve_csv(reports, |m| m.mean_ep_reward),
    )?;
    std::fs::write(dir.join("cost_curves.csv"), curve_csv(reports, |m| m.mean_ep_cost))?;
    let chart = SvgChart {
        width: 720.0,
        height: 420.0,
        margin: 50.0,
    };
    std::fs::write(
        dir.join("reward_curves.svg"),
        chart.render("Mean episode reward per epoch", reports, |m| m.mean_ep_reward, None),
    )?;
    std::fs::write(
        dir.join("cost_curves.svg"),
        chart.render("Mean episode cost per epoch", reports, |m| m.mean_ep_cost, cost_limit),
    )?;
    Ok(())
}
