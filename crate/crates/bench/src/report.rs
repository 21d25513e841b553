//! Aggregates result rows into per-group regret curves, fits log-log
//! slopes, and renders standalone SVG plots.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

use fpa_core::eval::{slope_estimate, SlopeFit};

use crate::runner::ResultRow;

/// Regret values below this are clamped before taking logs, so that a
/// lucky non-positive mean cannot poison a fit.
pub const REGRET_CLAMP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct HorizonStats {
    pub horizon: u64,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

#[derive(Debug)]
pub struct GroupReport {
    pub env: String,
    pub policy: String,
    pub feedback: String,
    pub per_horizon: Vec<HorizonStats>,
    pub fit: SlopeFit,
}

/// Groups rows by (env, policy, feedback) and fits a slope per group.
/// Groups with fewer than four horizons are skipped with a warning on
/// stderr.
pub fn summarize(rows: &[ResultRow]) -> Result<Vec<GroupReport>> {
    if rows.is_empty() {
        bail!("no result rows to report");
    }
    let mut groups: BTreeMap<(String, String, String), BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.env.clone(), row.policy.clone(), row.feedback.clone()))
            .or_default()
            .entry(row.horizon)
            .or_default()
            .push(row.regret);
    }
    let mut reports = Vec::new();
    for ((env, policy, feedback), by_horizon) in groups {
        if by_horizon.len() < 4 {
            eprintln!(
                "warning: group {env}/{policy}/{feedback} has {} horizons (< 4), skipping",
                by_horizon.len()
            );
            continue;
        }
        let mut per_horizon = Vec::new();
        for (&horizon, regrets) in &by_horizon {
            let n = regrets.len() as f64;
            let mean = regrets.iter().sum::<f64>() / n;
            let var = regrets.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
            per_horizon.push(HorizonStats {
                horizon,
                mean,
                std: var.sqrt(),
                count: regrets.len(),
            });
        }
        let horizons: Vec<u64> = per_horizon.iter().map(|s| s.horizon).collect();
        let means: Vec<f64> = per_horizon
            .iter()
            .map(|s| s.mean.max(REGRET_CLAMP))
            .collect();
        let fit = slope_estimate(&horizons, &means).context("slope fit")?;
        reports.push(GroupReport {
            env,
            policy,
            feedback,
            per_horizon,
            fit,
        });
    }
    if reports.is_empty() {
        bail!("every group had fewer than 4 horizons");
    }
    Ok(reports)
}

/// Plain-text summary table of the fitted slopes.
pub fn summary_table(reports: &[GroupReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:<24} {:<16} {:>8} {:>8} {:>10}\n",
        "env", "policy", "feedback", "slope", "resid", "horizons"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<16} {:<24} {:<16} {:>8.3} {:>8.4} {:>10}\n",
            r.env,
            r.policy,
            r.feedback,
            r.fit.slope,
            r.fit.residual_rms,
            r.per_horizon.len()
        ));
    }
    out
}

/// Renders one group as a standalone log2-log2 SVG line chart with the
/// fitted slope.
pub fn render_svg(report: &GroupReport) -> String {
    const W: f64 = 720.0;
    const H: f64 = 480.0;
    const ML: f64 = 70.0; // margins
    const MR: f64 = 30.0;
    const MT: f64 = 40.0;
    const MB: f64 = 60.0;

    let pts = &report.fit.points;
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if (y1 - y0).abs() < 1e-9 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = move |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let sy = move |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">{} / {} / {} — slope {:.3}</text>\n",
        ML,
        report.env,
        report.policy,
        report.feedback,
        report.fit.slope
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB
    ));
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    ));
    // X ticks at integer log2 horizons.
    let mut t = x0.ceil() as i64;
    while (t as f64) <= x1 {
        let x = sx(t as f64);
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>\n",
            H - MB,
            H - MB + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">2^{t}</text>\n",
            H - MB + 20.0
        ));
        t += 1;
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">log2 horizon</text>\n",
        (ML + W - MR) / 2.0,
        H - 18.0
    ));
    // Y ticks.
    for k in 0..=4 {
        let y = y0 + (y1 - y0) * k as f64 / 4.0;
        let yy = sy(y);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{yy}\" x2=\"{ML}\" y2=\"{yy}\" stroke=\"black\"/>\n",
            ML - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{y:.1}</text>\n",
            ML - 8.0,
            yy + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {})\">log2 mean regret</text>\n",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    ));
    // Mean-regret polyline and points.
    let path: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n",
        path.join(" ")
    ));
    for &(x, y) in pts {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#1f77b4\"/>\n",
            sx(x),
            sy(y)
        ));
    }
    // Fitted line.
    let fit_y = |x: f64| report.fit.intercept + report.fit.slope * x;
    svg.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#d62728\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n",
        sx(x0),
        sy(fit_y(x0)),
        sx(x1),
        sy(fit_y(x1))
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Writes one SVG per group into `out_dir` and returns the file names.
pub fn write_svgs(reports: &[GroupReport], out_dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut names = Vec::new();
    for r in reports {
        let name = format!("{}__{}__{}.svg", r.env, r.policy, r.feedback);
        std::fs::write(out_dir.join(&name), render_svg(r))?;
        names.push(name);
    }
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::ResultRow;

    fn synthetic_rows(regret_of: impl Fn(u64) -> f64) -> Vec<ResultRow> {
        let mut rows = Vec::new();
        for e in 10..=15u32 {
            let t = 1u64 << e;
            for r in 0..3 {
                rows.push(ResultRow {
                    run_id: format!("x-t{t}-r{r}"),
                    env: "synthetic".into(),
                    feedback: "full".into(),
                    policy: "fixed_bid".into(),
                    horizon: t,
                    seed: r,
                    realized_utility_sum: 0.0,
                    hindsight_value: 0.0,
                    pseudo_benchmark: None,
                    regret: regret_of(t),
                    wall_ms: 1,
                });
            }
        }
        rows
    }

    #[test]
    fn linear_regret_gives_unit_slope() {
        let reports = summarize(&synthetic_rows(|t| t as f64)).unwrap();
        assert_eq!(reports.len(), 1);
        assert!((reports[0].fit.slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_thirds_power_law() {
        let reports = summarize(&synthetic_rows(|t| (t as f64).powf(2.0 / 3.0))).unwrap();
        assert!((reports[0].fit.slope - 0.6667).abs() < 1e-3);
    }

    #[test]
    fn empty_rows_error() {
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn svg_contains_fit_and_points() {
        let reports = summarize(&synthetic_rows(|t| (t as f64).sqrt())).unwrap();
        let svg = render_svg(&reports[0]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("slope 0.500"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn summary_table_lists_groups() {
        let reports = summarize(&synthetic_rows(|t| t as f64)).unwrap();
        let table = summary_table(&reports);
        assert!(table.contains("synthetic"));
        assert!(table.contains("fixed_bid"));
    }
}
