//! Executes every (horizon, replicate) cell of an experiment and persists
//! the result rows as CSV.
//!
//! Cells run in parallel; each cell owns its RNG streams, so results are
//! independent of the thread schedule. Within a cell the online protocol is
//! strictly sequential.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use fpa_core::env::pseudo_optimal_total;
use fpa_core::eval::{hindsight_best, RegretMode};
use fpa_core::policy::run_policy;

use crate::config::{cell_seed, ExperimentConfig};

pub const CSV_SCHEMA: &str = "# fpa-bench csv v1";
pub const CSV_HEADER: &str =
    "run_id,env,feedback,policy,horizon,seed,realized_utility_sum,hindsight_value,pseudo_benchmark,regret,wall_ms";

/// One completed cell. `regret` is `benchmark - realized_utility_sum` for
/// the configured regret mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub run_id: String,
    pub env: String,
    pub feedback: String,
    pub policy: String,
    pub horizon: u64,
    pub seed: u64,
    pub realized_utility_sum: f64,
    pub hindsight_value: f64,
    pub pseudo_benchmark: Option<f64>,
    pub regret: f64,
    pub wall_ms: u64,
}

/// 17 significant digits, enough to round-trip any f64 exactly.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.run_id,
            self.env,
            self.feedback,
            self.policy,
            self.horizon,
            self.seed,
            fmt_float(self.realized_utility_sum),
            fmt_float(self.hindsight_value),
            self.pseudo_benchmark.map(fmt_float).unwrap_or_default(),
            fmt_float(self.regret),
            self.wall_ms
        )
    }

    pub fn from_csv_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            bail!("expected 11 fields, got {} in: {line}", fields.len());
        }
        Ok(ResultRow {
            run_id: fields[0].to_string(),
            env: fields[1].to_string(),
            feedback: fields[2].to_string(),
            policy: fields[3].to_string(),
            horizon: fields[4].parse().context("horizon")?,
            seed: fields[5].parse().context("seed")?,
            realized_utility_sum: fields[6].parse().context("realized_utility_sum")?,
            hindsight_value: fields[7].parse().context("hindsight_value")?,
            pseudo_benchmark: if fields[8].is_empty() {
                None
            } else {
                Some(fields[8].parse().context("pseudo_benchmark")?)
            },
            regret: fields[9].parse().context("regret")?,
            wall_ms: fields[10].parse().context("wall_ms")?,
        })
    }
}

/// Runs all cells of the experiment. Row order is (horizon, replicate),
/// regardless of how many worker threads execute them.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let cells: Vec<(u64, u32)> = config
        .horizons
        .iter()
        .flat_map(|&t| (0..config.replicates).map(move |r| (t, r)))
        .collect();
    let rows: Vec<Result<ResultRow>> = cells
        .par_iter()
        .map(|&(horizon, replicate)| run_cell(config, horizon, replicate))
        .collect();
    rows.into_iter().collect()
}

fn run_cell(config: &ExperimentConfig, horizon: u64, replicate: u32) -> Result<ResultRow> {
    let start = Instant::now();
    let seed = cell_seed(config.seed, horizon, replicate);
    let trace = run_policy(
        &config.environment,
        &config.policy,
        config.feedback,
        horizon,
        seed,
    )?;
    let (_, hindsight_value) = hindsight_best(trace.rounds())?;
    let pseudo_benchmark = if config.environment.has_closed_form() {
        Some(pseudo_optimal_total(&config.environment, horizon)?)
    } else {
        None
    };
    let realized = trace.total_utility();
    let benchmark = match config.regret_mode {
        RegretMode::Hindsight => hindsight_value,
        RegretMode::Pseudo => pseudo_benchmark.expect("validated: pseudo mode implies closed form"),
    };
    Ok(ResultRow {
        run_id: format!(
            "{}-{}-{}-t{}-r{}",
            config.environment.name(),
            config.policy.name(),
            config.feedback.name(),
            horizon,
            replicate
        ),
        env: config.environment.name().to_string(),
        feedback: config.feedback.name().to_string(),
        policy: config.policy.name().to_string(),
        horizon,
        seed,
        realized_utility_sum: realized,
        hindsight_value,
        pseudo_benchmark,
        regret: benchmark - realized,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    let mut out =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(out, "{CSV_SCHEMA}")?;
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv_line())?;
    }
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.is_empty() || line == CSV_HEADER {
            continue;
        }
        rows.push(ResultRow::from_csv_line(line)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::OutputConfig;
    use fpa_core::auction::FeedbackModel;
    use fpa_core::env::EnvironmentSpec;
    use fpa_core::policy::PolicySpec;
    use std::path::PathBuf;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            environment: EnvironmentSpec::uniform_square(),
            policy: PolicySpec::DiscretizedTransparent,
            feedback: FeedbackModel::Transparent,
            horizons: vec![50, 100, 200],
            seed: 11,
            replicates: 4,
            regret_mode: RegretMode::Pseudo,
            output: OutputConfig {
                csv: PathBuf::from("unused.csv"),
            },
        }
    }

    #[test]
    fn cell_count_is_horizons_times_replicates() {
        let rows = run_experiment(&small_config()).unwrap();
        assert_eq!(rows.len(), 12);
    }

    #[test]
    fn reruns_are_identical_modulo_wall_ms() {
        let a = run_experiment(&small_config()).unwrap();
        let b = run_experiment(&small_config()).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.run_id, y.run_id);
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.realized_utility_sum, y.realized_utility_sum);
            assert_eq!(x.hindsight_value, y.hindsight_value);
            assert_eq!(x.regret, y.regret);
        }
    }

    #[test]
    fn csv_round_trip_preserves_floats() {
        let rows = run_experiment(&small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        write_csv(&path, &rows).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(rows.len(), back.len());
        for (x, y) in rows.iter().zip(&back) {
            assert_eq!(x.realized_utility_sum, y.realized_utility_sum);
            assert_eq!(x.pseudo_benchmark, y.pseudo_benchmark);
            assert_eq!(x.regret, y.regret);
        }
    }

    #[test]
    fn row_regret_consistency() {
        for row in run_experiment(&small_config()).unwrap() {
            let benchmark = row.pseudo_benchmark.unwrap();
            assert!((row.regret - (benchmark - row.realized_utility_sum)).abs() < 1e-12);
        }
    }
}
