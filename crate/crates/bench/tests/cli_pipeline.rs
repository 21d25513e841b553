//! End-to-end pipeline tests: config parsing, the run/report cycle on
//! disk, and CSV determinism.

use std::path::PathBuf;

use fpa_bench::config::{ExperimentConfig, OutputConfig};
use fpa_bench::report::{summarize, write_svgs};
use fpa_bench::runner::{read_csv, run_experiment, write_csv};

use fpa_core::auction::FeedbackModel;
use fpa_core::env::{EnvironmentSpec, RectComponent};
use fpa_core::eval::RegretMode;
use fpa_core::policy::PolicySpec;

fn pipeline_config(csv: PathBuf) -> ExperimentConfig {
    ExperimentConfig {
        environment: EnvironmentSpec::RectMixture {
            components: vec![
                RectComponent::new(0.5, (0.4, 1.0), (0.0, 0.6)),
                RectComponent::new(0.5, (0.1, 0.7), (0.2, 0.9)),
            ],
        },
        policy: PolicySpec::DiscretizedTransparent,
        feedback: FeedbackModel::Transparent,
        horizons: vec![64, 128, 256, 512, 1024],
        seed: 42,
        replicates: 5,
        regret_mode: RegretMode::Pseudo,
        output: OutputConfig { csv },
    }
}

#[test]
fn run_report_cycle_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("rows.csv");
    let config = pipeline_config(csv_path.clone());

    let rows = run_experiment(&config).unwrap();
    assert_eq!(rows.len(), 25);
    write_csv(&csv_path, &rows).unwrap();

    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert!(text.starts_with("# fpa-bench csv v1\n"));
    assert!(text.lines().nth(1).unwrap().starts_with("run_id,env,"));

    let back = read_csv(&csv_path).unwrap();
    let reports = summarize(&back).unwrap();
    assert_eq!(reports.len(), 1);
    // Learner regret grows sublinearly but positively with the horizon.
    assert!(reports[0].fit.slope > 0.0 && reports[0].fit.slope < 1.0);

    let out_dir = dir.path().join("plots");
    let names = write_svgs(&reports, &out_dir).unwrap();
    assert_eq!(names.len(), 1);
    let svg = std::fs::read_to_string(out_dir.join(&names[0])).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn csv_is_byte_identical_across_runs_modulo_wall_ms() {
    let dir = tempfile::tempdir().unwrap();
    let config = pipeline_config(dir.path().join("a.csv"));
    let a = run_experiment(&config).unwrap();
    let b = run_experiment(&config).unwrap();
    let strip = |rows: &[fpa_bench::runner::ResultRow]| -> Vec<String> {
        rows.iter()
            .map(|r| {
                let line = r.to_csv_line();
                line.rsplit_once(',').unwrap().0.to_string()
            })
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn toml_config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    let config = pipeline_config(dir.path().join("out.csv"));
    std::fs::write(&path, toml::to_string(&config).unwrap()).unwrap();
    let loaded = ExperimentConfig::from_path(&path).unwrap();
    assert_eq!(loaded.horizons, config.horizons);
    assert_eq!(loaded.environment, config.environment);
}

#[test]
fn incompatible_config_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = pipeline_config(dir.path().join("x.csv"));
    config.policy = PolicySpec::Coba;
    config.feedback = FeedbackModel::Bandit;
    assert!(config.validate().is_err());
    assert!(run_experiment(&config).is_err());
}

#[test]
fn needle_and_shrinking_default_to_hindsight_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = pipeline_config(dir.path().join("x.csv"));
    config.environment = EnvironmentSpec::Needle { eps: None };
    config.policy = PolicySpec::DiscretizedBandit;
    config.feedback = FeedbackModel::Bandit;
    assert!(config.validate().is_err(), "pseudo mode must be rejected");
    config.regret_mode = RegretMode::Hindsight;
    config.horizons = vec![32, 64, 128, 256];
    config.replicates = 2;
    let rows = run_experiment(&config).unwrap();
    assert!(rows.iter().all(|r| r.pseudo_benchmark.is_none()));
    assert!(rows
        .iter()
        .all(|r| { (r.regret - (r.hindsight_value - r.realized_utility_sum)).abs() < 1e-12 }));
}
