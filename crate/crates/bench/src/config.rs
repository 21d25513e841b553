//! Declarative experiment configuration, mirroring the library types 1:1.
//!
//! A config file is TOML:
//!
//! ```toml
//! feedback = "semi_transparent"
//! horizons = [4096, 8192, 16384, 32768]
//! seed = 1
//! replicates = 10
//! regret_mode = "pseudo"
//!
//! [environment]
//! kind = "plateau"
//!
//! [policy]
//! kind = "coba"
//!
//! [output]
//! csv = "results.csv"
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use fpa_core::auction::FeedbackModel;
use fpa_core::env::EnvironmentSpec;
use fpa_core::eval::RegretMode;
use fpa_core::policy::PolicySpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputConfig {
    pub csv: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    pub policy: PolicySpec,
    pub feedback: FeedbackModel,
    pub horizons: Vec<u64>,
    pub seed: u64,
    pub replicates: u32,
    pub regret_mode: RegretMode,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    /// Checks every cross-field constraint before anything runs.
    pub fn validate(&self) -> Result<()> {
        self.environment.validate().context("environment spec")?;
        self.policy.validate().context("policy spec")?;
        if self.replicates < 1 {
            bail!("replicates must be at least 1");
        }
        if self.horizons.is_empty() {
            bail!("need at least one horizon");
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            bail!("horizons must be strictly increasing");
        }
        if self.horizons[0] == 0 {
            bail!("horizons must be positive");
        }
        let required = self.policy.min_feedback();
        if !self.feedback.at_least(required) {
            bail!(
                "policy `{}` requires at least {} feedback, got {}",
                self.policy.name(),
                required.name(),
                self.feedback.name()
            );
        }
        if self.regret_mode == RegretMode::Pseudo && !self.environment.has_closed_form() {
            bail!(
                "pseudo regret needs a closed-form environment; `{}` has none",
                self.environment.name()
            );
        }
        Ok(())
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-cell seed: independent streams per (seed, horizon, replicate),
/// identical across platforms and thread schedules.
pub fn cell_seed(base: u64, horizon: u64, replicate: u32) -> u64 {
    let mut h = splitmix64(base ^ 0xA076_1D64_78BD_642F);
    h = splitmix64(h ^ horizon);
    h = splitmix64(h ^ u64::from(replicate));
    h
}
