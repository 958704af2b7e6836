use std::path::{Path, PathBuf};

use clap::ValueEnum;
use repbandit::env::InstanceSpec;
use repbandit::lll::{BudgetRule, LllConfig, LllMode, LogArg};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, io_err, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Mtrl,
    E2tc,
    Independent,
    Lll,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Mtrl => "mtrl",
            Algorithm::E2tc => "e2tc",
            Algorithm::Independent => "independent",
            Algorithm::Lll => "lll",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        [Algorithm::Mtrl, Algorithm::E2tc, Algorithm::Independent, Algorithm::Lll]
            .into_iter()
            .find(|a| a.tag() == tag)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModeSetting {
    PureExploration,
    #[default]
    Regret,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum LogArgSetting {
    PaperAlg,
    #[default]
    Lemma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BudgetRuleSetting {
    HighProbability,
    RateOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// One experiment: an algorithm replicated over `n_seeds` derived seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub d: usize,
    pub k: usize,
    #[serde(rename = "M")]
    pub tasks: usize,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub noise_std: f64,
    #[serde(alias = "seeds")]
    pub n_seeds: usize,
    pub master_seed: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub mode: ModeSetting,
    pub log_arg: LogArgSetting,
    /// `None` picks the mode's default (high-probability for pure
    /// exploration, rate-only for regret).
    pub budget_rule: Option<BudgetRuleSetting>,
    pub trace_stride: u64,
    /// Read from config files but never echoed into outputs, so results do
    /// not depend on where they are written.
    #[serde(skip_serializing)]
    pub out_dir: Option<PathBuf>,
    pub output_format: OutputFormat,
    /// Exact least-squares Stage 1 (mtrl, independent) on noiseless instances.
    pub noiseless_oracle: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Mtrl,
            d: 10,
            k: 2,
            tasks: 25,
            horizon: 10_000,
            noise_std: 1.0,
            n_seeds: 20,
            master_seed: 0,
            epsilon: 0.1,
            delta: 0.05,
            mode: ModeSetting::Regret,
            log_arg: LogArgSetting::Lemma,
            budget_rule: None,
            trace_stride: 10,
            out_dir: None,
            output_format: OutputFormat::Csv,
            noiseless_oracle: false,
        }
    }
}

impl ExperimentConfig {
    /// Reads a TOML file, or JSON when the extension is `.json`.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|reason| config_err("config", reason))
    }

    pub fn instance_spec(&self) -> InstanceSpec<f64> {
        InstanceSpec::new(self.d, self.k, self.tasks, self.horizon).with_noise(self.noise_std)
    }

    pub fn lll_config(&self) -> LllConfig<f64> {
        let mut c = match self.mode {
            ModeSetting::PureExploration => LllConfig::pure_exploration(self.epsilon, self.delta),
            ModeSetting::Regret => LllConfig::regret(self.delta),
        };
        c.log_arg = match self.log_arg {
            LogArgSetting::PaperAlg => LogArg::PaperAlg,
            LogArgSetting::Lemma => LogArg::Lemma,
        };
        if let Some(rule) = self.budget_rule {
            c.budget_rule = match rule {
                BudgetRuleSetting::HighProbability => BudgetRule::HighProbability,
                BudgetRuleSetting::RateOnly => BudgetRule::RateOnly,
            };
        }
        c.trace_stride = self.trace_stride;
        c
    }

    pub fn lll_mode(&self) -> LllMode {
        self.lll_config().mode
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_seeds == 0 {
            return Err(config_err("seeds", "need at least one replicate"));
        }
        if self.trace_stride == 0 {
            return Err(config_err("trace_stride", "must be at least 1"));
        }
        self.instance_spec().validate()?;
        if self.algorithm == Algorithm::Lll {
            self.lll_config().validate()?;
        }
        if self.noiseless_oracle {
            if self.noise_std != 0.0 {
                return Err(config_err("noiseless_oracle", "requires noise_std = 0"));
            }
            if matches!(self.algorithm, Algorithm::E2tc | Algorithm::Lll) {
                return Err(config_err(
                    "noiseless_oracle",
                    format!("not available for {}", self.algorithm.tag()),
                ));
            }
        }
        Ok(())
    }

    pub fn with_algorithm(&self, algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_experiment_layout() {
        let c = ExperimentConfig::default();
        assert_eq!((c.d, c.k, c.tasks, c.horizon, c.noise_std, c.n_seeds), (10, 2, 25, 10_000, 1.0, 20));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn toml_round_trip_uses_upper_case_keys() {
        let c = ExperimentConfig {
            tasks: 50,
            budget_rule: Some(BudgetRuleSetting::RateOnly),
            ..Default::default()
        };
        let text = toml::to_string(&c).unwrap();
        assert!(text.contains("M = 50"));
        assert_eq!(toml::from_str::<ExperimentConfig>(&text).unwrap(), c);
        let partial: ExperimentConfig = toml::from_str("algorithm = \"lll\"\nseeds = 3\nT = 500").unwrap();
        assert_eq!((partial.algorithm, partial.n_seeds, partial.horizon, partial.d), (Algorithm::Lll, 3, 500, 10));
        assert!(toml::from_str::<ExperimentConfig>("bogus = 1").is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let field = |c: ExperimentConfig| match c.validate() {
            Err(crate::HarnessError::Config { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field(ExperimentConfig { n_seeds: 0, ..Default::default() }), "seeds");
        assert_eq!(field(ExperimentConfig { k: 11, ..Default::default() }), "k");
        assert_eq!(field(ExperimentConfig { noise_std: -1.0, ..Default::default() }), "noise_std");
        assert_eq!(field(ExperimentConfig { noiseless_oracle: true, ..Default::default() }), "noiseless_oracle");
        let lll = ExperimentConfig {
            algorithm: Algorithm::Lll,
            mode: ModeSetting::PureExploration,
            epsilon: 1.5,
            ..Default::default()
        };
        assert_eq!(field(lll), "epsilon");
    }
}
