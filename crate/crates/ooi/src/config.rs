use serde::{Deserialize, Serialize};
use thiserror::Error;

use ooi_core::envs::treemaze::{SuccessorRule, TreeMazeVariant};
use ooi_core::learner::LearnerConfig;
use ooi_core::policy::AdamConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("episodes must be at least 1")]
    NoEpisodes,
    #[error("runs must be at least 1")]
    NoRuns,
    #[error("gamma {0} is outside [0, 1]")]
    Gamma(f64),
    #[error("step_limit must be at least 1")]
    NoSteps,
    #[error("random DuplicatedInput options need an even count of at least 2, got {0}")]
    RandomOptions(usize),
    #[error("hidden layer must have at least one unit")]
    NoHidden,
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("failed to serialise config: {0}")]
    Serialise(#[from] toml::ser::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MazeVariant {
    #[default]
    Full14,
    Known8,
    Known4,
}

impl From<MazeVariant> for TreeMazeVariant {
    fn from(v: MazeVariant) -> Self {
        match v {
            MazeVariant::Full14 => TreeMazeVariant::Full14,
            MazeVariant::Known8 => TreeMazeVariant::Known8,
            MazeVariant::Known4 => TreeMazeVariant::Known4,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MazeSuccessors {
    #[default]
    Refinement,
    FlipToOne,
}

impl From<MazeSuccessors> for SuccessorRule {
    fn from(v: MazeSuccessors) -> Self {
        match v {
            MazeSuccessors::Refinement => SuccessorRule::Refinement,
            MazeSuccessors::FlipToOne => SuccessorRule::FlipToOne,
        }
    }
}

/// Environment id plus variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvConfig {
    Treemaze {
        #[serde(default)]
        variant: MazeVariant,
        #[serde(default)]
        successors: MazeSuccessors,
    },
    Dupinput {
        /// `None` selects the two designed options, `Some(n)` draws `n`
        /// options with random initiation sets per run.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random_options: Option<usize>,
    },
    Gathering,
}

impl EnvConfig {
    pub fn name(&self) -> String {
        match self {
            EnvConfig::Treemaze { variant, .. } => {
                let n = match variant {
                    MazeVariant::Full14 => 14,
                    MazeVariant::Known8 => 8,
                    MazeVariant::Known4 => 4,
                };
                format!("treemaze{n}")
            }
            EnvConfig::Dupinput { random_options: None } => "dupinput".into(),
            EnvConfig::Dupinput { random_options: Some(n) } => format!("dupinput_random{n}"),
            EnvConfig::Gathering => "gathering".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Ooi,
    NoOoi,
    /// Hand-written top level: the gathering expert.
    Expert,
    /// Hand-written controller for TreeMaze and DuplicatedInput.
    ScriptedOracle,
}

impl AgentKind {
    pub fn learns(self) -> bool {
        matches!(self, AgentKind::Ooi | AgentKind::NoOoi)
    }

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Ooi => "ooi",
            AgentKind::NoOoi => "no_ooi",
            AgentKind::Expert => "expert",
            AgentKind::ScriptedOracle => "scripted_oracle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamSection {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamSection {
    fn default() -> Self {
        let d = AdamConfig::default();
        Self { alpha: d.alpha, beta1: d.beta1, beta2: d.beta2, epsilon: d.epsilon }
    }
}

impl From<AdamSection> for AdamConfig {
    fn from(a: AdamSection) -> Self {
        AdamConfig { alpha: a.alpha, beta1: a.beta1, beta2: a.beta2, epsilon: a.epsilon }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub hidden: usize,
    pub entropy_coef: f64,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self { hidden: 100, entropy_coef: 0.0 }
    }
}

fn default_runs() -> usize {
    20
}
fn default_gamma() -> f64 {
    0.99
}
fn default_eval_window() -> usize {
    1000
}
fn default_smoothing() -> usize {
    100
}
fn default_step_limit() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub agent: AgentKind,
    pub episodes: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_eval_window")]
    pub eval_window: usize,
    /// Trailing moving-average width applied to the aggregated curve.
    #[serde(default = "default_smoothing")]
    pub smoothing: usize,
    /// Primitive actions after which an episode is cut off.
    #[serde(default = "default_step_limit")]
    pub step_limit: usize,
    /// Parallel runs; 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub policy_adam: AdamSection,
    #[serde(default)]
    pub value_adam: AdamSection,
}

impl ExperimentConfig {
    pub fn new(env: EnvConfig, agent: AgentKind, episodes: usize) -> Self {
        Self {
            env,
            agent,
            episodes,
            runs: default_runs(),
            gamma: default_gamma(),
            base_seed: 0,
            eval_window: default_eval_window(),
            smoothing: default_smoothing(),
            step_limit: default_step_limit(),
            workers: 0,
            network: NetworkSection::default(),
            policy_adam: AdamSection::default(),
            value_adam: AdamSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.episodes == 0 {
            return Err(ConfigError::NoEpisodes);
        }
        if self.runs == 0 {
            return Err(ConfigError::NoRuns);
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(ConfigError::Gamma(self.gamma));
        }
        if self.step_limit == 0 {
            return Err(ConfigError::NoSteps);
        }
        if self.network.hidden == 0 {
            return Err(ConfigError::NoHidden);
        }
        if let EnvConfig::Dupinput { random_options: Some(n) } = self.env {
            if n < 2 || n % 2 == 1 {
                return Err(ConfigError::RandomOptions(n));
            }
        }
        Ok(())
    }

    pub fn learner(&self) -> LearnerConfig {
        LearnerConfig {
            hidden: self.network.hidden,
            gamma: self.gamma,
            policy_adam: self.policy_adam.into(),
            value_adam: self.value_adam.into(),
            entropy_coef: self.network.entropy_coef,
        }
    }

    /// File stem used for the CSV and metadata outputs.
    pub fn experiment_name(&self) -> String {
        format!("{}_{}", self.env.name(), self.agent.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            agent = "ooi"
            episodes = 10
            [env]
            id = "treemaze"
            variant = "known4"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.runs, 20);
        assert_eq!(cfg.gamma, 0.99);
        assert_eq!(cfg.eval_window, 1000);
        assert_eq!(cfg.network.hidden, 100);
        assert_eq!(cfg.env, EnvConfig::Treemaze { variant: MazeVariant::Known4, successors: MazeSuccessors::Refinement });
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = ExperimentConfig::new(EnvConfig::Dupinput { random_options: Some(4) }, AgentKind::NoOoi, 7);
        cfg.policy_adam.alpha = 3e-4;
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_invalid_values() {
        let mut cfg = ExperimentConfig::new(EnvConfig::Gathering, AgentKind::Ooi, 1);
        cfg.gamma = 1.5;
        assert!(matches!(cfg.validate(), Err(ConfigError::Gamma(_))));
        cfg.gamma = 0.9;
        cfg.runs = 0;
        assert!(matches!(cfg.validate(), Err(ConfigError::NoRuns)));
        assert!(ExperimentConfig::from_toml("agent = \"ooi\"\nepisodes = 0\n[env]\nid = \"gathering\"\n").is_err());
        assert!(ExperimentConfig::from_toml("agent = \"ooi\"\nepisodes = 1\nbogus = 1\n[env]\nid = \"gathering\"\n").is_err());
    }
}
