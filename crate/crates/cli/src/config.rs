use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stefan_core::checks::spherical_example;
use stefan_core::collocation::CollocationPlan;
use stefan_core::model::ProblemSpec;
use stefan_core::oracle_fd::{Drive, FrontMode, OracleConfig};
use stefan_core::series::StefanConvention;

/// Everything one run needs. Only `problem` is required in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub plan: CollocationPlan,
    #[serde(default)]
    pub oracle: OracleConfig,
    /// How the oracle is driven at `x = 0`.
    #[serde(default = "default_drive")]
    pub drive: Drive,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default)]
    pub convention: StefanConvention,
}

fn default_drive() -> Drive {
    Drive::Temperature
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

/// A configuration that could not be loaded or does not describe a valid run.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn new(problem: ProblemSpec) -> Self {
        Self {
            problem,
            plan: CollocationPlan::default(),
            oracle: OracleConfig::default(),
            drive: Drive::Temperature,
            outputs: default_outputs(),
            convention: StefanConvention::Derived,
        }
    }

    /// Built-in configurations by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "testproblem" => {
                let mut cfg = Self::new(ProblemSpec::test_problem());
                // The free front of this problem is unstable; follow the series front.
                cfg.oracle.front_mode = FrontMode::Prescribed;
                Some(cfg)
            }
            "testsphere" => {
                let mut cfg = Self::new(spherical_example());
                cfg.oracle.front_mode = FrontMode::Prescribed;
                cfg.oracle.t_end = 0.05;
                Some(cfg)
            }
            _ => None,
        }
    }

    /// Loads a built-in name or a JSON file and validates it.
    pub fn load(source: &str) -> Result<Self, ConfigError> {
        let cfg = match Self::builtin(source) {
            Some(cfg) => cfg,
            None => Self::from_file(Path::new(source))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError(format!("field `{path}`: {}", e.into_inner()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |e: stefan_core::Error| ConfigError(e.to_string());
        self.problem.validate().map_err(err)?;
        self.plan.validate().map_err(err)?;
        self.oracle.validate().map_err(err)?;
        Ok(())
    }
}
