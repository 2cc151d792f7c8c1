//! JSON run configuration.

use std::path::Path;

use autoland_core::falsify::{FalsifierConfig, SweepConfig};
use autoland_core::Scenario;
use serde::{Deserialize, Serialize};

use crate::Error;

/// Everything a command needs. Missing sections and fields take defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub scenario: Scenario,
    pub falsifier: FalsifierConfig,
    pub sweep: SweepConfig,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let c: Config = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.scenario.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.falsifier.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.sweep.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Applies one seed to the scenario, the falsifier and the sweep.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.scenario.scenario.seed = seed;
        self.falsifier.seed = seed;
        self.sweep.seed = seed;
        self
    }
}
