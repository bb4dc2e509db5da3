use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::schemes::SchemeSpec;

/// Which dimension a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    M,
    K,
    #[serde(rename = "NT")]
    Nt,
}

impl SweepParam {
    pub fn apply(self, cfg: &SystemConfig, value: usize) -> SystemConfig {
        let mut c = cfg.clone();
        match self {
            SweepParam::M => c.irs_elements = value,
            SweepParam::K => c.users = value,
            SweepParam::Nt => c.bs_antennas = value,
        }
        c
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" => Ok(SweepParam::M),
            "K" => Ok(SweepParam::K),
            "NT" | "N_T" => Ok(SweepParam::Nt),
            other => Err(Error::Scenario(format!(
                "unknown sweep parameter {other:?} (expected M, K or NT)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<usize>,
}

/// A scenario file: system, schemes in output order, optional sweep axis and
/// optional output path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub system: SystemConfig,
    pub schemes: Vec<SchemeSpec>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
}

const SINGLE_CELL_SMALL: &str = include_str!("../../presets/single-cell-small.toml");
const MULTICELL_DESK: &str = include_str!("../../presets/multicell-desk.toml");
const FULL_SCALE: &str = include_str!("../../presets/full-scale.toml");

/// Built-in scenarios: `(name, toml text)`.
pub const PRESETS: [(&str, &str); 3] = [
    ("single-cell-small", SINGLE_CELL_SMALL),
    ("multicell-desk", MULTICELL_DESK),
    ("full-scale", FULL_SCALE),
];

impl ScenarioFile {
    /// Parses and validates scenario text.
    pub fn parse(text: &str) -> Result<Self> {
        let sc: ScenarioFile = toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// A built-in scenario by name.
    pub fn preset(name: &str) -> Result<Self> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Scenario(format!("unknown preset {name:?}")))?;
        Self::parse(text)
    }

    /// Every configuration the run visits, in output order.
    pub fn points(&self) -> Vec<SystemConfig> {
        match &self.sweep {
            None => vec![self.system.clone()],
            Some(s) => s.values.iter().map(|&v| s.param.apply(&self.system, v)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig {
                field: "schemes",
                reason: "at least one scheme is required".into(),
            });
        }
        for s in &self.schemes {
            s.validate()?;
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::InvalidConfig {
                    field: "sweep.values",
                    reason: "must not be empty".into(),
                });
            }
        }
        self.points().iter().try_for_each(SystemConfig::validate)
    }
}
