//! JSON run configuration. Unknown keys are rejected so that typos surface
//! as configuration errors instead of silently using defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fcalc,
    Penrose,
    Scales,
    Groupoid,
    Schwartz,
    Cusp,
    Symbols,
    All,
}

impl Suite {
    /// Registry order; `All` expands to this list.
    pub const ORDERED: [Suite; 7] =
        [Suite::Penrose, Suite::Fcalc, Suite::Scales, Suite::Groupoid, Suite::Schwartz, Suite::Cusp, Suite::Symbols];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Fcalc => "fcalc",
            Suite::Penrose => "penrose",
            Suite::Scales => "scales",
            Suite::Groupoid => "groupoid",
            Suite::Schwartz => "schwartz",
            Suite::Cusp => "cusp",
            Suite::Symbols => "symbols",
            Suite::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Suite> {
        if self == Suite::All {
            Self::ORDERED.to_vec()
        } else {
            vec![self]
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Self::ORDERED
            .iter()
            .chain(&[Suite::All])
            .copied()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub unit_count: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { h: 0.05, l: 20.0, unit_count: 21 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourConfig {
    /// [re, im].
    pub center: [f64; 2],
    pub radius: f64,
    pub nodes: usize,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig { center: [0.0, 0.0], radius: 1.5, nodes: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub suite: Suite,
    /// Calculus index for the groupoid and flow suites.
    pub n: u32,
    pub grid: GridConfig,
    pub contour: ContourConfig,
    /// Per-check tolerance overrides, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    /// Overrides the number of seeded trials of randomized checks.
    pub trials: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suite: Suite::All,
            n: 2,
            grid: GridConfig::default(),
            contour: ContourConfig::default(),
            tolerances: BTreeMap::new(),
            seed: 42,
            trials: None,
        }
    }
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: SuiteConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |key: &str, why: &str| Err(CliError::Config(format!("`{key}` {why}")));
        if !(2..=4).contains(&self.n) {
            return bad("n", "must be 2, 3 or 4");
        }
        if !(self.grid.h > 0.0 && self.grid.h.is_finite()) {
            return bad("grid.h", "must be positive");
        }
        if !(self.grid.l > self.grid.h && self.grid.l.is_finite()) {
            return bad("grid.L", "must exceed grid.h");
        }
        if self.grid.unit_count < 2 {
            return bad("grid.unit_count", "must be at least 2");
        }
        if !(self.contour.radius > 0.0 && self.contour.radius.is_finite()) {
            return bad("contour.radius", "must be positive");
        }
        if self.contour.center.iter().any(|c| !c.is_finite()) {
            return bad("contour.center", "must be finite");
        }
        if self.contour.nodes < 16 {
            return bad("contour.nodes", "must be at least 16");
        }
        if self.trials == Some(0) {
            return bad("trials", "must be positive");
        }
        for (name, value) in &self.tolerances {
            if !crate::suites::CHECK_NAMES.contains(&name.as_str()) {
                return bad(&format!("tolerances.{name}"), "is not a known check");
            }
            if !(*value > 0.0 && value.is_finite()) {
                return bad(&format!("tolerances.{name}"), "must be positive");
            }
        }
        Ok(())
    }

    /// Configured trial count, or the given default.
    pub fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    pub fn tolerance(&self, check: &str, default: f64) -> f64 {
        self.tolerances.get(check).copied().unwrap_or(default)
    }
}
