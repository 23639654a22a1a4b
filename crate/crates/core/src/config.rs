//! JSON run configuration shared by the command-line front end and tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::policy::PolicyConfig;
use crate::simulator::SimConfig;
use crate::state::BellDiagonalState;
use crate::sweep::SweepVariable;

/// Fresh-link state as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinkSpec {
    Werner { fidelity: f64 },
    BellDiagonal { diag: [f64; 4] },
}

impl LinkSpec {
    pub fn state(&self) -> Result<BellDiagonalState> {
        match self {
            LinkSpec::Werner { fidelity } => BellDiagonalState::werner(*fidelity),
            LinkSpec::BellDiagonal { diag } => BellDiagonalState::new(*diag),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n: usize,
    pub p_gen: f64,
    pub p_con: f64,
    pub gamma: f64,
    #[serde(default = "one")]
    pub q: f64,
    pub new_link: LinkSpec,
}

fn one() -> f64 {
    1.0
}

impl SystemConfig {
    pub fn params(&self) -> Result<SystemParams> {
        let p = SystemParams {
            n: self.n,
            p_gen: self.p_gen,
            p_con: self.p_con,
            gamma: self.gamma,
            q: self.q,
            new_link: self.new_link.state()?,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyConfig>,
    /// Policies compared on a frontier; defaults to `[policy]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub policies: Vec<PolicyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    /// Grid over the `q` axis of a frontier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frontier: Option<GridConfig>,
    /// Grid over the effective generation probability for bound curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    /// Parses a config document; syntax and schema errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn primary_policy(&self) -> Result<&PolicyConfig> {
        self.policy
            .as_ref()
            .or_else(|| self.policies.first())
            .ok_or_else(|| Error::Config("no policy given (set `policy` or `policies`)".into()))
    }

    pub fn frontier_policies(&self) -> Result<Vec<PolicyConfig>> {
        if !self.policies.is_empty() {
            Ok(self.policies.clone())
        } else {
            Ok(vec![self.primary_policy()?.clone()])
        }
    }
}
