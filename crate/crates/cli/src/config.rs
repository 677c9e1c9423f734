//! Experiment configuration schema.
//!
//! A config is a JSON object whose `command` field holds exactly one of
//! `density`, `localize`, `select`, `gabor` or `verify` with its parameters.
//! See `configs/` for examples.

use std::path::{Path, PathBuf};

use frametk::group::DensityMode;
use frametk::linalg::Label;
use frametk::rit::{BorderPolicy, CCurve, Strategy};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Single source of randomness for every command.
    #[serde(default)]
    pub seed: u64,
    /// Overridden by `--out`.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub command: Command,
}

fn default_name() -> String {
    "run".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Density(DensityCommand),
    Localize(LocalizeCommand),
    Select(SelectCommand),
    Gabor(GaborCommand),
    Verify(VerifyCommand),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityCommand {
    /// `I = Z`, `J = 2Z` under the identity, doubling and interleaving maps.
    ExampleMaps {
        #[serde(default = "default_half_width")]
        half_width: i64,
    },
    /// Index map read from JSON with an explicit subset.
    Map {
        path: PathBuf,
        subset: Vec<Label>,
        mode: DensityMode,
    },
    /// Basis vectors against an integer ordering of the basis.
    IndexFree {
        ordering: Ordering,
        #[serde(default)]
        subset: Parity,
        half_width: i64,
        r_max: u64,
    },
}

fn default_half_width() -> i64 {
    64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// `e_m` at `m`.
    Natural,
    /// `e_n` at `2n` and `2n + 1`.
    Doubled,
    /// `e_0, e_1, e_3, e_5, e_2, e_7, ...`.
    Interleaved,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    #[default]
    All,
    Even,
    Odd,
}

impl Parity {
    pub fn admits(self, m: i64) -> bool {
        match self {
            Parity::All => true,
            Parity::Even => m % 2 == 0,
            Parity::Odd => m % 2 != 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizeCommand {
    pub system: LocalizedInput,
    #[serde(default = "default_p")]
    pub p: u8,
    /// Largest radius in the tail-norm table.
    pub r_max: u64,
}

fn default_p() -> u8 {
    1
}

/// Synthetic banded system around the identity on `Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizedInput {
    pub half_width: i64,
    pub band: i64,
    pub decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectCommand {
    pub input: FamilyInput,
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    #[serde(default = "default_policy")]
    pub policy: BorderPolicy,
}

fn default_delta() -> f64 {
    0.5
}

fn default_strategy() -> Strategy {
    Strategy::Barrier
}

fn default_policy() -> BorderPolicy {
    BorderPolicy::Strict
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyInput {
    Orthonormal { n: usize },
    /// `2n` columns, each basis vector twice.
    DuplicatedBasis { n: usize },
    /// Gaussian columns in dimension `m`.
    Random { n: usize, m: usize },
    /// JSON family (labels, dimension, `[re, im]` pairs) or CSV by extension.
    File { path: PathBuf },
    /// Banded system on a window; selected blockwise against the basis.
    Localized(LocalizedInput),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaborCommand {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default)]
    pub base_step: Option<usize>,
}

/// Rechecks a saved selection against its family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyCommand {
    pub selection: PathBuf,
    pub family: PathBuf,
    pub epsilon: f64,
    #[serde(default = "default_curve")]
    pub c_curve: CCurve,
}

fn default_curve() -> CCurve {
    CCurve::Barrier
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Schema { detail, .. } => CliError::Schema { path: path.to_path_buf(), detail },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Schema {
            path: PathBuf::from("<inline>"),
            detail: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// `epsilon` and `delta` in `(0, 1)`.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut params = Vec::new();
        match &self.command {
            Command::Select(s) => params.extend([("epsilon", s.epsilon), ("delta", s.delta)]),
            Command::Gabor(g) => params.extend([("epsilon", g.epsilon), ("delta", g.delta)]),
            Command::Verify(v) => params.push(("epsilon", v.epsilon)),
            Command::Density(_) | Command::Localize(_) => {}
        }
        for (name, v) in params {
            if !(v > 0.0 && v < 1.0) {
                return Err(CliError::Invalid(format!("{name} = {v} must lie in (0,1)")));
            }
        }
        Ok(())
    }
}
