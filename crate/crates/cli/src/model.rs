//! JSON model description files.
//!
//! ```json
//! {"d": 1, "L": 4, "t": 1.0, "t_prime": 0.0, "mu": 0.2, "beta": 1.0,
//!  "interaction": [{"order": 2, "entries": [
//!     {"X": [[0], [0]], "Xi": ["up", "down"], "Phi": ["up", "down"], "re": 0.1, "im": 0.0}]}]}
//! ```

use std::fmt;
use std::path::Path;

use fermion_decay_core::model::{InteractionKey, ModelParams};
use fermion_decay_core::{Error, InteractionCoefficients, LatticeSpec, Spin};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const DEFAULT_T: f64 = 1.0;
pub const DEFAULT_T_PRIME: f64 = 0.0;
pub const DEFAULT_MU: f64 = 0.2;
pub const DEFAULT_BETA: f64 = 1.0;
pub const DEFAULT_D: usize = 1;
pub const DEFAULT_L: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinLabel {
    Up,
    Down,
}

impl From<SpinLabel> for Spin {
    fn from(s: SpinLabel) -> Spin {
        match s {
            SpinLabel::Up => Spin::Up,
            SpinLabel::Down => Spin::Down,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryFile {
    #[serde(rename = "X")]
    pub x: Vec<Vec<i64>>,
    #[serde(rename = "Xi")]
    pub xi: Vec<SpinLabel>,
    #[serde(rename = "Phi")]
    pub phi: Vec<SpinLabel>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderFile {
    pub order: usize,
    pub entries: Vec<EntryFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub t: f64,
    #[serde(default)]
    pub t_prime: f64,
    pub mu: f64,
    pub beta: f64,
    #[serde(default)]
    pub interaction: Vec<OrderFile>,
}

impl Default for ModelFile {
    fn default() -> Self {
        ModelFile {
            d: DEFAULT_D,
            l: DEFAULT_L,
            t: DEFAULT_T,
            t_prime: DEFAULT_T_PRIME,
            mu: DEFAULT_MU,
            beta: DEFAULT_BETA,
            interaction: Vec::new(),
        }
    }
}

/// A parsed and validated model.
#[derive(Clone, Debug)]
pub struct Model {
    pub spec: LatticeSpec,
    pub params: ModelParams,
    pub interaction: InteractionCoefficients,
}

#[derive(Debug)]
pub enum LoadError {
    /// Unreadable or malformed file.
    Parse(String),
    /// Well-formed file describing an invalid model.
    Invalid(String),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Parse(m) => write!(f, "parse error: {m}"),
            LoadError::Invalid(m) => write!(f, "invalid model: {m}"),
        }
    }
}

impl std::error::Error for LoadError {}

pub fn read_model_file(path: &Path) -> Result<ModelFile, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LoadError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| LoadError::Parse(format!("{}: {e}", path.display())))
}

impl ModelFile {
    /// On-site Hubbard model with coupling `u`.
    pub fn hubbard(self, u: f64) -> Self {
        let entry = EntryFile {
            x: vec![vec![0; self.d]; 2],
            xi: vec![SpinLabel::Up, SpinLabel::Down],
            phi: vec![SpinLabel::Up, SpinLabel::Down],
            re: u,
            im: 0.0,
        };
        ModelFile {
            interaction: vec![OrderFile {
                order: 2,
                entries: vec![entry],
            }],
            ..self
        }
    }

    pub fn build(&self) -> Result<Model, LoadError> {
        let invalid = |e: Error| LoadError::Invalid(e.to_string());
        let spec = LatticeSpec::new(self.d, self.l).map_err(invalid)?;
        let params = ModelParams::new(self.t, self.t_prime, self.mu, self.beta);
        params.validate(self.d).map_err(invalid)?;
        let mut u = InteractionCoefficients::new(self.d);
        for (i, block) in self.interaction.iter().enumerate() {
            for (j, e) in block.entries.iter().enumerate() {
                if e.xi.len() != block.order {
                    return Err(LoadError::Invalid(format!(
                        "interaction[{i}].entries[{j}]: {} spins for order {}",
                        e.xi.len(),
                        block.order
                    )));
                }
                let key = InteractionKey::new(
                    e.x.clone(),
                    e.xi.iter().map(|&s| s.into()).collect(),
                    e.phi.iter().map(|&s| s.into()).collect(),
                );
                u.add(key, Complex64::new(e.re, e.im)).map_err(|err| {
                    LoadError::Invalid(format!("interaction[{i}].entries[{j}]: {err}"))
                })?;
            }
        }
        u.validate().map_err(invalid)?;
        Ok(Model {
            spec,
            params,
            interaction: u,
        })
    }
}
