//! Run configuration files.
//!
//! ```toml
//! [grid]
//! n = 32
//! length = 100.53096491487338
//!
//! [params]
//! mu = 1.0
//! gamma = 1.0
//! chi = 0.5
//! nu = 1.0
//!
//! [init]
//! kind = "decay-character"   # or "zero"
//! r_star = 0.0
//! seed = 1
//! amplitude = 0.01
//! # sigma = 0.25              # Gaussian cutoff width, default nπ/(4L)
//! # components = ["u", "w", "b"]
//!
//! [time]
//! dt = 0.5
//! t_end = 100.0
//! output_every = 2
//! scheme = "etd-rk2"          # or "if-rk4"
//! dealias = "two-thirds"      # or "none"
//!
//! [output]
//! dir = "runs/example"
//! save_snapshots = false
//! paired_linear = false
//!
//! [analysis]                  # optional
//! split_a = 2.5
//! fit_window = [10.0, 100.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decay_character::{generate_data, DataSpec};
use crate::error::{Error, Result};
use crate::field::{PhysParams, StateField};
use crate::grid::Grid;
use crate::solver::{Dealias, Scheme, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    DecayCharacter,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub kind: InitKind,
    #[serde(default)]
    pub r_star: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "one")]
    pub output_every: usize,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub dealias: Dealias,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    #[serde(default)]
    pub save_snapshots: bool,
    #[serde(default)]
    pub paired_linear: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_split_a")]
    pub split_a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
}

fn default_split_a() -> f64 {
    2.5
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            split_a: default_split_a(),
            fit_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub params: PhysParams,
    pub init: InitSection,
    pub time: TimeSection,
    pub output: OutputSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.solver_config()?.validate()?;
        self.blocks()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.length).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(self.grid()?, self.params, self.time.dt, self.time.t_end);
        cfg.output_every = self.time.output_every;
        cfg.scheme = self.time.scheme;
        cfg.dealias = self.time.dealias;
        cfg.split_a = self.analysis.split_a;
        cfg.paired_linear = self.output.paired_linear;
        cfg.save_snapshots = self.output.save_snapshots;
        cfg.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    fn blocks(&self) -> Result<[bool; 3]> {
        let Some(list) = &self.init.components else {
            return Ok([true; 3]);
        };
        let mut out = [false; 3];
        for name in list {
            let i = match name.as_str() {
                "u" => 0,
                "w" => 1,
                "b" => 2,
                other => return Err(Error::Config(format!("unknown component {other:?}; use u, w or b"))),
            };
            out[i] = true;
        }
        Ok(out)
    }

    pub fn initial_data(&self) -> Result<StateField> {
        let grid = self.grid()?;
        match self.init.kind {
            InitKind::Zero => Ok(StateField::zeros(grid)),
            InitKind::DecayCharacter => {
                let spec = DataSpec {
                    r: self.init.r_star,
                    seed: self.init.seed,
                    amplitude: self.init.amplitude,
                    sigma: self.init.sigma,
                    blocks: self.blocks()?,
                };
                generate_data(grid, &spec)
            }
        }
    }

    /// Hex SHA-256 of the canonical JSON form (keys sorted at every level).
    pub fn config_hash(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Config(e.to_string()))?;
        let canonical = serde_json::to_string(&value).map_err(|e| Error::Config(e.to_string()))?;
        Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
[grid]
n = 8
length = 6.283185307179586

[params]
mu = 1.0
gamma = 1.0
chi = 0.5
nu = 1.0

[init]
kind = "decay-character"
r_star = 0.0
seed = 4
amplitude = 0.01

[time]
dt = 0.1
t_end = 1.0
output_every = 2

[output]
dir = "runs/t"
"#;

    #[test]
    fn parse_and_hash_are_stable() {
        let cfg = RunConfig::parse(TEXT).unwrap();
        assert_eq!(cfg.time.scheme, Scheme::EtdRk2);
        assert_eq!(cfg.analysis.split_a, 2.5);
        let reparsed = RunConfig::parse(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(reparsed, cfg);
        assert_eq!(reparsed.config_hash().unwrap(), cfg.config_hash().unwrap());
        // key order in the file does not matter
        let shuffled = TEXT.replace("mu = 1.0\ngamma = 1.0", "gamma = 1.0\nmu = 1.0");
        assert_eq!(RunConfig::parse(&shuffled).unwrap().config_hash().unwrap(), cfg.config_hash().unwrap());
        let mut other = cfg.clone();
        other.init.seed = 5;
        assert_ne!(other.config_hash().unwrap(), cfg.config_hash().unwrap());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::parse(&TEXT.replace("n = 8", "n = 7")).is_err());
        assert!(RunConfig::parse(&TEXT.replace("t_end = 1.0", "t_end = 1.05")).is_err());
        assert!(RunConfig::parse(&TEXT.replace("nu = 1.0", "nu = 1.0\nrho = 2.0")).is_err());
        assert!(RunConfig::parse(&TEXT.replace("seed = 4", "seed = 4\ncomponents = [\"q\"]")).is_err());
    }
}
