//! Run configuration. One TOML file per run; every table is optional and each
//! subcommand reads the ones it needs.

use crate::error::CliError;
use asymcoll::analytics::q_atlas;
use asymcoll::jumpsim::{JumpParams, WaitingLaw};
use asymcoll::ParticleParams;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub particles: Option<ParticlesConfig>,
    pub jumps: Option<JumpsConfig>,
    pub check: Option<CheckConfig>,
    pub simulate: Option<SimulateConfig>,
    pub converge: Option<ConvergeConfig>,
    pub invariant: Option<InvariantConfig>,
    pub curve: Option<CurveConfig>,
    pub density: Option<DensityConfig>,
    /// Written into manifests; ignored when a manifest is read back.
    pub manifest: Option<toml::Table>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ParticlesConfig {
    /// Every `q^±` given; `q_plus[0]` and `q_minus[n-1]` are placeholders.
    Explicit { b: Vec<f64>, sigma: Vec<f64>, q_minus: Vec<f64>, q_plus: Vec<f64> },
    /// Interface values `q_k^-`, `k = 1..n-1`; `q^+` follows by elasticity.
    Interfaces { b: Vec<f64>, sigma: Vec<f64>, q: Vec<f64> },
    Symmetric { b: Vec<f64>, sigma: Vec<f64> },
    QAtlas { n: usize, g: f64, sigma_sq: [f64; 3] },
}

impl ParticlesConfig {
    pub fn build(&self) -> Result<ParticleParams, CliError> {
        let cfg = |e: String| CliError::Config(format!("[particles]: {e}"));
        match self {
            ParticlesConfig::Explicit { b, sigma, q_minus, q_plus } => {
                ParticleParams::new(b.clone(), sigma.clone(), q_minus.clone(), q_plus.clone()).map_err(|e| cfg(e.to_string()))
            }
            ParticlesConfig::Interfaces { b, sigma, q } => {
                ParticleParams::from_interfaces(b.clone(), sigma.clone(), q).map_err(|e| cfg(e.to_string()))
            }
            ParticlesConfig::Symmetric { b, sigma } => ParticleParams::symmetric(b.clone(), sigma.clone()).map_err(|e| cfg(e.to_string())),
            ParticlesConfig::QAtlas { n, g, sigma_sq } => {
                q_atlas(*n, *g, sigma_sq[0], sigma_sq[1], sigma_sq[2]).map_err(|e| cfg(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum JumpsConfig {
    /// Exponential clocks with rates `a`, `b` and no drift perturbation.
    Exponential { n: usize, a: f64, b: f64, theta_l: Vec<f64>, theta_r: Vec<f64>, n_scale: f64 },
    General {
        a: f64,
        b: f64,
        lambda_l: Vec<f64>,
        lambda_r: Vec<f64>,
        sigma_l: Vec<f64>,
        sigma_r: Vec<f64>,
        theta_l: Vec<f64>,
        theta_r: Vec<f64>,
        n_scale: f64,
        law: WaitingLaw,
    },
}

impl JumpsConfig {
    pub fn build(&self) -> JumpParams {
        match self.clone() {
            JumpsConfig::Exponential { n, a, b, theta_l, theta_r, n_scale } => JumpParams::exponential(n, a, b, theta_l, theta_r, n_scale),
            JumpsConfig::General { a, b, lambda_l, lambda_r, sigma_l, sigma_r, theta_l, theta_r, n_scale, law } => {
                JumpParams { a, b, lambda_l, lambda_r, sigma_l, sigma_r, theta_l, theta_r, n_scale, law }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    Validate,
    ConditionA,
    ConditionB,
    Lemma3,
    Corner,
    Assumption,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    /// Checks whose failure makes the run fail. Everything applicable is
    /// reported regardless.
    #[serde(default)]
    pub require: Vec<CheckName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Diffusion,
    Names,
    Jumps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub engine: Engine,
    /// Time horizon; for jumps this is in the walkers' own time.
    pub horizon: f64,
    pub dt: Option<f64>,
    pub r0: Option<Vec<f64>>,
    #[serde(default)]
    pub scheme: Option<String>,
    pub epsilon: Option<f64>,
    pub gamma0: Option<Vec<i64>>,
    pub sample_dt: Option<f64>,
    #[serde(default = "yes")]
    pub record_events: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    /// Scales `N` of the ladder.
    pub ladder: Vec<f64>,
    #[serde(default = "one")]
    pub t: f64,
    /// Start in diffusive units; the walkers start at `round(r0 √N)`.
    pub r0: Vec<f64>,
    pub diffusion_replicas: usize,
    pub diffusion_dt: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantConfig {
    #[serde(default = "one")]
    pub horizon: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    /// Write the variance-chain slopes as well.
    #[serde(default = "yes")]
    pub variance_slopes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub t: f64,
    pub r: Vec<f64>,
    /// Square grid for `n = 2`: `points` values from `lo` to `hi` per axis,
    /// kept where `r̃_1 ≥ r̃_2`.
    pub grid: Option<GridConfig>,
    /// Explicit evaluation points.
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    /// Finite-difference step for the PDE residuals.
    pub pde_h: Option<f64>,
    #[serde(default)]
    pub normalization: bool,
    pub mc: Option<McConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum McConfig {
    Diffusion { bins: usize, dt: f64 },
    Jumps { bins: usize, n_scale: f64 },
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema != SCHEMA {
            return Err(CliError::Config(format!("unsupported schema {} (expected {SCHEMA})", cfg.schema)));
        }
        Ok(cfg)
    }

    pub fn particles(&self) -> Result<ParticleParams, CliError> {
        self.particles.as_ref().ok_or_else(|| CliError::Config("missing [particles] table".into()))?.build()
    }

    pub fn jump_params(&self) -> Result<JumpParams, CliError> {
        Ok(self.jumps.as_ref().ok_or_else(|| CliError::Config("missing [jumps] table".into()))?.build())
    }

    pub fn section<'a, T>(&self, value: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        value.as_ref().ok_or_else(|| CliError::Config(format!("missing [{name}] table")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = RunConfig::parse("schema = 1\n[particles]\nkind = \"symmetric\"\nb = [0.0, 0.0]\nsigma = [1.0, 1.0]\n").unwrap();
        assert_eq!(c.particles().unwrap().n(), 2);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(matches!(RunConfig::parse("schema = 1\nseeed = 3\n"), Err(CliError::Config(_))));
        let bad = "schema = 1\n[particles]\nkind = \"symmetric\"\nb = [0.0]\nsigma = [1.0]\nq = [0.5]\n";
        assert!(matches!(RunConfig::parse(bad), Err(CliError::Config(_))));
    }

    #[test]
    fn wrong_schema() {
        assert!(matches!(RunConfig::parse("schema = 2\n"), Err(CliError::Config(m)) if m.contains("schema")));
    }

    #[test]
    fn round_trip_through_toml() {
        let text = "schema = 1\nseed = 5\n[jumps]\nkind = \"exponential\"\nn = 2\na = 1.0\nb = 1.0\ntheta_l = [1.0, 1.0]\ntheta_r = [1.0, 1.0]\nn_scale = 100.0\n";
        let c = RunConfig::parse(text).unwrap();
        let back = RunConfig::parse(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
    }
}
