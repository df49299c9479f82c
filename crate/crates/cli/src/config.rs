//! Run configuration: a TOML file with one table per subcommand plus a shared `[flow]` table.
//! Command-line flags are applied on top of the file before validation.

use crate::error::CliError;
use nematic::dynamics::{FlowParams, TraceVariant};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub plot: bool,
    pub flow: FlowConfig,
    pub phase: PhaseConfig,
    pub closure: ClosureConfig,
    pub operators: OperatorsConfig,
    pub leslie: LeslieConfig,
    pub simulate: SimulateConfig,
    pub limit: LimitConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub de: f64,
    pub re: f64,
    pub gamma: f64,
    pub eps: f64,
    pub alpha: f64,
    pub g: f64,
    pub gamma_par: f64,
    pub gamma_perp: f64,
    /// "q" or "m2": which trace correction the translational operator uses.
    pub trace_variant: String,
    pub eps_equals_de: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        let p = FlowParams::default();
        Self {
            de: p.de,
            re: p.re,
            gamma: p.gamma_solvent,
            eps: p.eps,
            alpha: p.alpha_ms,
            g: p.g_const,
            gamma_par: p.gamma_par,
            gamma_perp: p.gamma_perp,
            trace_variant: "q".into(),
            eps_equals_de: false,
        }
    }
}

impl FlowConfig {
    pub fn params(&self) -> Result<FlowParams, CliError> {
        let trace_variant = match self.trace_variant.as_str() {
            "q" => TraceVariant::Q,
            "m2" => TraceVariant::M2,
            other => return Err(CliError::Usage(format!("unknown trace_variant {other:?} (expected \"q\" or \"m2\")"))),
        };
        let p = FlowParams {
            de: self.de,
            re: self.re,
            gamma_solvent: self.gamma,
            eps: if self.eps_equals_de { self.de } else { self.eps },
            alpha_ms: self.alpha,
            g_const: self.g,
            gamma_par: self.gamma_par,
            gamma_perp: self.gamma_perp,
            trace_variant,
            eps_equals_de: self.eps_equals_de,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseConfig {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub count: usize,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self { alpha_min: 1.0, alpha_max: 20.0, count: 200, output: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosureConfig {
    pub samples: usize,
    pub level: usize,
    pub margin: f64,
    /// Size of the perturbation applied before the warm-started solve.
    pub warm_step: f64,
    pub tol: f64,
    pub roundtrip_tol: f64,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        Self { samples: 200, level: 48, margin: 0.02, warm_step: 1e-3, tol: nematic::bingham::DEFAULT_TOL, roundtrip_tol: 1e-10, output: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorsConfig {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub count: usize,
    pub directors: usize,
    pub level: usize,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

impl Default for OperatorsConfig {
    fn default() -> Self {
        Self { alpha_min: 6.75, alpha_max: 20.0, count: 20, directors: 10, level: 32, output: None }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeslieConfig {
    /// Interaction constants J₁..J₅; Frank constants are reported when present.
    pub j: Option<[f64; 5]>,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub t_end: f64,
    pub dt: f64,
    pub every: usize,
    /// "perturbed", "equilibrium" or "taylor-green".
    pub init: String,
    pub angle_amp: f64,
    pub vel_amp: f64,
    pub level: usize,
    /// "csv" or "binary".
    pub checkpoint_format: String,
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            nx: 64,
            ny: 64,
            lx: std::f64::consts::TAU,
            ly: std::f64::consts::TAU,
            t_end: 5.0,
            dt: 0.02,
            every: 1,
            init: "perturbed".into(),
            angle_amp: 0.3,
            vel_amp: 0.05,
            level: 32,
            checkpoint_format: "csv".into(),
            output_dir: PathBuf::from("nematic-out"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitConfig {
    /// "shear" or "splay".
    pub scenario: String,
    pub de_list: Vec<f64>,
    pub t_end: f64,
    pub shear_rate: f64,
    /// In-plane angle of the initial director for the shear scenario.
    pub n0_angle: f64,
    pub nx: usize,
    pub length: f64,
    pub amplitude: f64,
    pub level: usize,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            scenario: "shear".into(),
            de_list: vec![0.1, 0.05, 0.025],
            t_end: 5.0,
            shear_rate: 1.0,
            n0_angle: 0.3,
            nx: 32,
            length: std::f64::consts::TAU,
            amplitude: 0.3,
            level: 32,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", p.display())))
            }
        }
    }

    /// SHA-256 of the effective configuration serialized as TOML; output paths are excluded.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {v}")))
    }
}

fn nonzero(name: &str, v: usize) -> Result<(), CliError> {
    if v > 0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be at least 1")))
    }
}

fn level(v: usize) -> Result<(), CliError> {
    if (4..=512).contains(&v) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("quadrature level must lie in [4, 512], got {v}")))
    }
}

fn range(name: &str, lo: f64, hi: f64, count: usize) -> Result<(), CliError> {
    if count == 0 {
        return Err(CliError::Usage(format!("{name}: empty sweep")));
    }
    positive(&format!("{name} lower end"), lo)?;
    if !(hi >= lo) || !hi.is_finite() || (count == 1 && hi != lo) {
        return Err(CliError::Usage(format!("{name}: invalid range [{lo}, {hi}] with {count} points")));
    }
    Ok(())
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        range("alpha sweep", self.alpha_min, self.alpha_max, self.count)
    }
}

impl ClosureConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        nonzero("samples", self.samples)?;
        level(self.level)?;
        if !(self.margin > 0.0 && self.margin < 1.0 / 3.0) {
            return Err(CliError::Usage(format!("margin must lie in (0, 1/3), got {}", self.margin)));
        }
        if !(self.warm_step >= 0.0 && self.warm_step < self.margin) {
            return Err(CliError::Usage("warm_step must lie in [0, margin)".into()));
        }
        positive("tol", self.tol)?;
        positive("roundtrip_tol", self.roundtrip_tol)
    }
}

impl OperatorsConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        range("alpha sweep", self.alpha_min, self.alpha_max, self.count)?;
        nonzero("directors", self.directors)?;
        level(self.level)
    }
}

impl SimulateConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        nonzero("nx", self.nx)?;
        nonzero("ny", self.ny)?;
        nonzero("every", self.every)?;
        positive("lx", self.lx)?;
        positive("ly", self.ly)?;
        positive("t_end", self.t_end)?;
        positive("dt", self.dt)?;
        level(self.level)?;
        if !["perturbed", "equilibrium", "taylor-green"].contains(&self.init.as_str()) {
            return Err(CliError::Usage(format!("unknown init {:?}", self.init)));
        }
        if self.init == "taylor-green" && (self.nx != self.ny || self.lx != std::f64::consts::TAU || self.ly != std::f64::consts::TAU) {
            return Err(CliError::Usage("taylor-green needs a square 2π box".into()));
        }
        if !["csv", "binary"].contains(&self.checkpoint_format.as_str()) {
            return Err(CliError::Usage(format!("unknown checkpoint_format {:?}", self.checkpoint_format)));
        }
        Ok(())
    }
}

impl LimitConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !["shear", "splay"].contains(&self.scenario.as_str()) {
            return Err(CliError::Usage(format!("unknown scenario {:?}", self.scenario)));
        }
        if self.de_list.is_empty() {
            return Err(CliError::Usage("de_list is empty".into()));
        }
        for &de in &self.de_list {
            positive("De", de)?;
        }
        positive("t_end", self.t_end)?;
        nonzero("nx", self.nx)?;
        positive("length", self.length)?;
        level(self.level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::default();
        c.flow.params().unwrap();
        c.phase.validate().unwrap();
        c.closure.validate().unwrap();
        c.operators.validate().unwrap();
        c.simulate.validate().unwrap();
        c.limit.validate().unwrap();
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c: RunConfig = toml::from_str("seed = 9\n[flow]\nalpha = 8.5\n[phase]\ncount = 3\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.flow.alpha, 8.5);
        assert_eq!(c.flow.de, 1.0);
        assert_eq!(c.phase.count, 3);
        assert_eq!(c.closure.level, 48);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[flow]\nalhpa = 8.5\n").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.flow.alpha = 7.5;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let mut c = a.clone();
        c.phase.output = Some(PathBuf::from("elsewhere.csv"));
        assert_eq!(a.hash(), c.hash());
    }

    #[test]
    fn bad_ranges_are_usage_errors() {
        let p = PhaseConfig { count: 0, ..Default::default() };
        assert!(matches!(p.validate(), Err(CliError::Usage(_))));
        let p = PhaseConfig { alpha_min: 5.0, alpha_max: 4.0, ..Default::default() };
        assert!(matches!(p.validate(), Err(CliError::Usage(_))));
        let f = FlowConfig { gamma: 0.0, ..Default::default() };
        assert!(matches!(f.params(), Err(CliError::Usage(_))));
    }
}
