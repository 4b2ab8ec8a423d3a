//! Experiment configuration read from TOML.
//!
//! ```toml
//! [frequency]
//! preset = "golden"          # or: turns = [0.618033988749895]
//!
//! [weights]
//! eta = 1.0
//! weights = [1.0]
//!
//! [potential]
//! coupling = 2.0
//! width = 2.0
//! cone = 1.0                 # optional aperture tag, checked on every mode
//! modes = [{ k = [1], re = 1.0, im = 0.0 }]
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{ConeSpec, MultiIndex, ScalarSeries, WeightScheme};
use crate::cocycle::{CocycleSpec, LyapunovOptions, Potential, UhOptions};
use crate::diophantine::Frequency;
use crate::error::{Error, Result};
use crate::kam::{KamOptions, StepOptions};
use crate::spectral::Region;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyConfig {
    pub preset: Option<String>,
    /// Components as fractions of the circle.
    pub turns: Option<Vec<f64>>,
}

impl Default for FrequencyConfig {
    fn default() -> Self {
        FrequencyConfig { preset: Some("golden".into()), turns: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub eta: f64,
    pub weights: Vec<f64>,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig { eta: 1.0, weights: vec![1.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub k: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub coupling: f64,
    pub width: f64,
    pub cone: Option<f64>,
    pub modes: Vec<ModeConfig>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig {
            coupling: 2.0,
            width: 2.0,
            cone: Some(1.0),
            modes: vec![ModeConfig { k: vec![1], re: 1.0, im: 0.0 }],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub iterates: usize,
    pub phases: usize,
    pub seed: u64,
    pub uh: UhOptions,
}

impl Default for EngineConfig {
    fn default() -> Self {
        let l = LyapunovOptions::default();
        EngineConfig { iterates: l.iterates, phases: l.phases, seed: l.seed, uh: UhOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub resolution: [usize; 2],
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { re: [-3.0, 3.0], im: [-1.0, 1.0], resolution: [61, 21] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub eps_min: f64,
    pub eps_max: f64,
    pub steps: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { eps_min: -1.0, eps_max: 1.5, steps: 26 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KamConfig {
    /// Cone aperture used for the reduction.
    pub aperture: f64,
    pub width_final: f64,
    pub aperture_final: f64,
    pub max_steps: usize,
    pub target: f64,
    pub delta: Option<f64>,
    pub cutoff: Option<f64>,
    pub residual_tol: f64,
    pub k_max: f64,
    pub coefficient_floor: f64,
    pub max_rounds: usize,
}

impl Default for KamConfig {
    fn default() -> Self {
        let o = KamOptions::default();
        KamConfig {
            aperture: 1.0,
            width_final: o.width_final,
            aperture_final: o.aperture_final,
            max_steps: o.max_steps,
            target: o.target,
            delta: o.delta,
            cutoff: o.cutoff,
            residual_tol: o.residual_tol,
            k_max: o.step.k_max,
            coefficient_floor: o.step.coefficient_floor,
            max_rounds: o.step.max_rounds,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub frequency: FrequencyConfig,
    pub weights: WeightConfig,
    pub potential: PotentialConfig,
    pub engine: EngineConfig,
    pub scan: ScanConfig,
    pub profile: ProfileConfig,
    pub kam: KamConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical TOML form, in hex.
    pub fn digest(&self) -> Result<String> {
        let hash = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(hash.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn validate(&self) -> Result<()> {
        let freq = self.frequency()?;
        let potential = self.potential()?;
        if potential.dim() != freq.dim() {
            return Err(Error::Config(format!(
                "frequency has {} components but the weights describe {} axes",
                freq.dim(),
                potential.dim()
            )));
        }
        if self.engine.iterates == 0 || self.engine.phases == 0 {
            return Err(Error::Config("engine.iterates and engine.phases must be positive".into()));
        }
        self.region().validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.profile.steps < 2 || !(self.profile.eps_min < self.profile.eps_max) {
            return Err(Error::Config("profile needs eps_min < eps_max and at least 2 steps".into()));
        }
        for eps in [self.profile.eps_min, self.profile.eps_max] {
            if !(eps.abs() < self.potential.width) {
                return Err(Error::Config(format!("profile shift {eps} is outside the strip of width {}", self.potential.width)));
            }
        }
        Ok(())
    }

    pub fn frequency(&self) -> Result<Frequency> {
        match (&self.frequency.preset, &self.frequency.turns) {
            (Some(_), Some(_)) => Err(Error::Config("give either frequency.preset or frequency.turns, not both".into())),
            (Some(name), None) => Frequency::preset(name),
            (None, Some(t)) => Frequency::new(t.clone()).map_err(|e| Error::Config(e.to_string())),
            (None, None) => Err(Error::Config("frequency needs a preset or turns".into())),
        }
    }

    pub fn scheme(&self) -> Result<WeightScheme> {
        WeightScheme::new(self.weights.eta, self.weights.weights.clone()).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn potential(&self) -> Result<Potential> {
        let scheme = self.scheme()?;
        let p = &self.potential;
        if !(p.width > 0.0) {
            return Err(Error::Config(format!("potential.width must be positive, got {}", p.width)));
        }
        if p.modes.is_empty() {
            return Err(Error::Config("potential.modes is empty".into()));
        }
        let mut profile = ScalarSeries::new(scheme, p.width);
        for m in &p.modes {
            profile
                .add_mode(MultiIndex(m.k.clone()), Complex64::new(m.re, m.im))
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(r) = p.cone {
            profile = profile.with_cone(r).map_err(|e| Error::Config(e.to_string()))?;
        }
        Potential::new(p.coupling, profile).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn cocycle(&self, energy: Complex64, eps: f64) -> Result<CocycleSpec> {
        CocycleSpec::new(self.frequency()?, energy, self.potential()?, eps)
    }

    pub fn lyapunov_options(&self) -> LyapunovOptions {
        LyapunovOptions { iterates: self.engine.iterates, phases: self.engine.phases, seed: self.engine.seed }
    }

    pub fn uh_options(&self) -> UhOptions {
        self.engine.uh
    }

    pub fn region(&self) -> Region {
        Region {
            re: (self.scan.re[0], self.scan.re[1]),
            im: (self.scan.im[0], self.scan.im[1]),
            resolution: (self.scan.resolution[0], self.scan.resolution[1]),
        }
    }

    pub fn kam_options(&self) -> KamOptions {
        let k = &self.kam;
        KamOptions {
            width_final: k.width_final,
            aperture_final: k.aperture_final,
            max_steps: k.max_steps,
            target: k.target,
            delta: k.delta,
            cutoff: k.cutoff,
            residual_tol: k.residual_tol,
            step: StepOptions {
                k_max: k.k_max,
                coefficient_floor: k.coefficient_floor,
                max_rounds: k.max_rounds,
                ..StepOptions::default()
            },
        }
    }

    pub fn kam_cone(&self) -> Result<ConeSpec> {
        ConeSpec::new(self.kam.aperture, self.scheme()?).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Closed-form families recognized from a potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolvableFamily {
    /// `lambda = 0`.
    Free,
    /// `lambda e^{i x}`.
    Sarnak,
    /// `2 lambda cos x`.
    AlmostMathieu,
}

pub fn solvable_family(p: &Potential) -> Option<SolvableFamily> {
    if p.coupling == 0.0 {
        return Some(SolvableFamily::Free);
    }
    if p.dim() != 1 {
        return None;
    }
    let one = Complex64::new(1.0, 0.0);
    let modes: Vec<(i64, Complex64)> = p.profile.iter().map(|(k, c)| (k.0[0], *c)).collect();
    match modes.as_slice() {
        [(1, c)] if *c == one => Some(SolvableFamily::Sarnak),
        [(-1, a), (1, b)] if *a == one && *b == one => Some(SolvableFamily::AlmostMathieu),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_and_digest_is_stable() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.digest().unwrap(), back.digest().unwrap());
        assert_eq!(cfg.digest().unwrap().len(), 64);
    }

    #[test]
    fn off_cone_mode_rejected() {
        let text = r#"
            [potential]
            coupling = 1.0
            width = 1.0
            cone = 0.5
            modes = [{ k = [-1], re = 1.0 }]
        "#;
        assert!(matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let text = r#"
            [frequency]
            preset = "golden-silver"
        "#;
        assert!(ExperimentConfig::from_toml(text).is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(ExperimentConfig::from_toml("[potential]\ncoupling = 1.0\nwidth = 1.0\nmodes = []\nfoo = 1").is_err());
    }

    #[test]
    fn families() {
        assert_eq!(solvable_family(&Potential::sarnak(2.0, 1.0)), Some(SolvableFamily::Sarnak));
        assert_eq!(solvable_family(&Potential::cosine(0.5, 1.0)), Some(SolvableFamily::AlmostMathieu));
        assert_eq!(solvable_family(&Potential::cosine(0.0, 1.0)), Some(SolvableFamily::Free));
    }
}
