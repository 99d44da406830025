//! Configuration of the verification harness, read from a JSON file.
//!
//! Every field has a default, so an empty object (or no file at all) is a valid
//! configuration. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::params::Setting;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SettingConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: Vec<f64>,
}

impl Default for SettingConfig {
    fn default() -> Self {
        SettingConfig { n: 1, k: vec![1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Base refinement of composite rules; stability checks compare it with its double.
    pub refinement: usize,
    /// Relative tolerance of adaptive integrals run by the suites.
    pub adaptive_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            refinement: 1,
            adaptive_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    #[serde(rename = "L_max")]
    pub l_max: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig { l_max: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub seed: u64,
    /// Sample count of the cheap pointwise checks (metric inequalities).
    pub n_samples: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            seed: 20_240_601,
            n_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    /// Truncation radius of the regularity integrals, as a multiple of `max(|y|, |y₀|)`.
    #[serde(rename = "R_truncation")]
    pub r_truncation: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig { r_truncation: 16.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsConfig {
    /// `b` in the small-time majorant `t^{−q} τ_y(e^{−b‖·‖/t})`.
    pub b_small_time: f64,
    /// `b` in the large-time majorant `e^{−qt} τ_y(e^{−b‖·‖})`.
    pub b_large_time: f64,
    /// `c` in the difference-quotient majorant.
    pub c_difference: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            b_small_time: 1.0 / 1f64.sinh(),
            b_large_time: 0.5f64.tanh(),
            c_difference: 0.25,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub setting: SettingConfig,
    pub quadrature: QuadratureConfig,
    pub spectral: SpectralConfig,
    pub sampling: SamplingConfig,
    /// Tolerance overrides, keyed either `suite` or `suite.check`.
    pub tolerances: BTreeMap<String, f64>,
    pub domain: DomainConfig,
    pub constants: ConstantsConfig,
}

impl Config {
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.setting.k.len() != self.setting.n {
            return Err(Error::Config(format!(
                "setting: N = {} but k has {} entries",
                self.setting.n,
                self.setting.k.len()
            )));
        }
        self.setting()?;
        if let Some((name, tol)) = self.tolerances.iter().find(|(_, t)| !(**t > 0.0)) {
            return Err(Error::Config(format!("tolerances.{name} = {tol} must be positive")));
        }
        let positive = [
            ("quadrature.adaptive_tol", self.quadrature.adaptive_tol),
            ("domain.r_truncation", self.domain.r_truncation),
            ("constants.b_small_time", self.constants.b_small_time),
            ("constants.b_large_time", self.constants.b_large_time),
            ("constants.c_difference", self.constants.c_difference),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::Config(format!("{name} = {v} must be positive")));
        }
        if self.domain.r_truncation < 4.0 {
            return Err(Error::Config("domain.r_truncation must be at least 4".into()));
        }
        if self.quadrature.refinement == 0 || self.sampling.n_samples == 0 || self.spectral.l_max == 0 {
            return Err(Error::Config(
                "quadrature.refinement, sampling.n_samples and spectral.l_max must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn setting(&self) -> Result<Setting> {
        Setting::new(self.setting.k.clone())
            .and_then(|s| s.require_valid().map(|_| s))
            .map_err(|e| Error::Config(format!("setting: {e}")))
    }

    /// Tolerance of a check: `tolerances["suite.check"]`, then `tolerances["suite"]`, then `default`.
    pub fn tolerance(&self, suite: &str, check: &str, default: f64) -> f64 {
        self.tolerances
            .get(&format!("{suite}.{check}"))
            .or_else(|| self.tolerances.get(suite))
            .copied()
            .unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let c = Config::from_json("{}", "inline").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.setting().unwrap().k(), &[1.0]);
    }

    #[test]
    fn errors_name_the_location() {
        let e = Config::from_json("{\n  \"setting\": {\"N\": 2, \"k\": [1.0]}\n}", "cfg.json").unwrap_err();
        assert!(e.to_string().contains("N = 2"), "{e}");
        let e = Config::from_json("{\n  \"sampling\": {\"seed\": -1}\n}", "cfg.json").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = Config::from_json("{\"colour\": 1}", "cfg.json").unwrap_err();
        assert!(e.to_string().contains("unknown field"), "{e}");
        let e = Config::from_json("{\"tolerances\": {\"metric.triangle\": 0}}", "cfg.json").unwrap_err();
        assert!(e.to_string().contains("metric.triangle"), "{e}");
        assert!(Config::from_json("{\"setting\": {\"N\": 1, \"k\": [0.2]}}", "c").is_err());
    }

    #[test]
    fn tolerance_override() {
        let c = Config::from_json("{\"tolerances\": {\"metric.triangle\": 1e-9}}", "c").unwrap();
        assert_eq!(c.tolerance("metric", "triangle", 1e-12), 1e-9);
        assert_eq!(c.tolerance("metric", "other", 1e-12), 1e-12);
        let c = Config::from_json("{\"tolerances\": {\"cz\": 1e-8}, \"spectral\": {\"L_max\": 80}}", "c").unwrap();
        assert_eq!(c.tolerance("cz", "mean_zero", 1e-10), 1e-8);
        assert_eq!(c.spectral.l_max, 80);
    }
}
