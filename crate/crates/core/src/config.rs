//! Run configuration: one strict JSON document per run.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freq_response::FrequencyGrid;
use crate::model::{Detector, PhysicalConstants, SystemParams};
use crate::quad::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Spacing {
    #[serde(rename = "lin")]
    Linear,
    #[default]
    #[serde(rename = "log")]
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn build(&self) -> Result<FrequencyGrid> {
        match self.spacing {
            Spacing::Linear => FrequencyGrid::linear(self.min, self.max, self.count),
            Spacing::Log => FrequencyGrid::log(self.min, self.max, self.count),
        }
    }
}

fn default_angles() -> Vec<f64> {
    vec![FRAC_PI_2]
}

fn default_true() -> bool {
    true
}

fn default_tolerance() -> f64 {
    1e-8
}

fn default_solver() -> String {
    "auto".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumOptions {
    /// Homodyne angles in radians; pi/2 reads the phase quadrature.
    #[serde(default = "default_angles")]
    pub homodyne_angles: Vec<f64>,
    #[serde(default)]
    pub qcrb: bool,
    #[serde(default = "default_true")]
    pub include_gw_noise: bool,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            homodyne_angles: default_angles(),
            qcrb: false,
            include_gw_noise: true,
            tolerance: default_tolerance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiateOptions {
    pub omega: f64,
    pub points: Vec<[f64; 3]>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorOptions {
    pub times: Vec<f64>,
    #[serde(default = "default_commutator_tolerance")]
    pub tolerance: f64,
}

fn default_commutator_tolerance() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemParams,
    #[serde(default)]
    pub constants: PhysicalConstants,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_solver")]
    pub solver: String,
    #[serde(default)]
    pub spectrum: SpectrumOptions,
    #[serde(default)]
    pub radiate: Option<RadiateOptions>,
    #[serde(default)]
    pub commutator: Option<CommutatorOptions>,
    /// Optional SVG plot for the response and spectrum commands.
    #[serde(default)]
    pub plot: Option<PathBuf>,
}

fn tolerance(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must lie in (0, 1), got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::validation("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::validation("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.system.validate()?;
        if let Some(g) = &self.grid {
            if !(g.min.is_finite() && g.max.is_finite() && g.min >= 0.0) {
                return Err(Error::validation("grid.min", "grid bounds must be finite and >= 0"));
            }
            if g.max < g.min {
                return Err(Error::validation("grid.max", "must be >= grid.min"));
            }
            if g.count == 0 {
                return Err(Error::validation("grid.count", "must be >= 1"));
            }
            if g.spacing == Spacing::Log && g.min <= 0.0 {
                return Err(Error::validation("grid.min", "log spacing needs min > 0"));
            }
        }
        if self.spectrum.homodyne_angles.is_empty() || self.spectrum.homodyne_angles.iter().any(|z| !z.is_finite()) {
            return Err(Error::validation(
                "spectrum.homodyne_angles",
                "needs at least one finite angle",
            ));
        }
        tolerance("spectrum.tolerance", self.spectrum.tolerance)?;
        if let Some(r) = &self.radiate {
            if !(r.omega > 0.0 && r.omega.is_finite()) {
                return Err(Error::validation("radiate.omega", "must be finite and > 0"));
            }
            if r.points.is_empty() {
                return Err(Error::validation("radiate.points", "needs at least one field point"));
            }
            tolerance("radiate.tolerance", r.tolerance)?;
        }
        if let Some(c) = &self.commutator {
            if c.times.is_empty() || c.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                return Err(Error::validation("commutator.times", "needs finite times >= 0"));
            }
            tolerance("commutator.tolerance", c.tolerance)?;
        }
        Ok(())
    }

    pub fn detector(&self) -> Result<Detector> {
        Detector::new(self.system, self.constants)
    }

    pub fn grid(&self) -> Result<FrequencyGrid> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::validation("grid", "this command needs a frequency grid"))?
            .build()
    }

    pub fn spectrum_tolerance(&self) -> Tolerance {
        Tolerance::rel(self.spectrum.tolerance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"system": {"omega0": 1.0, "alpha_bar": 0.1, "gamma": 1.0, "delta": 0.0, "m": 1.0, "L": 1.0},
        "constants": {"G": 1e-3, "c": 10.0, "hbar": 1.0}"#;

    fn with(extra: &str) -> String {
        format!("{BASE}{extra}}}")
    }

    #[test]
    fn defaults() {
        let cfg = RunConfig::from_json(&with("")).unwrap();
        assert_eq!(cfg.solver, "auto");
        assert_eq!(cfg.spectrum.homodyne_angles, vec![FRAC_PI_2]);
        assert!(cfg.spectrum.include_gw_noise);
        assert!(cfg.grid().is_err());
        let cfg = RunConfig::from_json(
            r#"{"system": {"omega0": 1.0, "alpha_bar": 0.1, "gamma": 1.0, "delta": 0.0, "m": "infinite", "L": 1.0}}"#,
        )
        .unwrap();
        assert_eq!(cfg.constants, PhysicalConstants::codata());
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = RunConfig::from_json(&with(r#", "grdi": {}"#)).unwrap_err();
        assert!(e.is_validation());
        assert!(e.to_string().contains("grdi"), "{e}");
        let e = RunConfig::from_json(&with(r#", "grid": {"min": 1, "max": 2, "count": 3, "step": 1}"#)).unwrap_err();
        assert!(e.to_string().contains("step"));
    }

    #[test]
    fn bad_values_name_field() {
        for (extra, field) in [
            (r#", "grid": {"min": 2, "max": 1, "count": 3}"#, "grid.max"),
            (
                r#", "grid": {"min": 0, "max": 1, "count": 3, "spacing": "log"}"#,
                "grid.min",
            ),
            (r#", "grid": {"min": 1, "max": 2, "count": 0}"#, "grid.count"),
            (r#", "radiate": {"omega": -1, "points": [[1,0,0]]}"#, "radiate.omega"),
            (r#", "commutator": {"times": [-1]}"#, "commutator.times"),
            (r#", "spectrum": {"homodyne_angles": []}"#, "spectrum.homodyne_angles"),
        ] {
            let e = RunConfig::from_json(&with(extra)).unwrap_err();
            assert!(e.to_string().contains(field), "{e}");
        }
        let bad = BASE.replace("\"gamma\": 1.0", "\"gamma\": -1.0");
        let e = RunConfig::from_json(&format!("{bad}}}")).unwrap_err();
        assert!(e.to_string().contains("gamma"));
    }

    #[test]
    fn grid_spacing() {
        let cfg =
            RunConfig::from_json(&with(r#", "grid": {"min": 1, "max": 3, "count": 3, "spacing": "lin"}"#)).unwrap();
        assert_eq!(cfg.grid().unwrap().points(), &[1.0, 2.0, 3.0]);
        let cfg = RunConfig::from_json(&with(r#", "grid": {"min": 1, "max": 100, "count": 3}"#)).unwrap();
        let p = cfg.grid().unwrap().points().to_vec();
        assert!((p[1] - 10.0).abs() < 1e-12);
    }
}
