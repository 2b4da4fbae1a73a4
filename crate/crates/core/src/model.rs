//! Physical constants, system parameters and the couplings derived from them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    #[serde(rename = "G")]
    pub g: f64,
    pub c: f64,
    pub hbar: f64,
}

impl PhysicalConstants {
    pub const fn codata() -> Self {
        Self {
            g: 6.674_30e-11,
            c: 299_792_458.0,
            hbar: 1.054_571_817e-34,
        }
    }

    /// G = c = hbar = 1.
    pub const fn unit() -> Self {
        Self {
            g: 1.0,
            c: 1.0,
            hbar: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("G", self.g)?;
        positive("c", self.c)?;
        positive("hbar", self.hbar)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

/// Test-mass mass. `Infinite` switches off the ponderomotive coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mass {
    Finite(f64),
    Infinite,
}

impl Mass {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Mass::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Mass::Finite(m) => Some(m),
            Mass::Infinite => None,
        }
    }
}

impl Serialize for Mass {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Mass::Finite(m) => ser.serialize_f64(m),
            Mass::Infinite => ser.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Mass {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Word(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(m) => Ok(Mass::Finite(m)),
            Raw::Word(w) if w == "infinite" => Ok(Mass::Infinite),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "expected a number or \"infinite\", got \"{w}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub omega0: f64,
    pub alpha_bar: f64,
    pub gamma: f64,
    pub delta: f64,
    pub m: Mass,
    #[serde(rename = "L")]
    pub length: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        positive("omega0", self.omega0)?;
        positive("gamma", self.gamma)?;
        positive("L", self.length)?;
        if !self.delta.is_finite() {
            return Err(Error::validation("delta", "must be finite"));
        }
        if !(self.alpha_bar.is_finite() && self.alpha_bar >= 0.0) {
            return Err(Error::validation("alpha_bar", "must be finite and >= 0"));
        }
        if let Mass::Finite(m) = self.m {
            positive("m", m)?;
        }
        Ok(())
    }

    pub fn is_tuned(&self) -> bool {
        self.delta == 0.0
    }

    /// The optomechanical drive amplitude omega0 * alpha_bar.
    pub fn drive(&self) -> f64 {
        self.omega0 * self.alpha_bar
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite and > 0, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedCouplings {
    pub epsilon_q: f64,
    #[serde(rename = "epsilon_GW")]
    pub epsilon_gw: f64,
    #[serde(rename = "M_G")]
    pub m_g: f64,
}

impl DerivedCouplings {
    /// Signed coefficient of `s` in the gravitational backaction term
    /// `epsilon_q/s^2 + b*s`. Radiation reaction removes energy, so b = -epsilon_GW.
    pub fn gw_coupling(&self) -> f64 {
        -self.epsilon_gw
    }

    /// Delta-free backaction combination `epsilon_q/s^2 + b*s`.
    pub fn backaction(&self, s: Complex64) -> Complex64 {
        let mut out = s * self.gw_coupling();
        if self.epsilon_q != 0.0 {
            out += self.epsilon_q / (s * s);
        }
        out
    }
}

pub fn derive_couplings(params: &SystemParams, consts: &PhysicalConstants) -> Result<DerivedCouplings> {
    params.validate()?;
    consts.validate()?;
    let drive2 = params.drive() * params.drive();
    let epsilon_q = match params.m {
        Mass::Finite(m) => drive2 / (m * params.length * params.length),
        Mass::Infinite => 0.0,
    };
    let epsilon_gw = 8.0 * consts.g / (15.0 * consts.c.powi(5)) * drive2;
    let m_g = consts.c * consts.c / (32.0 * PI * consts.g);
    Ok(DerivedCouplings {
        epsilon_q,
        epsilon_gw,
        m_g,
    })
}

/// Backaction modification of the optical response, `(epsilon_q/s^2 + b*s)/Delta`.
pub fn xi_backaction(s: Complex64, params: &SystemParams, couplings: &DerivedCouplings) -> Result<Complex64> {
    if params.delta == 0.0 {
        return Err(Error::singularity("xi_backaction", "Delta = 0 (use the tuned solver)"));
    }
    if s == Complex64::new(0.0, 0.0) {
        return Err(Error::singularity("xi_backaction", "s = 0"));
    }
    Ok(couplings.backaction(s) / params.delta)
}

/// Parameters, constants and couplings bundled for the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detector {
    pub params: SystemParams,
    pub consts: PhysicalConstants,
    pub couplings: DerivedCouplings,
}

impl Detector {
    pub fn new(params: SystemParams, consts: PhysicalConstants) -> Result<Self> {
        let couplings = derive_couplings(&params, &consts)?;
        Ok(Self {
            params,
            consts,
            couplings,
        })
    }
}
