// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Parameter files and `key=value` overrides.
//!
//! A parameter file is TOML with top-level rates and one table per arm:
//!
//! ```toml
//! unit = "hz"            # or "rad_per_s" (the default)
//! g_eff = 1e9            # |g_eff|; times 2π when unit = "hz"
//! kappa_s = 3e9
//! kappa_i = 0
//! comb_bins = 0
//!
//! [arm1]
//! pump_phase = "pi"      # radians, or pi / pi/2 / 2pi / 3pi/4 ...
//! signal_phase = 0
//! seed_mag = 2
//! seed_phase = "pi/2"
//!
//! [arm2]
//! seed_mag = 2
//! ```
//!
//! Every key is optional; missing keys keep the base value. Unknown keys
//! are errors. Overrides use dotted keys (`arm1.seed_phase=pi`) and are
//! applied after the file.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{validate_params, EnbsParams, ParamError, SeedField};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid parameter file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid override `{0}`: expected key=value")]
    Override(String),
    #[error("unknown parameter `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    Value { key: String, value: String },
    #[error(transparent)]
    Params(#[from] ParamError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateUnit {
    /// Ordinary frequency; multiplied by 2π.
    Hz,
    /// Angular frequency, used as is.
    RadPerS,
}

impl RateUnit {
    fn factor(self) -> f64 {
        match self {
            RateUnit::Hz => TAU,
            RateUnit::RadPerS => 1.0,
        }
    }
}

/// A phase written as radians or as a multiple of π.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseValue {
    Radians(f64),
    Text(String),
}

impl PhaseValue {
    fn radians(&self, key: &str) -> Result<f64, ConfigError> {
        match self {
            PhaseValue::Radians(v) => Ok(*v),
            PhaseValue::Text(s) => parse_phase(s).ok_or_else(|| ConfigError::Value {
                key: key.to_string(),
                value: s.clone(),
            }),
        }
    }
}

/// Parse `pi`, `-pi/2`, `2pi`, `3pi/4`, `0.5pi` or plain radians.
pub fn parse_phase(text: &str) -> Option<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.to_ascii_lowercase();
    let Some(k) = s.find("pi") else {
        return s.parse::<f64>().ok().filter(|v| v.is_finite());
    };
    let (coef, rest) = (&s[..k], &s[k + 2..]);
    let coef = match coef.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    let den = match rest {
        "" => 1.0,
        r => r
            .strip_prefix('/')?
            .parse::<f64>()
            .ok()
            .filter(|d| *d != 0.0)?,
    };
    let v = coef * PI / den;
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_phase: Option<PhaseValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signal_phase: Option<PhaseValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_mag: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_phase: Option<PhaseValue>,
}

/// Contents of a parameter file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<RateUnit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_eff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_i: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comb_bins: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arm1: Option<ArmConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arm2: Option<ArmConfig>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Apply one `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Override(assignment.to_string()))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = || ConfigError::Value {
            key: key.to_string(),
            value: value.to_string(),
        };
        let number = || value.parse::<f64>().map_err(|_| bad());
        let phase = || parse_phase(value).map(PhaseValue::Radians).ok_or_else(bad);
        match key {
            "unit" => {
                self.unit = Some(match value {
                    "hz" => RateUnit::Hz,
                    "rad_per_s" => RateUnit::RadPerS,
                    _ => return Err(bad()),
                })
            }
            "g_eff" => self.g_eff = Some(number()?),
            "kappa_s" => self.kappa_s = Some(number()?),
            "kappa_i" => self.kappa_i = Some(number()?),
            "comb_bins" => self.comb_bins = Some(value.parse().map_err(|_| bad())?),
            _ => {
                let (arm, field) = key
                    .split_once('.')
                    .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
                let slot = match arm {
                    "arm1" => &mut self.arm1,
                    "arm2" => &mut self.arm2,
                    _ => return Err(ConfigError::UnknownKey(key.to_string())),
                };
                let arm = slot.get_or_insert_with(ArmConfig::default);
                match field {
                    "pump_phase" => arm.pump_phase = Some(phase()?),
                    "signal_phase" => arm.signal_phase = Some(phase()?),
                    "seed_mag" => arm.seed_mag = Some(number()?),
                    "seed_phase" => arm.seed_phase = Some(phase()?),
                    _ => return Err(ConfigError::UnknownKey(key.to_string())),
                }
            }
        }
        Ok(())
    }

    /// Overlay these settings on `base` and validate the result.
    pub fn resolve(&self, base: &EnbsParams) -> Result<EnbsParams, ConfigError> {
        let f = self.unit.unwrap_or(RateUnit::RadPerS).factor();
        let mut p = *base;
        if let Some(v) = self.g_eff {
            p.g_eff_mag = v * f;
        }
        if let Some(v) = self.kappa_s {
            p.kappa_s = v * f;
        }
        if let Some(v) = self.kappa_i {
            p.kappa_i = v * f;
        }
        if let Some(n) = self.comb_bins {
            p.comb_bins = n;
        }
        let arm = |cfg: &Option<ArmConfig>,
                   name: &str,
                   pump: &mut f64,
                   signal: &mut f64,
                   seed: &mut SeedField| {
            let Some(c) = cfg else { return Ok(()) };
            if let Some(v) = &c.pump_phase {
                *pump = v.radians(&format!("{name}.pump_phase"))?;
            }
            if let Some(v) = &c.signal_phase {
                *signal = v.radians(&format!("{name}.signal_phase"))?;
            }
            if let Some(v) = c.seed_mag {
                seed.amplitude_mag = v;
            }
            if let Some(v) = &c.seed_phase {
                seed.phase = v.radians(&format!("{name}.seed_phase"))?;
            }
            Ok::<(), ConfigError>(())
        };
        arm(
            &self.arm1,
            "arm1",
            &mut p.pump_phase_1,
            &mut p.signal_phase_1,
            &mut p.seed_1,
        )?;
        arm(
            &self.arm2,
            "arm2",
            &mut p.pump_phase_2,
            &mut p.signal_phase_2,
            &mut p.seed_2,
        )?;
        Ok(validate_params(&p)?)
    }

    /// Complete file describing `p` exactly, in rad/s.
    pub fn from_params(p: &EnbsParams) -> Self {
        let arm = |pump: f64, signal: f64, seed: SeedField| ArmConfig {
            pump_phase: Some(PhaseValue::Radians(pump)),
            signal_phase: Some(PhaseValue::Radians(signal)),
            seed_mag: Some(seed.amplitude_mag),
            seed_phase: Some(PhaseValue::Radians(seed.phase)),
        };
        Self {
            unit: Some(RateUnit::RadPerS),
            g_eff: Some(p.g_eff_mag),
            kappa_s: Some(p.kappa_s),
            kappa_i: Some(p.kappa_i),
            comb_bins: Some(p.comb_bins),
            arm1: Some(arm(p.pump_phase_1, p.signal_phase_1, p.seed_1)),
            arm2: Some(arm(p.pump_phase_2, p.signal_phase_2, p.seed_2)),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("parameter files always serialize")
    }
}

/// Base parameters, then the optional file, then the overrides in order.
pub fn resolve_params(
    base: &EnbsParams,
    file: Option<&Path>,
    overrides: &[String],
) -> Result<EnbsParams, ConfigError> {
    let mut cfg = match file {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    for o in overrides {
        cfg.set(o)?;
    }
    cfg.resolve(base)
}
