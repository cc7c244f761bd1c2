// Copyright 2026 The oqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration. Strict JSON: unknown keys are rejected.

use std::path::PathBuf;

use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Output file stem.
    pub experiment: String,
    pub model: Option<ChainConfig>,
    pub oscillator: Option<OscillatorConfig>,
    #[serde(default)]
    pub bath: BathConfig,
    pub generators: Option<Vec<Method>>,
    #[serde(default)]
    pub grid: GridConfig,
    pub trajectories: Option<TrajectoryBlock>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub sites: Option<usize>,
    /// Defaults to `⌊sites/2⌋`.
    pub particles: Option<usize>,
    #[serde(default = "one")]
    pub hopping: f64,
    #[serde(default = "two")]
    pub interaction: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            sites: None,
            particles: None,
            hopping: 1.0,
            interaction: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorConfig {
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub omega: f64,
    /// Fock levels; defaults to what the highest temperature needs.
    pub levels: Option<usize>,
}

impl Default for OscillatorConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega: 1.0,
            levels: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// One bath on `n̂_1`.
    #[default]
    Local,
    /// An independent bath on every `n̂_i`.
    Global,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub cutoff: Option<f64>,
    pub gamma: Option<f64>,
    pub temperature: Option<f64>,
    #[serde(default)]
    pub coupling: Coupling,
    pub temperature_left: Option<f64>,
    pub temperature_right: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Redfield,
    Rwa,
    Pseudo,
    Truncated,
    TruncatedFixed,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Redfield => "redfield",
            Method::Rwa => "rwa",
            Method::Pseudo => "pseudo",
            Method::Truncated => "truncated",
            Method::TruncatedFixed => "truncated-fixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// Either an explicit list or `{"from", "to", "points", "spacing"}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Range(AxisRange),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub from: f64,
    pub to: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub fn range(from: f64, to: f64, points: usize) -> Self {
        Axis::Range(AxisRange {
            from,
            to,
            points,
            spacing: Spacing::Log,
        })
    }

    pub fn values(&self) -> Result<Vec<f64>, String> {
        let v = match self {
            Axis::List(v) => v.clone(),
            Axis::Range(r) => {
                if r.points == 0 {
                    return Err("range needs at least one point".into());
                }
                if r.spacing == Spacing::Log && !(r.from > 0.0 && r.to > 0.0) {
                    return Err("log range needs positive bounds".into());
                }
                let n = r.points;
                (0..n)
                    .map(|k| {
                        let s = if n == 1 {
                            0.0
                        } else {
                            k as f64 / (n - 1) as f64
                        };
                        match r.spacing {
                            Spacing::Log => (r.from.ln() + s * (r.to.ln() - r.from.ln())).exp(),
                            Spacing::Linear => r.from + s * (r.to - r.from),
                        }
                    })
                    .collect()
            }
        };
        if v.is_empty() {
            return Err("empty axis".into());
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err("axis values must be finite".into());
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub temperatures: Option<Axis>,
    pub gammas: Option<Axis>,
    pub betas: Option<Axis>,
    pub sites: Option<Vec<usize>>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
    /// Two temperatures for the `T → ∞` extrapolation of the oscillator.
    pub extrapolation: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryBlock {
    pub count: usize,
    #[serde(default = "ten")]
    pub max_sites: usize,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn ten() -> usize {
    10
}

pub fn parse(text: &str) -> Result<ExperimentConfig, String> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if cfg.experiment.is_empty()
        || !cfg
            .experiment
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
    {
        return Err(format!(
            "experiment name {:?} must be non-empty and use only [A-Za-z0-9._-]",
            cfg.experiment
        ));
    }
    Ok(cfg)
}

pub fn positive(name: &str, v: f64) -> Result<f64, String> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{name} must be positive and finite, got {v}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = parse(r#"{"experiment": "w"}"#).unwrap();
        assert_eq!(cfg.bath.coupling, Coupling::Local);
        assert!(cfg.model.is_none());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse(r#"{"experiment": "w", "colour": 1}"#).is_err());
        assert!(parse(r#"{"experiment": "w", "bath": {"gama": 0.1}}"#).is_err());
        assert!(parse(
            r#"{"experiment": "w", "grid": {"gammas": {"from": 1, "to": 2, "points": 2, "x": 0}}}"#
        )
        .is_err());
    }

    #[test]
    fn bad_names_rejected() {
        assert!(parse(r#"{"experiment": "../x"}"#).is_err());
        assert!(parse(r#"{"experiment": ""}"#).is_err());
    }

    #[test]
    fn axes() {
        let cfg = parse(r#"{"experiment": "a", "grid": {"gammas": [0.1, 0.2], "temperatures": {"from": 1, "to": 100, "points": 3}}}"#)
            .unwrap();
        assert_eq!(cfg.grid.gammas.unwrap().values().unwrap(), vec![0.1, 0.2]);
        let t = cfg.grid.temperatures.unwrap().values().unwrap();
        assert!((t[1] - 10.0).abs() < 1e-12);
        let lin = Axis::Range(AxisRange {
            from: 0.0,
            to: 1.0,
            points: 3,
            spacing: Spacing::Linear,
        });
        assert_eq!(lin.values().unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(Axis::range(0.0, 1.0, 3).values().is_err());
    }

    #[test]
    fn methods() {
        let cfg =
            parse(r#"{"experiment": "a", "generators": ["redfield", "truncated-fixed"]}"#).unwrap();
        assert_eq!(
            cfg.generators.unwrap(),
            vec![Method::Redfield, Method::TruncatedFixed]
        );
        assert!(parse(r#"{"experiment": "a", "generators": ["davies"]}"#).is_err());
    }
}
