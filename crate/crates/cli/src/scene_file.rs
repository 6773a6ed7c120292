//! Scene files: an imaging scene plus run options, as JSON.

use std::path::Path;

use qfim_core::imaging::{Axis, ImagingScene};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const RANK_TOL_ENV: &str = "QFIM_RANK_TOL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub schema_version: u32,
    pub scene: ImagingScene,
    #[serde(default)]
    pub options: SceneOptions,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_tol: Option<f64>,
    #[serde(default)]
    pub compare_closed_form: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// See [`SweepParameter::parse`].
    pub parameter: String,
    pub values: Vec<f64>,
}

/// A scalar of the scene that a sweep sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepParameter {
    K,
    Z0,
    Coordinate { source: usize, axis: Axis },
    Intensity { source: usize },
    /// Half the separation of sources 0 and 1 along `axis`, keeping their midpoint.
    Separation { axis: Axis },
}

fn parse_axis(s: &str) -> Option<Axis> {
    match s {
        "x" => Some(Axis::X),
        "y" => Some(Axis::Y),
        "z" => Some(Axis::Z),
        _ => None,
    }
}

impl SweepParameter {
    /// Accepts `k`, `z0`, `source.<i>.<x|y|z|intensity>` and `delta.<x|y|z>`.
    pub fn parse(s: &str) -> Option<Self> {
        let parts: Vec<&str> = s.split('.').collect();
        match parts.as_slice() {
            ["k"] => Some(Self::K),
            ["z0"] => Some(Self::Z0),
            ["delta", a] => parse_axis(a).map(|axis| Self::Separation { axis }),
            ["source", i, "intensity"] => i.parse().ok().map(|source| Self::Intensity { source }),
            ["source", i, a] => {
                let source = i.parse().ok()?;
                parse_axis(a).map(|axis| Self::Coordinate { source, axis })
            }
            _ => None,
        }
    }

    pub fn apply(&self, scene: &mut ImagingScene, value: f64) -> Result<()> {
        let need = |n: usize| {
            if scene.sources.len() < n {
                Err(CliError::Usage(format!(
                    "sweep needs at least {n} sources, scene has {}",
                    scene.sources.len()
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            Self::K => scene.k = value,
            Self::Z0 => scene.z0 = value,
            Self::Coordinate { source, axis } => {
                need(source + 1)?;
                *coord(&mut scene.sources[source], axis) = value;
            }
            Self::Intensity { source } => {
                need(source + 1)?;
                scene.sources[source].intensity = value;
            }
            Self::Separation { axis } => {
                need(2)?;
                let a = *coord(&mut scene.sources[0], axis);
                let b = *coord(&mut scene.sources[1], axis);
                let mid = 0.5 * (a + b);
                *coord(&mut scene.sources[0], axis) = mid + value;
                *coord(&mut scene.sources[1], axis) = mid - value;
            }
        }
        Ok(())
    }
}

fn coord(s: &mut qfim_core::imaging::Source, axis: Axis) -> &mut f64 {
    match axis {
        Axis::X => &mut s.x,
        Axis::Y => &mut s.y,
        Axis::Z => &mut s.z,
    }
}

impl SceneFile {
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let parse_err = |message: String| CliError::Parse {
            path: origin.to_string(),
            message,
        };
        let file: SceneFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(parse_err(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        file.scene.validate().map_err(|e| parse_err(e.to_string()))?;
        if let Some(sweep) = &file.options.sweep {
            if SweepParameter::parse(&sweep.parameter).is_none() {
                return Err(parse_err(format!("unknown sweep parameter {:?}", sweep.parameter)));
            }
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene files always serialize");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text, &path.display().to_string())
    }
}

/// Tolerances in effect: command-line flag, then scene file, then
/// `QFIM_RANK_TOL` (rank only), then the library defaults.
pub fn resolve_tolerances(
    options: &SceneOptions,
    rank_flag: Option<f64>,
    solve_flag: Option<f64>,
) -> Result<qfim_core::QfimOptions> {
    let defaults = qfim_core::QfimOptions::default();
    let env = match std::env::var(RANK_TOL_ENV) {
        Ok(v) => Some(v.trim().parse::<f64>().map_err(|_| {
            CliError::Usage(format!("{RANK_TOL_ENV}={v:?} is not a number"))
        })?),
        Err(_) => None,
    };
    let rank_tol = rank_flag.or(options.rank_tol).or(env).unwrap_or(defaults.rank_tol);
    let solve_tol = solve_flag.or(options.solve_tol).unwrap_or(defaults.solve_tol);
    for (name, v) in [("rank_tol", rank_tol), ("solve_tol", solve_tol)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(qfim_core::QfimOptions { rank_tol, solve_tol })
}
