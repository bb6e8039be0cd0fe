//! Run configuration: everything a command needs, in one serializable record.
//!
//! A `RunConfig` is built either from command-line flags or from a JSON file
//! (`run --config`). Before execution it is resolved: defaults are filled in
//! and the tolerance profile is pinned, so that the copy embedded in every
//! output reproduces the run exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nonholonomic::defects::LoopSpec;
use nonholonomic::dynamics::Flow;
use nonholonomic::library;
use nonholonomic::pathintegral::{Manifold, MeasureMode, ShortTimeConfig, SignMode, DEFAULT_LADDER};
use nonholonomic::{Chart, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Tensors,
    Geodesic,
    Autoparallel,
    Variation,
    Burgers,
    Amplitude,
    Spectrum,
}

impl CommandKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandKind::Tensors => "tensors",
            CommandKind::Geodesic => "geodesic",
            CommandKind::Autoparallel => "autoparallel",
            CommandKind::Variation => "variation",
            CommandKind::Burgers => "burgers",
            CommandKind::Amplitude => "amplitude",
            CommandKind::Spectrum => "spectrum",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        })
    }
}

/// A loop given by file path or inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LoopRef {
    Path(String),
    Inline(LoopSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    /// Chart file path or built-in chart name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
    /// Overrides of the chart's named parameters.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Base trajectory of a variation run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<Flow>,
    /// Holonomic variation `δq(t)`, one expression per coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltaq: Option<Vec<String>>,
    #[serde(default, rename = "loop", skip_serializing_if = "Option::is_none")]
    pub loop_spec: Option<LoopRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifold: Option<Manifold>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    /// Tolerance profile name (`default`, `strict`, `loose`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default)]
    pub output_format: OutputFormat,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        RunConfig {
            command,
            chart: None,
            params: BTreeMap::new(),
            at: None,
            velocity: None,
            t_start: None,
            t_end: None,
            step: None,
            flow: None,
            deltaq: None,
            loop_spec: None,
            manifold: None,
            measure: None,
            mass: None,
            hbar: None,
            epsilon: None,
            slices: None,
            ladder: None,
            levels: None,
            tolerance: None,
            output_path: None,
            output_format: OutputFormat::Json,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("run configs serialize")
    }

    /// Fills in every default the command uses and checks the settings.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let profile = match self.tolerance.take() {
            Some(p) => p,
            None => std::env::var(nonholonomic::tolerance::PROFILE_ENV)
                .ok()
                .map(|s| s.trim().to_owned())
                .filter(|s| Tolerances::profile(s).is_some())
                .unwrap_or_else(|| "default".into()),
        };
        if Tolerances::profile(&profile).is_none() {
            return Err(CliError::Validation(format!(
                "unknown tolerance profile '{profile}' (expected default, strict or loose)"
            )));
        }
        self.tolerance = Some(profile);

        use CommandKind::*;
        match self.command {
            Tensors => {
                self.require_chart()?;
                self.require("at", self.at.is_some())?;
            }
            Geodesic | Autoparallel | Variation => {
                self.require_chart()?;
                self.require("at", self.at.is_some())?;
                self.require("velocity", self.velocity.is_some())?;
                self.t_start.get_or_insert(0.0);
                self.t_end.get_or_insert(1.0);
                self.step.get_or_insert(1e-3);
                if self.command == Variation {
                    self.flow.get_or_insert(Flow::Autoparallel);
                    self.require("deltaq", self.deltaq.is_some())?;
                }
                self.mass.get_or_insert(1.0);
            }
            Burgers => {
                self.require_chart()?;
                self.require("loop", self.loop_spec.is_some())?;
            }
            Amplitude | Spectrum => {
                self.require("manifold", self.manifold.is_some())?;
                self.measure.get_or_insert(MeasureMode::Qep);
                self.mass.get_or_insert(1.0);
                self.hbar.get_or_insert(1.0);
                if self.command == Amplitude {
                    self.epsilon.get_or_insert(0.01);
                    self.slices.get_or_insert(1);
                } else {
                    self.ladder.get_or_insert_with(|| DEFAULT_LADDER.to_vec());
                    self.levels.get_or_insert(4);
                }
            }
        }
        self.validate()?;
        Ok(self)
    }

    fn require(&self, field: &str, present: bool) -> Result<(), CliError> {
        if present {
            Ok(())
        } else {
            Err(CliError::Validation(format!("{} needs '{field}'", self.command.as_str())))
        }
    }

    fn require_chart(&self) -> Result<(), CliError> {
        self.require("chart", self.chart.is_some())
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: Option<f64>| -> Result<(), CliError> {
            match v {
                Some(x) if !(x > 0.0 && x.is_finite()) => {
                    Err(CliError::Validation(format!("{name} must be positive, got {x}")))
                }
                _ => Ok(()),
            }
        };
        positive("step", self.step)?;
        positive("mass", self.mass)?;
        positive("hbar", self.hbar)?;
        positive("epsilon", self.epsilon)?;
        if let (Some(a), Some(b)) = (self.t_start, self.t_end) {
            if !(b > a) {
                return Err(CliError::Validation(format!("t_end ({b}) must exceed t_start ({a})")));
            }
        }
        if let Some(l) = &self.ladder {
            if l.is_empty() {
                return Err(CliError::Validation("ladder must not be empty".into()));
            }
            for &e in l {
                positive("ladder entry", Some(e))?;
            }
        }
        if self.levels == Some(0) || self.slices == Some(0) {
            return Err(CliError::Validation("levels and slices must be at least 1".into()));
        }
        for (k, v) in &self.params {
            if !v.is_finite() {
                return Err(CliError::Validation(format!("parameter {k} must be finite")));
            }
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerance
            .as_deref()
            .and_then(Tolerances::profile)
            .unwrap_or_default()
    }

    pub fn short_time(&self) -> Result<ShortTimeConfig, CliError> {
        Ok(ShortTimeConfig::new(
            self.mass.unwrap_or(1.0),
            self.hbar.unwrap_or(1.0),
            self.epsilon.unwrap_or(0.01),
            SignMode::ImaginaryTime,
        )?)
    }

    /// Loads the chart, resolving relative paths against `base`.
    pub fn load_chart(&self, base: &Path) -> Result<Chart, CliError> {
        let name = self
            .chart
            .as_deref()
            .ok_or_else(|| CliError::Validation("no chart given".into()))?;
        let path = resolve_path(base, name);
        let mut chart = if path.is_file() {
            Chart::load(&path)?
        } else if let Some(c) = library::builtin(name.strip_suffix(".json").unwrap_or(name)) {
            c
        } else {
            return Err(CliError::Validation(format!(
                "chart '{name}' is neither a readable file nor a built-in ({})",
                library::NAMES.join(", ")
            )));
        };
        for (k, &v) in &self.params {
            chart = chart.with_param(k, v)?;
        }
        Ok(chart.with_det_floor(self.tolerances().det_floor))
    }

    pub fn load_loop(&self, base: &Path) -> Result<LoopSpec, CliError> {
        match &self.loop_spec {
            Some(LoopRef::Path(p)) => Ok(LoopSpec::load(resolve_path(base, p))?),
            Some(LoopRef::Inline(spec)) => Ok(LoopSpec::new(spec.vertices.clone(), spec.samples_per_edge)?),
            None => Err(CliError::Validation("no loop given".into())),
        }
    }
}

pub fn resolve_path(base: &Path, p: &str) -> PathBuf {
    let path = Path::new(p);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| f64::from_str(t.trim()).map_err(|e| format!("'{}': {e}", t.trim())))
        .collect()
}

/// Parses `name=value`.
pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    let v = f64::from_str(v.trim()).map_err(|e| format!("'{v}': {e}"))?;
    Ok((k.trim().to_owned(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_fills_defaults_and_round_trips() {
        let mut c = RunConfig::new(CommandKind::Spectrum);
        c.manifold = Some(Manifold::Ring { r: 1.0, points: 64 });
        c.tolerance = Some("strict".into());
        let r = c.resolve().unwrap();
        assert_eq!(r.measure, Some(MeasureMode::Qep));
        assert_eq!(r.ladder.as_deref(), Some(&DEFAULT_LADDER[..]));
        assert_eq!(RunConfig::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn missing_fields_are_validation_errors() {
        let c = RunConfig::new(CommandKind::Tensors);
        assert!(matches!(c.resolve(), Err(CliError::Validation(_))));
        let mut g = RunConfig::new(CommandKind::Geodesic);
        g.chart = Some("polar".into());
        g.at = Some(vec![1.0, 0.0]);
        g.velocity = Some(vec![0.0, 1.0]);
        g.step = Some(-1.0);
        assert!(matches!(g.resolve(), Err(CliError::Validation(_))));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::from_json(r#"{"command":"tensors","frobnicate":1}"#).is_err());
    }

    #[test]
    fn list_and_param_parsing() {
        assert_eq!(parse_list("1, 0.5,-2").unwrap(), vec![1.0, 0.5, -2.0]);
        assert!(parse_list("1,x").is_err());
        assert_eq!(parse_param("eps=0.2").unwrap(), ("eps".to_owned(), 0.2));
        assert!(parse_param("eps").is_err());
    }
}
