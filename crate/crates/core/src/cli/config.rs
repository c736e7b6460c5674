//! Scenario configuration: JSON with a schema version, `--set` overrides
//! applied to the raw document before typed deserialisation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ConfigError;
use crate::grid::Grid;
use crate::observer_design::{DesignSpec, LipschitzBounds, ObserverDesign, Variant};
use crate::pde_simulator::{make_schedule, NonlinearTerm, Noise, Scenario, ScheduleSpec, Signal};
use crate::profile::Profile;
use crate::sturm_liouville::{analytic_eigensystem, numeric_eigensystem, SLProblem, SpectralBasis};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    #[default]
    Analytic,
    Numeric,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    #[serde(default)]
    pub kind: BasisKind,
    /// Defaults to nodes − 1.
    #[serde(default)]
    pub modes: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disturbances {
    #[serde(default)]
    pub v: Signal,
    #[serde(default)]
    pub v_tilde: Signal,
    #[serde(default)]
    pub noise: Vec<Noise>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    pub u0: Profile,
    #[serde(default = "Profile::zero")]
    pub w0: Profile,
}

impl Default for Initial {
    fn default() -> Self {
        Self { u0: Profile::zero(), w0: Profile::zero() }
    }
}

fn default_nodes() -> usize {
    201
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { nodes: default_nodes() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default)]
    pub dt: Option<f64>,
    pub horizon: f64,
    /// Defaults to about ten snapshots per sampling interval.
    #[serde(default)]
    pub snapshot_every: Option<usize>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_variant")]
    pub variant: Variant,
    /// κ = ω·μ unless `kappa` is given.
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub kappa: Option<f64>,
    /// Modes used by the Lyapunov oracle; defaults to the basis size.
    #[serde(default)]
    pub j_tail: Option<usize>,
    #[serde(default = "yes")]
    pub lyapunov: bool,
    /// Also write one field CSV per snapshot.
    #[serde(default)]
    pub fields: bool,
}

fn default_variant() -> Variant {
    Variant::Predictor
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { variant: Variant::Predictor, omega: 0.0, kappa: None, j_tail: None, lyapunov: true, fields: false }
    }
}

/// Grids for `sweep`; an empty list keeps the scenario's value.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub h: Vec<f64>,
    /// κ values; mutually exclusive with `omega`.
    #[serde(default)]
    pub kappa: Vec<f64>,
    #[serde(default)]
    pub omega: Vec<f64>,
    #[serde(default)]
    pub q: Vec<f64>,
    /// Multiplies every noise signal.
    #[serde(default)]
    pub noise_scale: Vec<f64>,
    /// Run a simulation per grid point (otherwise Ω only).
    #[serde(default)]
    pub simulate: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub problem: SLProblem,
    #[serde(default)]
    pub basis: BasisConfig,
    pub design: DesignSpec,
    /// Overrides the bound derived from `nonlinearity`.
    #[serde(default)]
    pub lipschitz: Option<LipschitzBounds>,
    #[serde(default)]
    pub nonlinearity: NonlinearTerm,
    #[serde(default)]
    pub disturbances: Disturbances,
    #[serde(default)]
    pub initial: Initial,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub grid: GridConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Everything built from a config.
pub struct Built {
    pub basis: SpectralBasis,
    pub scenario: Scenario,
}

impl ScenarioConfig {
    pub fn from_value(value: Value) -> Result<Self, ConfigError> {
        let cfg: Self = serde_path_to_error::deserialize(value).map_err(|e| ConfigError::Field {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read(path.display().to_string(), e.to_string()))?;
        let mut value: Value = serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |path: &str, message: String| Err(ConfigError::Field { path: path.into(), message });
        if self.version != SCHEMA_VERSION {
            return bad("version", format!("unsupported schema version {}, expected {SCHEMA_VERSION}", self.version));
        }
        if let Err(e) = self.problem.validate() {
            return bad("problem", e.to_string());
        }
        if self.grid.nodes < 11 {
            return bad("grid.nodes", format!("need at least 11 nodes, got {}", self.grid.nodes));
        }
        if !(self.time.horizon > 0.0) {
            return bad("time.horizon", format!("must be positive, got {}", self.time.horizon));
        }
        if self.time.snapshot_every == Some(0) {
            return bad("time.snapshot_every", "must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.analysis.omega) {
            return bad("analysis.omega", format!("must lie in [0, 1), got {}", self.analysis.omega));
        }
        if !self.sweep.kappa.is_empty() && !self.sweep.omega.is_empty() {
            return bad("sweep", "give either kappa or omega, not both".into());
        }
        if self.disturbances.noise.len() > self.design.channels.len() {
            return bad(
                "disturbances.noise",
                format!("{} entries for {} channels", self.disturbances.noise.len(), self.design.channels.len()),
            );
        }
        Ok(())
    }

    pub fn basis_modes(&self) -> usize {
        self.basis.modes.unwrap_or(self.grid.nodes - 1)
    }

    pub fn basis(&self) -> Result<SpectralBasis, super::CliError> {
        let grid = Grid::new(self.grid.nodes);
        let j = self.basis_modes();
        Ok(match self.basis.kind {
            BasisKind::Analytic => analytic_eigensystem(&self.problem, j, &grid)?,
            BasisKind::Numeric => numeric_eigensystem(&self.problem, j, self.grid.nodes)?,
        })
    }

    pub fn design(&self, basis: &SpectralBasis) -> Result<ObserverDesign, super::CliError> {
        let lipschitz = match self.lipschitz {
            Some(l) => l,
            None => {
                let d = self.nonlinearity.lipschitz(&self.problem, basis.grid())?;
                LipschitzBounds { r: d.r, sup: d.sup }
            }
        };
        Ok(ObserverDesign::synthesize(&self.problem, basis, &self.design, lipschitz)?)
    }

    /// κ for a design: explicit, or ω·μ.
    pub fn kappa(&self, design: &ObserverDesign) -> f64 {
        self.analysis.kappa.unwrap_or(self.analysis.omega * design.certificate.mu)
    }

    pub fn build(&self) -> Result<Built, super::CliError> {
        let basis = self.basis()?;
        let design = self.design(&basis)?;
        let schedule = make_schedule(&self.schedule, self.time.horizon, self.seed)?;
        let mut scenario = Scenario {
            problem: self.problem.clone(),
            design,
            variant: self.analysis.variant,
            grid: Grid::new(self.grid.nodes),
            nonlinearity: self.nonlinearity.clone(),
            u0: self.initial.u0.clone(),
            w0: self.initial.w0.clone(),
            v: self.disturbances.v.clone(),
            v_tilde: self.disturbances.v_tilde.clone(),
            noise: self.disturbances.noise.clone(),
            schedule,
            dt: self.time.dt,
            snapshot_every: 1,
            seed: self.seed,
        };
        scenario.snapshot_every =
            crate::analysis::snapshot_cadence(self.time.snapshot_every, &scenario.schedule, scenario.dt_max());
        Ok(Built { basis, scenario })
    }
}

/// Applies `a.b.0.c=value`. The value is parsed as JSON, falling back to a
/// plain string; numeric segments index arrays; missing objects are created.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(assignment.into(), "expected key=value".into()))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(ConfigError::Override(assignment.into(), "empty key segment".into()));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = root;
    let segments: Vec<&str> = key.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(seg.to_string(), value);
                    return Ok(());
                }
                map.entry(seg.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| ConfigError::Override(assignment.into(), format!("`{seg}` is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| ConfigError::Override(assignment.into(), format!("index {idx} out of range ({len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            Value::Null => {
                *node = Value::Object(Default::default());
                let Value::Object(map) = node else { unreachable!() };
                if last {
                    map.insert(seg.to_string(), value);
                    return Ok(());
                }
                map.entry(seg.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            _ => {
                let path = segments[..i].join(".");
                return Err(ConfigError::Override(assignment.into(), format!("`{path}` is not an object or array")));
            }
        };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_set_nested_values() {
        let mut v = json!({"a": {"b": 1}, "list": [{"x": 1}, {"x": 2}]});
        apply_override(&mut v, "a.b=2.5").unwrap();
        apply_override(&mut v, "a.c.d=true").unwrap();
        apply_override(&mut v, "list.1.x=[1,2]").unwrap();
        apply_override(&mut v, "name=predictor").unwrap();
        assert_eq!(v, json!({"a": {"b": 2.5, "c": {"d": true}}, "list": [{"x": 1}, {"x": [1, 2]}], "name": "predictor"}));
    }

    #[test]
    fn malformed_overrides_are_rejected() {
        let mut v = json!({"a": 1, "list": []});
        assert!(apply_override(&mut v, "a").is_err());
        assert!(apply_override(&mut v, "a.b=1").is_err());
        assert!(apply_override(&mut v, "list.0=1").is_err());
        assert!(apply_override(&mut v, "list.x=1").is_err());
        assert!(apply_override(&mut v, "a..b=1").is_err());
    }
}
