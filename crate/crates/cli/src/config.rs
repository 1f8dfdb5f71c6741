//! Experiment configuration, parsed from strict JSON.

use std::path::{Path, PathBuf};

use gaprecover::{Grid, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Fig2,
    BoundsAudit,
    Recovery,
    Stability,
    Sampling,
    QuantumPipeline,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Fig2 => "fig2",
            Kind::BoundsAudit => "bounds_audit",
            Kind::Recovery => "recovery",
            Kind::Stability => "stability",
            Kind::Sampling => "sampling",
            Kind::QuantumPipeline => "quantum_pipeline",
        }
    }
}

/// A number or a list of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    One(f64),
    Many(Vec<f64>),
}

impl Values {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            Values::One(x) => vec![*x],
            Values::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_start: f64,
    pub dt: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Values>,
    #[serde(rename = "T_DS", default, skip_serializing_if = "Option::is_none")]
    pub t_ds: Option<Values>,
    #[serde(rename = "T_SN", default, skip_serializing_if = "Option::is_none")]
    pub t_sn: Option<f64>,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_levels: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_points: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_points: Option<Vec<f64>>,
    /// The run passes only if the solver refuses.
    #[serde(default)]
    pub expect_refusal: bool,
    #[serde(default = "yes")]
    pub svg: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_AUDIT_W: [f64; 4] = [0.125, 0.5, 1.0, 2.0];
pub const DEFAULT_AUDIT_T: [f64; 3] = [0.25, 0.5, 1.0];
pub const DEFAULT_NOISE: [f64; 5] = [0.0, 1e-4, 1e-3, 1e-2, 1e-1];

/// Parses a config document. Strict: unknown keys are errors naming the key.
pub fn parse(text: &str) -> Result<Vec<ExperimentConfig>, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let configs = match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                serde_json::from_value(v).map_err(|e| CliError::Config(format!("entry {i}: {e}")))
            })
            .collect::<Result<Vec<ExperimentConfig>, _>>()?,
        v => vec![serde_json::from_value(v).map_err(|e| CliError::Config(e.to_string()))?],
    };
    if configs.is_empty() {
        return Err(CliError::Config("empty batch".into()));
    }
    for c in &configs {
        c.validate()?;
    }
    Ok(configs)
}

pub fn load(path: &Path) -> Result<Vec<ExperimentConfig>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

fn missing(field: &str, kind: Kind) -> CliError {
    CliError::Config(format!("missing field `{field}` (required by {})", kind.name()))
}

fn invalid(field: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("invalid field `{field}`: {why}"))
}

fn positive(field: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(invalid(field, format!("must be positive, got {x}")))
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Kind) -> Self {
        Self {
            experiment,
            grid: None,
            w: None,
            t_ds: None,
            t_sn: None,
            x: None,
            p: None,
            tol: None,
            k_max: None,
            seed: None,
            noise_levels: None,
            mass: None,
            x_points: None,
            t_points: None,
            expect_refusal: false,
            svg: true,
            out: None,
        }
    }

    /// The built-in figure configuration.
    pub fn fig2() -> Self {
        Self {
            w: Some(Values::One(2.0)),
            t_ds: Some(Values::Many(vec![1.0, 0.25, 1.0 / 64.0])),
            t_sn: Some(0.25),
            k_max: Some(2),
            ..Self::new(Kind::Fig2)
        }
    }

    pub fn audit() -> Self {
        Self {
            w: Some(Values::Many(DEFAULT_AUDIT_W.to_vec())),
            t_ds: Some(Values::Many(DEFAULT_AUDIT_T.to_vec())),
            ..Self::new(Kind::BoundsAudit)
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let kind = self.experiment;
        self.grid()?;
        let needs_band = kind != Kind::QuantumPipeline;
        if needs_band {
            let w = self.w.as_ref().ok_or_else(|| missing("W", kind))?.to_vec();
            let t = self.t_ds.as_ref().ok_or_else(|| missing("T_DS", kind))?.to_vec();
            if w.is_empty() {
                return Err(invalid("W", "empty list"));
            }
            if t.is_empty() {
                return Err(invalid("T_DS", "empty list"));
            }
            for x in &w {
                positive("W", *x)?;
            }
            for x in &t {
                if !(x.is_finite() && *x >= 0.0) {
                    return Err(invalid("T_DS", format!("must be non-negative, got {x}")));
                }
            }
            let single = matches!(kind, Kind::Recovery | Kind::Stability | Kind::Sampling);
            if w.len() != 1 && kind != Kind::BoundsAudit {
                return Err(invalid("W", format!("{} takes a single value", kind.name())));
            }
            if single && t.len() != 1 {
                return Err(invalid("T_DS", format!("{} takes a single value", kind.name())));
            }
        }
        if matches!(kind, Kind::Fig2 | Kind::Sampling) {
            positive("T_SN", self.t_sn.ok_or_else(|| missing("T_SN", kind))?)?;
        }
        if kind == Kind::QuantumPipeline {
            positive("X", self.x.ok_or_else(|| missing("X", kind))?)?;
            positive("P", self.p.ok_or_else(|| missing("P", kind))?)?;
            positive("mass", self.mass_or_default())?;
        }
        if let Some(tol) = self.tol {
            positive("tol", tol)?;
        }
        if let Some(levels) = &self.noise_levels {
            if levels.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                return Err(invalid("noise_levels", "levels must be non-negative"));
            }
        }
        Ok(())
    }

    /// The configured grid, or the default for the experiment kind.
    pub fn grid(&self) -> Result<Grid, CliError> {
        match self.grid {
            Some(g) => TimeGrid::new(g.t_start, g.dt, g.n).map_err(|e| invalid("grid", e)),
            None if self.experiment == Kind::QuantumPipeline => Ok(quantum_grid()),
            None => Ok(TimeGrid::desk()),
        }
    }

    pub fn w(&self) -> f64 {
        self.w.as_ref().map(|v| v.to_vec()[0]).unwrap_or(0.0)
    }

    pub fn w_list(&self) -> Vec<f64> {
        self.w.as_ref().map(Values::to_vec).unwrap_or_default()
    }

    pub fn t_ds(&self) -> f64 {
        self.t_ds.as_ref().map(|v| v.to_vec()[0]).unwrap_or(0.0)
    }

    pub fn t_ds_list(&self) -> Vec<f64> {
        self.t_ds.as_ref().map(Values::to_vec).unwrap_or_default()
    }

    pub fn tol_or_default(&self) -> f64 {
        self.tol.unwrap_or(gaprecover::recovery::DEFAULT_TOL)
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn mass_or_default(&self) -> f64 {
        self.mass.unwrap_or(1.0)
    }
}

/// 64 points on `[-2, 2)`: eight momenta for `P = 2`, four samples for `X = 1/4`.
pub fn quantum_grid() -> Grid {
    TimeGrid::new(-2.0, 1.0 / 16.0, 64).expect("valid constant grid")
}
