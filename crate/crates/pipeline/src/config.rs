//! Declarative experiment configuration, loaded from JSON. Configs are
//! validated wholesale before any computation; flags at the CLI override
//! individual fields.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Lorenz,
    Kdv,
}

/// Which matrix the singular value decomposition is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecomposeTarget {
    /// The covariance matrix of the embedded data (default).
    #[default]
    Covariance,
    /// The embedded data matrix itself.
    Trajectory,
}

impl DecomposeTarget {
    pub fn label(&self) -> &'static str {
        match self {
            DecomposeTarget::Covariance => "covariance",
            DecomposeTarget::Trajectory => "trajectory",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorenzConfig {
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default = "default_one")]
    pub y0: f64,
    #[serde(default)]
    pub z0: f64,
    #[serde(default = "default_lorenz_dt")]
    pub dt: f64,
    #[serde(default = "default_lorenz_steps")]
    pub steps: usize,
}

fn default_sigma() -> f64 {
    10.0
}

fn default_r() -> f64 {
    28.0
}

fn default_b() -> f64 {
    8.0 / 3.0
}

fn default_one() -> f64 {
    1.0
}

fn default_lorenz_dt() -> f64 {
    0.01
}

fn default_lorenz_steps() -> usize {
    5000
}

impl Default for LorenzConfig {
    fn default() -> Self {
        Self {
            sigma: default_sigma(),
            r: default_r(),
            b: default_b(),
            x0: 0.0,
            y0: 1.0,
            z0: 0.0,
            dt: default_lorenz_dt(),
            steps: default_lorenz_steps(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdvRunConfig {
    pub grid: usize,
    pub velocity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcaConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default = "default_true")]
    pub center: bool,
    #[serde(default)]
    pub decompose: DecomposeTarget,
    /// Project the column-centered matrix instead of the raw one.
    #[serde(default)]
    pub project_centered: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub system: SystemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lorenz: Option<LorenzConfig>,
    /// Window lengths for the Hankel embedding (Lorenz).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<Vec<usize>>,
    /// The window whose components are projected and plotted (Lorenz).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub portrait_window: Option<usize>,
    /// Grid/velocity pairs to simulate (KdV).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<Vec<KdvRunConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
    /// Snapshot rows kept in the KdV trajectory matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    pub pca: PcaConfig,
}

pub const DEFAULT_WINDOWS: [usize; 6] = [25, 13, 9, 7, 5, 3];
pub const DEFAULT_PORTRAIT_WINDOW: usize = 25;
pub const DEFAULT_SNAPSHOT_ROWS: usize = 26;

impl ExperimentConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self, PipelineError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| PipelineError::Parse {
                path: origin.to_path_buf(),
                reason: e.to_string(),
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn lorenz(&self) -> LorenzConfig {
        self.lorenz.clone().unwrap_or_default()
    }

    pub fn windows(&self) -> Vec<usize> {
        self.windows
            .clone()
            .unwrap_or_else(|| DEFAULT_WINDOWS.to_vec())
    }

    pub fn portrait_window(&self) -> usize {
        self.portrait_window.unwrap_or(DEFAULT_PORTRAIT_WINDOW)
    }

    pub fn snapshot_rows(&self) -> usize {
        self.rows.unwrap_or(DEFAULT_SNAPSHOT_ROWS)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |msg: String| Err(PipelineError::Config(msg));

        if self.experiment.is_empty()
            || !self
                .experiment
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
        {
            return fail(format!(
                "experiment name {:?} must be non-empty and filesystem-safe",
                self.experiment
            ));
        }

        match (self.pca.k, self.pca.energy) {
            (Some(_), Some(_)) => {
                return fail("pca: set either k or energy, not both".into());
            }
            (None, None) => {
                return fail("pca: one of k or energy is required".into());
            }
            (Some(0), None) => return fail("pca: k must be positive".into()),
            (None, Some(e)) if !(e > 0.0 && e <= 1.0) => {
                return fail(format!("pca: energy {e} outside (0, 1]"));
            }
            _ => {}
        }

        match self.system {
            SystemKind::Lorenz => {
                if self.runs.is_some()
                    || self.half_length.is_some()
                    || self.rows.is_some()
                    || self.stride.is_some()
                {
                    return fail("lorenz experiment cannot have kdv fields".into());
                }
                let lz = self.lorenz();
                if !(lz.dt.is_finite() && lz.dt > 0.0) {
                    return fail("lorenz.dt must be positive".into());
                }
                if !(lz.sigma.is_finite() && lz.b.is_finite() && lz.r.is_finite()) {
                    return fail("lorenz parameters must be finite".into());
                }
                let windows = self.windows();
                if windows.is_empty() {
                    return fail("windows list is empty".into());
                }
                if !windows.contains(&self.portrait_window()) {
                    return fail(format!(
                        "portrait_window {} is not in the windows list",
                        self.portrait_window()
                    ));
                }
            }
            SystemKind::Kdv => {
                if self.lorenz.is_some() || self.windows.is_some() || self.portrait_window.is_some()
                {
                    return fail("kdv experiment cannot have lorenz fields".into());
                }
                let runs = match &self.runs {
                    Some(r) if !r.is_empty() => r,
                    _ => return fail("kdv experiment needs a non-empty runs list".into()),
                };
                let mut seen = Vec::new();
                for run in runs {
                    if run.grid < 2 || !run.grid.is_power_of_two() {
                        return fail(format!("grid {} is not a power of two", run.grid));
                    }
                    if !(run.velocity.is_finite() && run.velocity > 0.0) {
                        return fail(format!("velocity {} must be positive", run.velocity));
                    }
                    let id = (run.grid, run.velocity.to_bits());
                    if seen.contains(&id) {
                        return fail(format!(
                            "duplicate run: grid {} velocity {}",
                            run.grid, run.velocity
                        ));
                    }
                    seen.push(id);
                }
                if self.snapshot_rows() < 2 {
                    return fail("rows must be at least 2".into());
                }
                if self.stride == Some(0) {
                    return fail("stride must be positive".into());
                }
            }
        }
        Ok(())
    }
}
