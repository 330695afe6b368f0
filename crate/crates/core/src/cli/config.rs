//! The single JSON run configuration. Unknown keys are rejected and every
//! range is validated before anything runs.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::MonitorConstants;
use crate::dynamics::{checkpoint, SolverParams};
use crate::error::{Error, Result};
use crate::fields::{random_divfree_field, taylor_green, RandomFieldSpec};
use crate::harness::RefinementLevel;
use crate::spectral::{make_grid, SpectralGrid, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    TaylorGreen {
        #[serde(default = "one")]
        amplitude: f64,
    },
    Random {
        seed: u64,
        #[serde(default = "minus_two")]
        slope: f64,
        k_max: u32,
        amplitude: f64,
    },
    /// Velocity checkpoint; its grid must match `grid`.
    Checkpoint { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

fn minus_two() -> f64 {
    -2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
    Jsonl,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub amplitudes: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementConfig {
    pub levels: Vec<RefinementLevel>,
    #[serde(default = "yes")]
    pub cross_check: bool,
}

fn yes() -> bool {
    true
}

fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Json, ReportFormat::Csv, ReportFormat::Jsonl]
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Free-form provenance; echoed into reports, otherwise ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub solver: SolverParams,
    pub grid: GridConfig,
    pub initial: InitialCondition,
    #[serde(default)]
    pub monitors: MonitorConstants,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
    /// Worker threads for sweeps; defaults to the available cores.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub probe: Option<ProbeConfig>,
    #[serde(default)]
    pub refinement: Option<RefinementConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        self.monitors.validate()?;
        make_grid(self.grid.dim, self.grid.n)?;
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.formats.is_empty() {
            return Err(Error::Config("formats must list at least one format".into()));
        }
        match &self.initial {
            InitialCondition::TaylorGreen { amplitude } if !amplitude.is_finite() => {
                return Err(Error::Config("taylor_green amplitude must be finite".into()));
            }
            InitialCondition::Random { k_max, amplitude, slope, .. } => {
                if *k_max < 1 || *k_max as usize > self.grid.n / 3 {
                    return Err(Error::Config(format!(
                        "random k_max = {k_max} outside 1..={}",
                        self.grid.n / 3
                    )));
                }
                if !(amplitude.is_finite() && *amplitude >= 0.0 && slope.is_finite()) {
                    return Err(Error::Config("random amplitude and slope must be finite, amplitude ≥ 0".into()));
                }
            }
            _ => {}
        }
        if let Some(r) = &self.refinement {
            for l in &r.levels {
                make_grid(self.grid.dim, l.n)?;
                if !(l.dt > 0.0) || l.sample_every == 0 {
                    return Err(Error::Config("refinement levels need dt > 0 and sample_every ≥ 1".into()));
                }
                let mut p = self.solver;
                p.dt = l.dt;
                p.sample_every = l.sample_every;
                p.validate()?;
            }
        }
        Ok(())
    }

    pub fn wants(&self, f: ReportFormat) -> bool {
        self.formats.contains(&f)
    }

    pub fn grid(&self) -> Result<Arc<SpectralGrid>> {
        make_grid(self.grid.dim, self.grid.n)
    }

    pub fn initial_field(&self) -> Result<VectorField> {
        let g = self.grid()?;
        match &self.initial {
            InitialCondition::TaylorGreen { amplitude } => Ok(taylor_green(&g, *amplitude)),
            InitialCondition::Random { seed, slope, k_max, amplitude } => random_divfree_field(
                &g,
                &RandomFieldSpec {
                    seed: *seed,
                    spectrum_slope: *slope,
                    k_max: *k_max,
                    amplitude: *amplitude,
                },
            ),
            InitialCondition::Checkpoint { path } => {
                let c = checkpoint::load(path)?;
                if c.header.dim as usize != self.grid.dim || c.header.n as usize != self.grid.n {
                    return Err(Error::Config(format!(
                        "checkpoint grid {}D n = {} does not match config grid {}D n = {}",
                        c.header.dim, c.header.n, self.grid.dim, self.grid.n
                    )));
                }
                Ok(c.u)
            }
        }
    }
}
