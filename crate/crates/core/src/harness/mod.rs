//! Experiment drivers: the α → 0 sweep against the solver's own
//! Navier-Stokes run, the local-existence threshold probe, the Taylor-Green
//! regression and refinement studies.

mod probe;
mod sweep;
mod validation;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagnosticsRecord, MonitorConstants};
use crate::dynamics::{BlowUpReport, SolverParams, Trajectory};
use crate::error::Result;
use crate::fields::{random_divfree_field, taylor_green, RandomFieldSpec};
use crate::spectral::{make_grid, VectorField};

pub use probe::{threshold_probe, ProbeEntry, ProbeOutcome, ProbeReport};
pub use sweep::{run_alpha_sweep, SweepReport, SweepTiming};
pub use validation::{
    refinement_study, validate_taylor_green, LevelResult, RefinementLevel, RefinementReport,
    TaylorGreenReport,
};

/// Viscosity of the standard suite.
pub const SUITE_NU: f64 = 0.1;
/// α of the standard suite.
pub const SUITE_ALPHA: f64 = 1e-2;

/// `(name, random field spec)` of the seeded members; amplitudes span the
/// regime where the bootstrap condition holds up to the one where the
/// time-stepping error is far above roundoff.
pub const SUITE_RANDOM: [(&str, u64, f64); 3] = [
    ("random_small", 1, 0.1),
    ("random_medium", 2, 5.0),
    ("random_large", 3, 30.0),
];

/// Probe calibration suite: a seeded 3D field on n = 16 run at these α
/// over amplitudes spanning four decades.
pub const PROBE_ALPHAS: [f64; 3] = [0.0, 1e-3, 1e-2];
pub const PROBE_AMPLITUDES: [f64; 6] = [0.0, 0.03, 0.3, 3.0, 30.0, 300.0];
pub const PROBE_NU: f64 = 0.05;
pub const PROBE_DT: f64 = 5e-4;
pub const PROBE_T_END: f64 = 0.3;
const PROBE_SAMPLE_EVERY: usize = 20;

/// Unit-`L²` base field of the probe calibration suite.
pub fn probe_base() -> Result<VectorField> {
    let g = make_grid(3, 16)?;
    random_divfree_field(
        &g,
        &RandomFieldSpec {
            seed: 7,
            spectrum_slope: -2.0,
            k_max: 3,
            amplitude: 1.0,
        },
    )
}

/// The threshold probe of the calibration suite at one α.
pub fn calibration_probe(alpha: f64, monitors: &MonitorConstants) -> Result<ProbeReport> {
    let p = SolverParams::new(alpha, PROBE_NU, PROBE_DT, PROBE_T_END)
        .with_sample_every(PROBE_SAMPLE_EVERY);
    threshold_probe(&probe_base()?, &PROBE_AMPLITUDES, &p, monitors)
}

#[derive(Clone, Debug)]
pub struct SuiteMember {
    pub name: String,
    pub u0: VectorField,
}

/// Taylor-Green plus three seeded random fields on the desk-scale grid of
/// the given dimension (2D n = 64, 3D n = 32).
pub fn standard_suite(dim: usize) -> Result<Vec<SuiteMember>> {
    let n = if dim == 2 { 64 } else { 32 };
    let g = make_grid(dim, n)?;
    let mut out = vec![SuiteMember {
        name: "taylor_green".into(),
        u0: taylor_green(&g, 1.0),
    }];
    for (name, seed, amplitude) in SUITE_RANDOM {
        let spec = RandomFieldSpec {
            seed,
            spectrum_slope: -2.0,
            k_max: 4,
            amplitude,
        };
        out.push(SuiteMember {
            name: name.into(),
            u0: random_divfree_field(&g, &spec)?,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunOutcome {
    Completed,
    BlewUp { time: f64, step: u64, reason: String },
}

/// Monitor summary of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub alpha: f64,
    pub outcome: RunOutcome,
    pub samples: usize,
    pub final_time: f64,
    pub final_l2: f64,
    pub max_h1_residual: f64,
    pub max_h2_residual: Option<f64>,
    /// Bootstrap condition held at every sample.
    pub cond_held: bool,
    pub gronwall_violations: usize,
    pub final_bound_violations: usize,
    pub e_alpha_nonincreasing: bool,
    pub cfl_violations: usize,
}

impl RunSummary {
    pub fn from_trajectory(t: &Trajectory) -> Self {
        let mut s = summarize(t.params.alpha, &t.records);
        s.cfl_violations = t.cfl_violations;
        s
    }

    pub fn from_blow_up(alpha: f64, r: &BlowUpReport) -> Self {
        let records: Vec<DiagnosticsRecord> = r.last_record.iter().cloned().collect();
        let mut s = summarize(alpha, &records);
        s.outcome = RunOutcome::BlewUp {
            time: r.time,
            step: r.step,
            reason: r.reason.clone(),
        };
        s.final_time = r.time;
        s
    }
}

/// Relative slack allowed on `E_α(t) ≤ E_α(s)` for roundoff.
const MONOTONE_SLACK: f64 = 1e-12;

fn summarize(alpha: f64, records: &[DiagnosticsRecord]) -> RunSummary {
    let last = records.last();
    RunSummary {
        alpha,
        outcome: RunOutcome::Completed,
        samples: records.len(),
        final_time: last.map_or(0.0, |r| r.time),
        final_l2: last.map_or(0.0, |r| r.norms.l2),
        max_h1_residual: records.iter().map(|r| r.h1_residual).fold(0.0, f64::max),
        max_h2_residual: records
            .iter()
            .filter_map(|r| r.h2_residual)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v)))),
        cond_held: records.iter().all(|r| r.conditions.cond_ok()),
        gronwall_violations: records.iter().filter(|r| r.gronwall_ok == Some(false)).count(),
        final_bound_violations: records
            .iter()
            .filter(|r| r.final_bound_ok == Some(false))
            .count(),
        e_alpha_nonincreasing: records
            .windows(2)
            .all(|w| w[1].e_alpha <= w[0].e_alpha * (1.0 + MONOTONE_SLACK)),
        cfl_violations: 0,
    }
}

/// `log(e₁/e₂)/log(h₁/h₂)`, when both errors are positive and finite.
pub fn empirical_order(e1: f64, e2: f64, h1: f64, h2: f64) -> Option<f64> {
    let ok = |v: f64| v > 0.0 && v.is_finite();
    (ok(e1) && ok(e2) && ok(h1) && ok(h2) && h1 != h2).then(|| (e1 / e2).ln() / (h1 / h2).ln())
}
