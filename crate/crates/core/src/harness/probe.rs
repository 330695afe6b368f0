use serde::{Deserialize, Serialize};

use crate::diagnostics::{check_smallness, local_time_bound, MonitorConstants, SmallnessReport};
use crate::dynamics::{simulate_with, SimulateOptions, SolverParams};
use crate::error::{Error, Result};
use crate::spectral::VectorField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeOutcome {
    Completed,
    /// The local-existence monitors (`‖∇u‖ ≤ M`, `α Lip u ≤ ν/2`) first
    /// failed at `time`; the run itself continued to `t_end`.
    MonitorsViolated { time: f64 },
    BlewUp { time: f64, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeEntry {
    /// `‖u₀‖_{L²}`
    pub amplitude: f64,
    pub smallness: SmallnessReport,
    /// Local time bound; absent for the zero field, where it is unbounded.
    pub predicted_t: Option<f64>,
    pub outcome: ProbeOutcome,
    /// Last time up to which the run existed with the monitors green.
    pub achieved_horizon: f64,
    /// `achieved_horizon ≥ min(predicted_t, t_end)`, evaluated where the
    /// local-existence hypotheses hold.
    pub horizon_ok: Option<bool>,
    /// Smallest `K` for which the bound would not exceed the achieved
    /// horizon (the bound falls as `1/K`). Only runs that stopped early constrain `K`, and only where
    /// the hypotheses hold.
    pub required_k: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub alpha: f64,
    pub nu: f64,
    pub t_end: f64,
    pub monitors: MonitorConstants,
    pub entries: Vec<ProbeEntry>,
    /// Smallest amplitude whose run did not complete with green monitors.
    pub first_failure_amplitude: Option<f64>,
}

impl ProbeReport {
    pub fn all_horizons_ok(&self) -> bool {
        self.entries.iter().all(|e| e.horizon_ok != Some(false))
    }

    /// Largest `required_k` over the entries: the bound holds on every run
    /// for any `K` at least this. `None` when no run constrains `K`.
    pub fn max_required_k(&self) -> Option<f64> {
        self.entries
            .iter()
            .filter_map(|e| e.required_k)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    }
}

/// Runs `base` rescaled to each `L²` amplitude and compares the horizon it
/// reaches with the local time bound.
pub fn threshold_probe(
    base: &VectorField,
    amplitudes: &[f64],
    params: &SolverParams,
    monitors: &MonitorConstants,
) -> Result<ProbeReport> {
    if amplitudes.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
        return Err(Error::InvalidParameter("probe amplitudes must be finite and non-negative".into()));
    }
    if amplitudes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("probe amplitudes must be increasing".into()));
    }
    let norm = base.l2_norm();
    if norm == 0.0 && amplitudes.iter().any(|&a| a > 0.0) {
        return Err(Error::InvalidInitialData("probe base field is zero".into()));
    }
    let (alpha, nu) = (params.alpha, params.nu);
    let opts = SimulateOptions {
        monitors: *monitors,
        store_fields: false,
    };
    let mut entries = Vec::with_capacity(amplitudes.len());
    for &amplitude in amplitudes {
        let u0 = if amplitude == 0.0 {
            base.scaled(0.0)
        } else {
            base.scaled(amplitude / norm)
        };
        let smallness = check_smallness(&u0, alpha, nu, monitors)?;
        let t_pred = local_time_bound(&u0, alpha, nu, monitors.k_local)?;
        let (outcome, horizon) = match simulate_with(&u0, params, &opts) {
            Ok(t) => {
                let first_bad = t.records.iter().find(|r| !r.conditions.local_ok());
                match first_bad {
                    None => (ProbeOutcome::Completed, params.t_end),
                    Some(r) => {
                        // the monitors held up to the previous sample
                        let prev = t.records.iter().take_while(|q| q.time < r.time).last();
                        let horizon = prev.map_or(0.0, |q| q.time);
                        (ProbeOutcome::MonitorsViolated { time: r.time }, horizon)
                    }
                }
            }
            Err(Error::BlowUp(r)) => {
                let horizon = r.last_record.as_ref().map_or(0.0, |q| q.time);
                (
                    ProbeOutcome::BlewUp {
                        time: r.time,
                        reason: r.reason.clone(),
                    },
                    horizon,
                )
            }
            Err(e) => return Err(e),
        };
        let horizon_ok = smallness
            .local_ok()
            .then(|| horizon >= t_pred.min(params.t_end));
        // T scales as 1/K, so T(K') = horizon at K' = K·T/horizon
        let stopped = outcome != ProbeOutcome::Completed;
        let required_k = (stopped && smallness.local_ok() && t_pred.is_finite() && horizon > 0.0)
            .then(|| monitors.k_local * t_pred / horizon);
        entries.push(ProbeEntry {
            amplitude,
            smallness,
            predicted_t: t_pred.is_finite().then_some(t_pred),
            outcome,
            achieved_horizon: horizon,
            horizon_ok,
            required_k,
        });
    }
    let first_failure_amplitude = entries
        .iter()
        .find(|e| e.outcome != ProbeOutcome::Completed)
        .map(|e| e.amplitude);
    Ok(ProbeReport {
        alpha,
        nu,
        t_end: params.t_end,
        monitors: *monitors,
        entries,
        first_failure_amplitude,
    })
}
