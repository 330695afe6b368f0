use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{empirical_order, RunSummary};
use crate::dynamics::{simulate_observed, SimulateOptions, SolverParams};
use crate::error::{Error, Result};
use crate::spectral::VectorField;

/// Errors of the α-runs against the α = 0 run from the same data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub alphas: Vec<f64>,
    pub sample_times: Vec<f64>,
    /// `sup_t ‖u_α(t) − u₀(t)‖_{L²}`; absent for runs that blew up.
    pub errors: Vec<Option<f64>>,
    /// `‖u_α(t) − u₀(t)‖_{L²}` per sample time.
    pub error_series: Vec<Option<Vec<f64>>>,
    /// Slope between consecutive α; `len = alphas.len() − 1`.
    pub empirical_orders: Vec<Option<f64>>,
    pub reference: RunSummary,
    pub runs: Vec<RunSummary>,
    /// Wall-clock seconds; kept out of the serialized report so that
    /// reports are byte-identical across repeats.
    #[serde(skip)]
    pub timing: SweepTiming,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTiming {
    pub reference_seconds: f64,
    pub run_seconds: Vec<f64>,
    pub total_seconds: f64,
}

impl SweepReport {
    /// Every completed error is strictly below the previous one.
    pub fn strictly_decreasing(&self) -> bool {
        self.errors.iter().all(|e| e.is_some())
            && self.errors.windows(2).all(|w| w[1].unwrap() < w[0].unwrap())
    }
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("alpha sweep needs at least one alpha".into()));
    }
    if alphas.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
        return Err(Error::InvalidParameter(
            "sweep alphas must lie in (0, 1]; the alpha = 0 run is the reference".into(),
        ));
    }
    if alphas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("sweep alphas must be strictly decreasing".into()));
    }
    Ok(())
}

/// Runs `u₀` with `α = 0` and with every α of `alphas` (in parallel, on the
/// ambient rayon pool) using the remaining fields of `params`.
pub fn run_alpha_sweep(
    u0: &VectorField,
    alphas: &[f64],
    params: &SolverParams,
    opts: &SimulateOptions,
) -> Result<SweepReport> {
    check_alphas(alphas)?;
    let start = Instant::now();
    let mut ref_params = *params;
    ref_params.alpha = 0.0;
    let mut reference = Vec::new();
    let mut times = Vec::new();
    let t0 = Instant::now();
    let ref_traj = simulate_observed(u0, &ref_params, opts, |s| {
        reference.push(s.velocity().clone());
        times.push(s.time);
    })?;
    let reference_seconds = t0.elapsed().as_secs_f64();

    let results: Vec<(RunSummary, Option<Vec<f64>>, f64)> = alphas
        .par_iter()
        .map(|&alpha| {
            let mut p = *params;
            p.alpha = alpha;
            let t0 = Instant::now();
            let mut series = Vec::with_capacity(reference.len());
            let run = simulate_observed(u0, &p, opts, |s| {
                let i = series.len();
                series.push(s.velocity().sub(&reference[i]).l2_norm());
            });
            let secs = t0.elapsed().as_secs_f64();
            match run {
                Ok(t) => Ok((RunSummary::from_trajectory(&t), Some(series), secs)),
                Err(Error::BlowUp(r)) => Ok((RunSummary::from_blow_up(alpha, &r), None, secs)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let errors: Vec<Option<f64>> = results
        .iter()
        .map(|(_, s, _)| s.as_ref().map(|v| v.iter().copied().fold(0.0, f64::max)))
        .collect();
    let empirical_orders = (1..alphas.len())
        .map(|i| match (errors[i - 1], errors[i]) {
            (Some(a), Some(b)) => empirical_order(a, b, alphas[i - 1], alphas[i]),
            _ => None,
        })
        .collect();
    let run_seconds = results.iter().map(|r| r.2).collect();
    let (runs, error_series): (Vec<_>, Vec<_>) =
        results.into_iter().map(|(r, s, _)| (r, s)).unzip();
    Ok(SweepReport {
        alphas: alphas.to_vec(),
        sample_times: times,
        errors,
        error_series,
        empirical_orders,
        reference: RunSummary::from_trajectory(&ref_traj),
        runs,
        timing: SweepTiming {
            reference_seconds,
            run_seconds,
            total_seconds: start.elapsed().as_secs_f64(),
        },
    })
}
