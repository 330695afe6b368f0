use serde::{Deserialize, Serialize};

use super::empirical_order;
use crate::diagnostics::{DiagnosticsRecord, MonitorConstants};
use crate::dynamics::{simulate_observed, Formulation, SimulateOptions, SolverParams};
use crate::error::{Error, Result};
use crate::fields::taylor_green;
use crate::spectral::{make_grid, resample, VectorField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorGreenReport {
    pub params: SolverParams,
    pub n: usize,
    /// `2ν/(1 + 2α)`; the exact solution is `e^{−rate·t} u₀`.
    pub decay_rate: f64,
    /// `max_t ‖u(t) − e^{−rate·t}u₀‖ / ‖e^{−rate·t}u₀‖`
    pub max_rel_error: f64,
    pub sample_times: Vec<f64>,
    pub rel_errors: Vec<f64>,
    pub records: Vec<DiagnosticsRecord>,
}

/// Unit-amplitude 2D Taylor-Green run against its exact decay. Both
/// nonlinear terms are gradients for this field, so the solution only decays
/// at the rate of the linear multiplier at `|k|² = 2`.
pub fn validate_taylor_green(params: &SolverParams, n: usize) -> Result<TaylorGreenReport> {
    let g = make_grid(2, n)?;
    let u0 = taylor_green(&g, 1.0);
    let rate = 2.0 * params.nu / (1.0 + 2.0 * params.alpha);
    let mut times = Vec::new();
    let mut errs = Vec::new();
    let traj = simulate_observed(&u0, params, &SimulateOptions::default(), |s| {
        let exact = u0.scaled((-rate * s.time).exp());
        times.push(s.time);
        errs.push(s.velocity().sub(&exact).l2_norm() / exact.l2_norm());
    })?;
    Ok(TaylorGreenReport {
        params: *params,
        n,
        decay_rate: rate,
        max_rel_error: errs.iter().copied().fold(0.0, f64::max),
        sample_times: times,
        rel_errors: errs,
        records: traj.records,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementLevel {
    pub n: usize,
    pub dt: f64,
    pub sample_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: RefinementLevel,
    pub sample_spacing: f64,
    pub max_h1_residual: f64,
    pub max_h2_residual: Option<f64>,
    /// `max_t ‖u_vel − u_curl‖/‖u_vel‖` when the cross-check is requested.
    pub cross_gap: Option<f64>,
    /// `‖u(T) − u_finest(T)‖/‖u_finest(T)‖` on the finest grid; absent for
    /// the finest level itself.
    pub trajectory_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub levels: Vec<LevelResult>,
    /// Orders between consecutive levels, in `dt` (H¹ residual, gaps,
    /// trajectory error) or in sample spacing (H² residual).
    pub h1_orders: Vec<Option<f64>>,
    pub h2_orders: Vec<Option<f64>>,
    pub gap_orders: Vec<Option<f64>>,
    pub trajectory_orders: Vec<Option<f64>>,
}

/// Runs `u₀` (resampled to each level's grid) at every level and tabulates
/// the identity residuals, cross-formulation gaps and errors against the
/// last (finest) level.
pub fn refinement_study(
    u0: &VectorField,
    params: &SolverParams,
    levels: &[RefinementLevel],
    cross_check: bool,
    monitors: &MonitorConstants,
) -> Result<RefinementReport> {
    if levels.is_empty() {
        return Err(Error::InvalidParameter("refinement study needs at least one level".into()));
    }
    let opts = SimulateOptions {
        monitors: *monitors,
        store_fields: false,
    };
    let dim = u0.grid().dim();
    let mut finals = Vec::with_capacity(levels.len());
    let mut results = Vec::with_capacity(levels.len());
    for lv in levels {
        let g = make_grid(dim, lv.n)?;
        let u = resample(u0, &g)?;
        let mut p = *params;
        p.dt = lv.dt;
        p.sample_every = lv.sample_every;
        p.formulation = Formulation::Velocity;
        let mut vel = Vec::new();
        let traj = simulate_observed(&u, &p, &opts, |s| vel.push(s.velocity().clone()))?;
        let cross_gap = if cross_check {
            let mut gap: f64 = 0.0;
            let mut i = 0;
            simulate_observed(&u, &p.with_formulation(Formulation::Curl), &opts, |s| {
                let r = &vel[i];
                let scale = r.l2_norm();
                if scale > 0.0 {
                    gap = gap.max(s.velocity().sub(r).l2_norm() / scale);
                }
                i += 1;
            })?;
            Some(gap)
        } else {
            None
        };
        let recs = &traj.records;
        results.push(LevelResult {
            level: *lv,
            sample_spacing: lv.dt * lv.sample_every as f64,
            max_h1_residual: recs.iter().map(|r| r.h1_residual).fold(0.0, f64::max),
            max_h2_residual: recs
                .iter()
                .filter_map(|r| r.h2_residual)
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v)))),
            cross_gap,
            trajectory_error: None,
        });
        finals.push(traj.final_state.velocity().clone());
    }
    let finest = finals.last().expect("non-empty").clone();
    let fine_norm = finest.l2_norm();
    let last = levels.len() - 1;
    for (i, f) in finals.iter().enumerate().take(last) {
        let up = resample(f, finest.grid())?;
        let diff = up.sub(&finest).l2_norm();
        results[i].trajectory_error = Some(if fine_norm > 0.0 { diff / fine_norm } else { diff });
    }
    let orders = |val: &dyn Fn(&LevelResult) -> Option<f64>, h: &dyn Fn(&LevelResult) -> f64| {
        results
            .windows(2)
            .map(|w| match (val(&w[0]), val(&w[1])) {
                (Some(a), Some(b)) => empirical_order(a, b, h(&w[0]), h(&w[1])),
                _ => None,
            })
            .collect::<Vec<_>>()
    };
    let dt = |r: &LevelResult| r.level.dt;
    Ok(RefinementReport {
        h1_orders: orders(&|r| Some(r.max_h1_residual), &dt),
        h2_orders: orders(&|r| r.max_h2_residual, &|r| r.sample_spacing),
        gap_orders: orders(&|r| r.cross_gap, &dt),
        trajectory_orders: orders(&|r| r.trajectory_error, &dt),
        levels: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_has_zero_residuals() {
        let g = make_grid(2, 16).unwrap();
        let u = VectorField::zeros(&g, 2);
        let p = SolverParams::new(0.1, 0.1, 1e-2, 0.1);
        let levels = [
            RefinementLevel { n: 16, dt: 2e-2, sample_every: 1 },
            RefinementLevel { n: 16, dt: 1e-2, sample_every: 2 },
        ];
        let r = refinement_study(&u, &p, &levels, true, &MonitorConstants::default()).unwrap();
        for l in &r.levels {
            assert_eq!(l.max_h1_residual, 0.0);
            assert_eq!(l.max_h2_residual, Some(0.0));
            assert_eq!(l.cross_gap, Some(0.0));
        }
        assert_eq!(r.levels[0].trajectory_error, Some(0.0));
    }

    #[test]
    fn taylor_green_short_run_is_exact() {
        let p = SolverParams::new(0.1, 0.1, 1e-2, 0.2);
        let r = validate_taylor_green(&p, 16).unwrap();
        assert!(r.max_rel_error < 1e-12, "{}", r.max_rel_error);
        assert_eq!(r.sample_times.len(), 21);
    }
}
