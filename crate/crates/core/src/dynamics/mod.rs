//! Time integration of the second-grade fluid equations
//!
//! ```text
//! ∂_t(u − αΔu) − νΔu + u·∇(u − αΔu) + Σ_j (u − αΔu)_j ∇u_j = −∇p,  div u = 0
//! ```
//!
//! in two equivalent formulations: the Leray-projected velocity form, which
//! evolves `v = u − αΔu`, and the curl form, which evolves the filtered
//! vorticity `ω_α = ω − αΔω`. With `α = 0` both reduce to Navier-Stokes.

pub mod checkpoint;
mod integrator;
mod rhs;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagnosticsRecord, Monitor, MonitorConstants};
use crate::error::{Error, Result};
use crate::spectral::VectorField;

pub(crate) use integrator::Stepper;
pub use rhs::velocity_from_vorticity;

/// Any `‖v‖_{L²}` above this aborts the run as a blow-up.
pub const BLOW_UP_NORM: f64 = 1e12;

/// Initial data with a relative divergence defect above this is rejected.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    #[default]
    Velocity,
    Curl,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Integrating-factor (Lawson) RK4.
    #[default]
    IfRk4,
    ImexEuler,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    pub alpha: f64,
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub formulation: Formulation,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default = "default_cfl")]
    pub cfl_limit: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    /// Test hook: drop the nonlinear terms.
    #[serde(skip)]
    pub linear_only: bool,
}

fn default_cfl() -> f64 {
    0.5
}

fn default_sample_every() -> usize {
    1
}

impl SolverParams {
    pub fn new(alpha: f64, nu: f64, dt: f64, t_end: f64) -> Self {
        Self {
            alpha,
            nu,
            dt,
            t_end,
            formulation: Formulation::Velocity,
            integrator: Integrator::IfRk4,
            cfl_limit: default_cfl(),
            sample_every: default_sample_every(),
            linear_only: false,
        }
    }

    pub fn with_formulation(mut self, f: Formulation) -> Self {
        self.formulation = f;
        self
    }

    pub fn with_integrator(mut self, i: Integrator) -> Self {
        self.integrator = i;
        self
    }

    pub fn with_sample_every(mut self, every: usize) -> Self {
        self.sample_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if !(self.cfl_limit > 0.0) {
            return bad(format!("cfl_limit must be positive, got {}", self.cfl_limit));
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1".into());
        }
        self.steps().map(|_| ())
    }

    /// Number of steps to `t_end`; `t_end` must be a multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let s = (self.t_end / self.dt).round();
        if (s * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(Error::InvalidParameter(format!(
                "t_end = {} is not a multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(s as usize)
    }
}

/// The evolved variable (`u − αΔu`, or `ω_α` in curl form) and the velocity
/// it carries.
#[derive(Clone, Debug)]
pub struct SimState {
    pub time: f64,
    pub step: u64,
    formulation: Formulation,
    alpha: f64,
    evolved: VectorField,
    velocity: VectorField,
}

impl SimState {
    /// Validates `u0` (divergence-free, mean-zero, inside the dealias mask)
    /// and builds the evolved variable.
    pub fn new(u0: &VectorField, params: &SolverParams) -> Result<Self> {
        params.validate()?;
        let g = u0.grid();
        if u0.ncomp() != g.dim() {
            return Err(Error::InvalidInitialData(format!(
                "velocity needs {} components, got {}",
                g.dim(),
                u0.ncomp()
            )));
        }
        let scale = u0.max_abs();
        let tiny = 1e-12 * scale;
        if u0.components().iter().any(|c| c[0].norm() > tiny) {
            return Err(Error::InvalidInitialData("velocity has a nonzero mean".into()));
        }
        for c in u0.components() {
            for (idx, z) in c.iter().enumerate() {
                if !g.retained(idx) && z.norm() > tiny {
                    return Err(Error::InvalidInitialData(
                        "velocity has energy outside the 2/3 dealias band".into(),
                    ));
                }
            }
        }
        let defect = u0.divergence_defect();
        if defect > DIVERGENCE_TOLERANCE {
            return Err(Error::InvalidInitialData(format!(
                "velocity is not divergence-free (relative defect {defect:.3e})"
            )));
        }
        let mut u = crate::spectral::dealias(u0);
        u.enforce_mean_zero();
        crate::spectral::ops::project_in_place(&mut u)?;
        let curl_form = params.formulation == Formulation::Curl;
        let evolved = rhs::evolved_from_velocity(&u, params.alpha, curl_form)?;
        Ok(Self {
            time: 0.0,
            step: 0,
            formulation: params.formulation,
            alpha: params.alpha,
            evolved,
            velocity: u,
        })
    }

    fn from_evolved(evolved: VectorField, step: u64, params: &SolverParams) -> Result<Self> {
        let curl_form = params.formulation == Formulation::Curl;
        let velocity = rhs::recover_velocity(&evolved, params.alpha, curl_form)?;
        Ok(Self {
            time: step as f64 * params.dt,
            step,
            formulation: params.formulation,
            alpha: params.alpha,
            evolved,
            velocity,
        })
    }

    pub fn evolved(&self) -> &VectorField {
        &self.evolved
    }

    pub fn velocity(&self) -> &VectorField {
        &self.velocity
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn check(&self, params: &SolverParams, expect: Formulation) -> Result<()> {
        if self.formulation != expect {
            return Err(Error::InvalidParameter(format!(
                "state holds the {:?} formulation, {:?} requested",
                self.formulation, expect
            )));
        }
        if self.alpha != params.alpha {
            return Err(Error::InvalidParameter(
                "state was built with a different alpha".into(),
            ));
        }
        Ok(())
    }
}

/// `dt·max|u|/(2π/n)`
pub fn cfl_number(u: &VectorField, dt: f64) -> f64 {
    let umax = crate::fields::lebesgue_norm(u, crate::fields::LebesgueExponent::Inf);
    dt * umax / u.grid().spacing()
}

fn full_tendency(state: &SimState, params: &SolverParams) -> Result<VectorField> {
    let stepper = Stepper::new(state.evolved.grid(), params);
    let n = stepper.nonlinear(&state.evolved);
    let lin = stepper.linear_multiplier();
    let comps = state
        .evolved
        .components()
        .iter()
        .zip(n.tendency)
        .map(|(v, mut t)| {
            for i in 0..v.len() {
                t[i] += v[i] * lin[i];
            }
            t
        })
        .collect();
    let cfl = cfl_number(&state.velocity, params.dt);
    if cfl > params.cfl_limit {
        warn!("CFL number {cfl:.3} exceeds limit {}", params.cfl_limit);
    }
    Ok(VectorField::from_parts(
        state.evolved.grid(),
        comps,
        state.evolved.is_solenoidal(),
        true,
    ))
}

/// `∂_t v = P[νΔu − u·∇v − Σ_j v_j ∇u_j]`, `v = u − αΔu`.
pub fn rhs_velocity_form(state: &SimState, params: &SolverParams) -> Result<VectorField> {
    state.check(params, Formulation::Velocity)?;
    full_tendency(state, params)
}

/// `∂_t ω_α = νΔω − u·∇ω_α + ω_α·∇u`.
pub fn rhs_curl_form(state: &SimState, params: &SolverParams) -> Result<VectorField> {
    state.check(params, Formulation::Curl)?;
    full_tendency(state, params)
}

/// Advances one `dt` with the configured integrator.
pub fn step(state: &SimState, params: &SolverParams) -> Result<SimState> {
    state.check(params, params.formulation)?;
    let stepper = Stepper::new(state.evolved.grid(), params);
    let (next, _) = stepper.advance(&state.evolved);
    let next_step = state.step + 1;
    if let Some(reason) = blow_up_reason(&next) {
        return Err(Error::BlowUp(Box::new(BlowUpReport {
            time: next_step as f64 * params.dt,
            step: next_step,
            reason,
            last_record: None,
        })));
    }
    SimState::from_evolved(next, next_step, params)
}

/// Step-by-step integration that keeps its transform plans and multipliers
/// between calls. A step that blows up leaves the state untouched.
pub struct Solver {
    params: SolverParams,
    stepper: Stepper,
    state: SimState,
    dissipation: f64,
}

impl Solver {
    pub fn new(u0: &VectorField, params: &SolverParams) -> Result<Self> {
        params.validate()?;
        let state = SimState::new(u0, params)?;
        Ok(Self {
            params: *params,
            stepper: Stepper::new(u0.grid(), params),
            state,
            dissipation: 0.0,
        })
    }

    pub fn advance(&mut self, steps: u64) -> Result<()> {
        for _ in 0..steps {
            let (next, dd) = self.stepper.advance(&self.state.evolved);
            let s = self.state.step + 1;
            if let Some(reason) = blow_up_reason(&next) {
                return Err(Error::BlowUp(Box::new(BlowUpReport {
                    time: s as f64 * self.params.dt,
                    step: s,
                    reason,
                    last_record: None,
                })));
            }
            self.state = SimState::from_evolved(next, s, &self.params)?;
            self.dissipation += dd;
        }
        Ok(())
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    /// `2ν∫₀ᵗ‖∇u‖²` accumulated so far.
    pub fn dissipation_integral(&self) -> f64 {
        self.dissipation
    }
}

fn blow_up_reason(v: &VectorField) -> Option<String> {
    if !v.is_finite() {
        return Some("non-finite coefficient".into());
    }
    let norm = v.l2_norm();
    if norm > BLOW_UP_NORM {
        return Some(format!("L2 norm {norm:.3e} exceeds {BLOW_UP_NORM:e}"));
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowUpReport {
    pub time: f64,
    pub step: u64,
    pub reason: String,
    pub last_record: Option<DiagnosticsRecord>,
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub u: VectorField,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub params: SolverParams,
    pub monitors: MonitorConstants,
    pub records: Vec<DiagnosticsRecord>,
    /// Velocity at every sample when requested.
    pub snapshots: Vec<Snapshot>,
    pub final_state: SimState,
    pub cfl_violations: usize,
}

#[derive(Clone, Debug, Default)]
pub struct SimulateOptions {
    pub monitors: MonitorConstants,
    pub store_fields: bool,
}

pub fn simulate(initial: &VectorField, params: &SolverParams) -> Result<Trajectory> {
    simulate_with(initial, params, &SimulateOptions::default())
}

/// Integrates to `t_end`, sampling diagnostics every `sample_every` steps
/// (and at the final step).
pub fn simulate_with(
    initial: &VectorField,
    params: &SolverParams,
    opts: &SimulateOptions,
) -> Result<Trajectory> {
    simulate_observed(initial, params, opts, |_| {})
}

/// [`simulate_with`] calling `observe` on the state at every sample.
pub fn simulate_observed(
    initial: &VectorField,
    params: &SolverParams,
    opts: &SimulateOptions,
    mut observe: impl FnMut(&SimState),
) -> Result<Trajectory> {
    opts.monitors.validate()?;
    let nsteps = params.steps()?;
    let mut state = SimState::new(initial, params)?;
    let grid = initial.grid().clone();
    let stepper = Stepper::new(&grid, params);
    let mut monitor = Monitor::new(state.velocity(), params, &opts.monitors);
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let mut dissipation = 0.0;
    let mut cfl_violations = 0;

    let mut take_sample = |state: &SimState, dissipation: f64, records: &mut Vec<DiagnosticsRecord>| {
        observe(state);
        let rec = monitor.sample(state.velocity(), state.time, dissipation);
        if !rec.cfl_ok {
            cfl_violations += 1;
            if cfl_violations == 1 {
                warn!(
                    "CFL number {:.3} exceeds limit {} at t = {}",
                    rec.cfl, params.cfl_limit, rec.time
                );
            }
        }
        records.push(rec);
        if opts.store_fields {
            snapshots.push(Snapshot {
                time: state.time,
                u: state.velocity().clone(),
            });
        }
    };

    take_sample(&state, dissipation, &mut records);
    for s in 1..=nsteps {
        let (next, dd) = stepper.advance(state.evolved());
        if let Some(reason) = blow_up_reason(&next) {
            return Err(Error::BlowUp(Box::new(BlowUpReport {
                time: s as f64 * params.dt,
                step: s as u64,
                reason,
                last_record: records.last().cloned(),
            })));
        }
        dissipation += dd;
        let sample_now = s % params.sample_every == 0 || s == nsteps;
        state = SimState::from_evolved(next, s as u64, params)?;
        if sample_now {
            take_sample(&state, dissipation, &mut records);
        }
    }
    diagnostics::finalize(&mut records, params.alpha, params.nu, &opts.monitors);
    Ok(Trajectory {
        params: *params,
        monitors: opts.monitors,
        records,
        snapshots,
        final_state: state,
        cfl_violations,
    })
}
