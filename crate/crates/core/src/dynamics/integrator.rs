//! Time steppers. The linear part `νΔ(1 − αΔ)^{-1}` has the diagonal
//! multiplier `L(k) = −ν|k|²/(1 + α|k|²)` for both formulations; it is
//! integrated exactly by an integrating factor (Lawson RK4) or implicitly
//! (first-order IMEX Euler).
//!
//! The dissipation integral `2ν∫‖∇u‖²` is carried as an extra ODE variable
//! with zero linear part, advanced with the same stages as the field.

use std::sync::Arc;

use num_complex::Complex64;

use super::rhs::{curl_nonlinear, recover_velocity, velocity_nonlinear, Nonlinear};
use super::{Formulation, Integrator, SolverParams};
use crate::fields::grad_l2;
use crate::spectral::field::symmetrize_slice;
use crate::spectral::{SpectralGrid, VectorField};

pub(crate) struct Stepper {
    grid: Arc<SpectralGrid>,
    params: SolverParams,
    linear: Vec<f64>,
    exp_full: Vec<f64>,
    exp_half: Vec<f64>,
}

type Comps = Vec<Vec<Complex64>>;

impl Stepper {
    pub(crate) fn new(grid: &Arc<SpectralGrid>, params: &SolverParams) -> Self {
        let linear: Vec<f64> = grid
            .k2_all()
            .iter()
            .map(|&k2| -params.nu * k2 / (1.0 + params.alpha * k2))
            .collect();
        let exp_full = linear.iter().map(|l| (l * params.dt).exp()).collect();
        let exp_half = linear.iter().map(|l| (l * params.dt * 0.5).exp()).collect();
        Self {
            grid: grid.clone(),
            params: *params,
            linear,
            exp_full,
            exp_half,
        }
    }

    pub(crate) fn linear_multiplier(&self) -> &[f64] {
        &self.linear
    }

    pub(crate) fn nonlinear(&self, v: &VectorField) -> Nonlinear {
        let curl_form = self.params.formulation == Formulation::Curl;
        if self.params.linear_only {
            let u = recover_velocity(v, self.params.alpha, curl_form).expect("alpha validated");
            let g = grad_l2(&u);
            return Nonlinear {
                tendency: vec![vec![Complex64::default(); self.grid.len()]; v.ncomp()],
                grad_sq: g * g,
            };
        }
        if curl_form {
            curl_nonlinear(v, self.params.alpha)
        } else {
            velocity_nonlinear(v, self.params.alpha)
        }
    }

    /// One step of size `dt`; returns the new evolved variable and the
    /// increment of `2ν∫‖∇u‖²`.
    pub(crate) fn advance(&self, v: &VectorField) -> (VectorField, f64) {
        let (mut comps, dd) = match self.params.integrator {
            Integrator::IfRk4 => self.lawson_rk4(v),
            Integrator::ImexEuler => self.imex_euler(v),
        };
        for c in &mut comps {
            symmetrize_slice(&self.grid, c);
        }
        let sol = v.is_solenoidal();
        (VectorField::from_parts(&self.grid, comps, sol, true), dd)
    }

    fn wrap(&self, comps: Comps, like: &VectorField) -> VectorField {
        VectorField::from_parts(&self.grid, comps, like.is_solenoidal(), true)
    }

    fn lawson_rk4(&self, v: &VectorField) -> (Comps, f64) {
        let dt = self.params.dt;
        let (e1, e2) = (&self.exp_full, &self.exp_half);
        let two_nu = 2.0 * self.params.nu;
        let vs = v.components();

        let a = self.nonlinear(v);
        // E/2 (v + dt/2 a)
        let s2: Comps = vs
            .iter()
            .zip(&a.tendency)
            .map(|(x, y)| {
                (0..x.len())
                    .map(|i| (x[i] + y[i] * (0.5 * dt)) * e2[i])
                    .collect()
            })
            .collect();
        let b = self.nonlinear(&self.wrap(s2, v));
        // E/2 v + dt/2 b
        let s3: Comps = vs
            .iter()
            .zip(&b.tendency)
            .map(|(x, y)| (0..x.len()).map(|i| x[i] * e2[i] + y[i] * (0.5 * dt)).collect())
            .collect();
        let c = self.nonlinear(&self.wrap(s3, v));
        // E v + dt E/2 c
        let s4: Comps = vs
            .iter()
            .zip(&c.tendency)
            .map(|(x, y)| (0..x.len()).map(|i| x[i] * e1[i] + y[i] * (dt * e2[i])).collect())
            .collect();
        let d = self.nonlinear(&self.wrap(s4, v));

        let out: Comps = (0..vs.len())
            .map(|comp| {
                let (x, ka, kb, kc, kd) = (
                    &vs[comp],
                    &a.tendency[comp],
                    &b.tendency[comp],
                    &c.tendency[comp],
                    &d.tendency[comp],
                );
                (0..x.len())
                    .map(|i| {
                        x[i] * e1[i]
                            + (ka[i] * e1[i] + (kb[i] + kc[i]) * (2.0 * e2[i]) + kd[i])
                                * (dt / 6.0)
                    })
                    .collect()
            })
            .collect();
        let dd = two_nu * dt / 6.0 * (a.grad_sq + 2.0 * b.grad_sq + 2.0 * c.grad_sq + d.grad_sq);
        (out, dd)
    }

    fn imex_euler(&self, v: &VectorField) -> (Comps, f64) {
        let dt = self.params.dt;
        let a = self.nonlinear(v);
        let out = v
            .components()
            .iter()
            .zip(&a.tendency)
            .map(|(x, y)| {
                (0..x.len())
                    .map(|i| (x[i] + y[i] * dt) / (1.0 - dt * self.linear[i]))
                    .collect()
            })
            .collect();
        (out, 2.0 * self.params.nu * dt * a.grad_sq)
    }
}
