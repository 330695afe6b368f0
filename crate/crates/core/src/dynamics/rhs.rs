//! Pseudo-spectral right-hand sides. Quadratic products are formed at the
//! collocation points from 2/3-masked inputs and masked again, so every
//! retained mode of a product is alias-free.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::field::{to_physical_many, to_spectral_many};
use crate::spectral::ops::project_in_place;
use crate::spectral::{curl, helmholtz_solve, SpectralGrid, VectorField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Output of a nonlinear evaluation: the tendency `N` and `‖∇u‖²` of the
/// velocity at the evaluated state.
pub(crate) struct Nonlinear {
    pub(crate) tendency: Vec<Vec<Complex64>>,
    pub(crate) grad_sq: f64,
}

fn spectral_grad(g: &SpectralGrid, f: &[Complex64], j: usize) -> Vec<Complex64> {
    f.iter()
        .enumerate()
        .map(|(idx, &z)| I * g.k(idx)[j] * z)
        .collect()
}

fn grad_sq(g: &SpectralGrid, u: &[Vec<Complex64>]) -> f64 {
    let mut s = 0.0;
    for c in u {
        for (idx, z) in c.iter().enumerate() {
            s += g.k2(idx) * z.norm_sqr();
        }
    }
    g.volume() * s
}

fn helmholtz_slices(g: &SpectralGrid, v: &[Vec<Complex64>], alpha: f64) -> Vec<Vec<Complex64>> {
    v.iter()
        .map(|c| {
            c.iter()
                .enumerate()
                .map(|(idx, &z)| z / (1.0 + alpha * g.k2(idx)))
                .collect()
        })
        .collect()
}

fn mask_and_mean(g: &SpectralGrid, comps: &mut [Vec<Complex64>]) {
    for c in comps {
        c[0] = Complex64::default();
        for (idx, z) in c.iter_mut().enumerate() {
            if !g.retained(idx) {
                *z = Complex64::default();
            }
        }
    }
}

/// `−P[u·∇v + Σ_j v_j ∇u_j]` with `u = (1 − αΔ)^{-1} v`.
pub(crate) fn velocity_nonlinear(v: &VectorField, alpha: f64) -> Nonlinear {
    let g = v.grid().clone();
    let d = g.dim();
    let vs = v.components();
    let us = helmholtz_slices(&g, vs, alpha);
    let same = alpha == 0.0;

    // layout: u (d), ∂_j u_i (d²) and, when α > 0, v (d), ∂_j v_i (d²)
    let mut spectral: Vec<Vec<Complex64>> = Vec::with_capacity(2 * (d + d * d));
    spectral.extend(us.iter().cloned());
    for c in &us {
        for j in 0..d {
            spectral.push(spectral_grad(&g, c, j));
        }
    }
    if !same {
        spectral.extend(vs.iter().cloned());
        for c in vs {
            for j in 0..d {
                spectral.push(spectral_grad(&g, c, j));
            }
        }
    }
    let refs: Vec<&[Complex64]> = spectral.iter().map(|c| c.as_slice()).collect();
    let phys = to_physical_many(&g, &refs);
    let u = &phys[..d];
    let du = &phys[d..d + d * d];
    let (vp, dv) = if same {
        (u, du)
    } else {
        let o = d + d * d;
        (&phys[o..o + d], &phys[o + d..o + d + d * d])
    };

    let mut prod = vec![vec![0.0; g.len()]; d];
    for (i, out) in prod.iter_mut().enumerate() {
        for (x, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..d {
                // u_j ∂_j v_i + v_j ∂_i u_j
                s += u[j][x] * dv[i * d + j][x] + vp[j][x] * du[j * d + i][x];
            }
            *o = s;
        }
    }
    let prefs: Vec<&[f64]> = prod.iter().map(|c| c.as_slice()).collect();
    let mut n = to_spectral_many(&g, &prefs);
    mask_and_mean(&g, &mut n);
    negate(&mut n);
    let mut nf = VectorField::from_parts(&g, n, false, true);
    project_in_place(&mut nf).expect("d components");
    Nonlinear {
        tendency: nf.into_components(),
        grad_sq: grad_sq(&g, &us),
    }
}

/// Nonlinear part of `∂_t ω_α = νΔω − u·∇ω_α + ω_α·∇u`; the stretching term
/// is absent in 2D where `ω_α` is a scalar.
pub(crate) fn curl_nonlinear(w: &VectorField, alpha: f64) -> Nonlinear {
    let g = w.grid().clone();
    let d = g.dim();
    let ws = w.components();
    let omega = helmholtz_slices(&g, ws, alpha);
    let us = biot_savart(&g, &omega);

    let nw = ws.len();
    let mut spectral: Vec<Vec<Complex64>> = Vec::new();
    spectral.extend(us.iter().cloned());
    for c in ws {
        for j in 0..d {
            spectral.push(spectral_grad(&g, c, j));
        }
    }
    if d == 3 {
        spectral.extend(ws.iter().cloned());
        for c in &us {
            for j in 0..d {
                spectral.push(spectral_grad(&g, c, j));
            }
        }
    }
    let refs: Vec<&[Complex64]> = spectral.iter().map(|c| c.as_slice()).collect();
    let phys = to_physical_many(&g, &refs);
    let u = &phys[..d];
    let dw = &phys[d..d + nw * d];

    let mut prod = vec![vec![0.0; g.len()]; nw];
    for (i, out) in prod.iter_mut().enumerate() {
        for (x, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..d {
                s += u[j][x] * dw[i * d + j][x];
            }
            *o = s;
        }
    }
    if d == 3 {
        let o = d + nw * d;
        let wp = &phys[o..o + 3];
        let du = &phys[o + 3..o + 12];
        for (i, out) in prod.iter_mut().enumerate() {
            for (x, v) in out.iter_mut().enumerate() {
                let mut s = 0.0;
                for j in 0..3 {
                    s += wp[j][x] * du[i * 3 + j][x];
                }
                *v -= s;
            }
        }
    }
    let prefs: Vec<&[f64]> = prod.iter().map(|c| c.as_slice()).collect();
    let mut n = to_spectral_many(&g, &prefs);
    mask_and_mean(&g, &mut n);
    negate(&mut n);
    let mut nf = VectorField::from_parts(&g, n, false, true);
    if d == 3 {
        // ω_α stays solenoidal
        project_in_place(&mut nf).expect("3 components");
    }
    Nonlinear {
        tendency: nf.into_components(),
        grad_sq: grad_sq(&g, &us),
    }
}

fn negate(comps: &mut [Vec<Complex64>]) {
    for c in comps {
        for z in c.iter_mut() {
            *z = -*z;
        }
    }
}

/// `û_k = (ik × ω̂_k)/|k|²` in 3D, `û_k = (ik₂ω̂_k, −ik₁ω̂_k)/|k|²` in 2D.
fn biot_savart(g: &SpectralGrid, omega: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let d = g.dim();
    let mut u = vec![vec![Complex64::default(); g.len()]; d];
    for idx in 1..g.len() {
        let k = g.k(idx);
        let inv = 1.0 / g.k2(idx);
        if d == 2 {
            let w = omega[0][idx] * inv;
            u[0][idx] = I * k[1] * w;
            u[1][idx] = -I * k[0] * w;
        } else {
            let (a, b, c) = (omega[0][idx], omega[1][idx], omega[2][idx]);
            u[0][idx] = I * (k[1] * c - k[2] * b) * inv;
            u[1][idx] = I * (k[2] * a - k[0] * c) * inv;
            u[2][idx] = I * (k[0] * b - k[1] * a) * inv;
        }
    }
    u
}

/// Fourier Biot-Savart law: the divergence-free, mean-zero `u` with
/// `curl u = ω`. Takes a scalar on 2D grids and a solenoidal vector in 3D.
pub fn velocity_from_vorticity(omega: &VectorField) -> Result<VectorField> {
    let g = omega.grid().clone();
    let expected = if g.dim() == 2 { 1 } else { 3 };
    if omega.ncomp() != expected {
        return Err(Error::InvalidOperator(format!(
            "vorticity on a {}D grid has {expected} component(s), got {}",
            g.dim(),
            omega.ncomp()
        )));
    }
    let scale = omega.max_abs();
    if omega.components().iter().any(|c| c[0].norm() > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::InvalidInitialData(
            "vorticity has a nonzero mean mode".into(),
        ));
    }
    Ok(VectorField::from_parts(
        &g,
        biot_savart(&g, omega.components()),
        true,
        true,
    ))
}

/// Velocity carried by an evolved variable.
pub(crate) fn recover_velocity(
    evolved: &VectorField,
    alpha: f64,
    curl_form: bool,
) -> Result<VectorField> {
    let inner = helmholtz_solve(evolved, alpha)?;
    if curl_form {
        let g = inner.grid().clone();
        Ok(VectorField::from_parts(
            &g,
            biot_savart(&g, inner.components()),
            true,
            true,
        ))
    } else {
        let mut u = inner;
        u.set_tags(true, true);
        Ok(u)
    }
}

/// Evolved variable for a velocity: `u − αΔu`, or its curl `ω_α`.
pub(crate) fn evolved_from_velocity(
    u: &VectorField,
    alpha: f64,
    curl_form: bool,
) -> Result<VectorField> {
    let v = crate::spectral::helmholtz_apply(u, alpha)?;
    if curl_form {
        curl(&v)
    } else {
        Ok(v)
    }
}

