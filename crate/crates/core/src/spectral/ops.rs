//! Exact Fourier-multiplier operators. All of them act mode by mode, so
//! they commute with one another and preserve Hermitian symmetry.

use std::sync::Arc;

use num_complex::Complex64;

use super::field::VectorField;
use super::grid::SpectralGrid;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeKind {
    Grad,
    Div,
    Curl,
    Laplacian,
}

pub fn differentiate(field: &VectorField, kind: DerivativeKind) -> Result<VectorField> {
    match kind {
        DerivativeKind::Grad => Ok(gradient(field)),
        DerivativeKind::Div => divergence(field),
        DerivativeKind::Curl => curl(field),
        DerivativeKind::Laplacian => Ok(laplacian(field)),
    }
}

/// Component `c * dim + j` of the result is `∂_j f_c`.
pub fn gradient(field: &VectorField) -> VectorField {
    let g = field.grid();
    let d = g.dim();
    let mut comps = Vec::with_capacity(field.ncomp() * d);
    for c in field.components() {
        for j in 0..d {
            comps.push(
                c.iter()
                    .enumerate()
                    .map(|(idx, &z)| I * g.k(idx)[j] * z)
                    .collect(),
            );
        }
    }
    VectorField::from_parts(g, comps, false, true)
}

pub fn divergence(field: &VectorField) -> Result<VectorField> {
    let g = field.grid();
    let d = g.dim();
    if field.ncomp() != d {
        return Err(Error::InvalidOperator(format!(
            "divergence needs a {d}-component field, got {}",
            field.ncomp()
        )));
    }
    let out = (0..g.len())
        .map(|idx| {
            let k = g.k(idx);
            (0..d).map(|a| I * k[a] * field.component(a)[idx]).sum()
        })
        .collect();
    Ok(VectorField::from_parts(g, vec![out], false, true))
}

/// `ik × f̂` in 3D; in 2D the scalar `ik₁f̂₂ − ik₂f̂₁`.
pub fn curl(field: &VectorField) -> Result<VectorField> {
    let g = field.grid();
    let d = g.dim();
    if field.ncomp() != d {
        return Err(Error::InvalidOperator(format!(
            "curl needs a {d}-component field on a {d}D grid, got {} component(s)",
            field.ncomp()
        )));
    }
    let comps = if d == 2 {
        let (a, b) = (field.component(0), field.component(1));
        vec![(0..g.len())
            .map(|idx| {
                let k = g.k(idx);
                I * (k[0] * b[idx] - k[1] * a[idx])
            })
            .collect()]
    } else {
        let (a, b, c) = (field.component(0), field.component(1), field.component(2));
        let mut out = vec![vec![Complex64::default(); g.len()]; 3];
        for idx in 0..g.len() {
            let k = g.k(idx);
            out[0][idx] = I * (k[1] * c[idx] - k[2] * b[idx]);
            out[1][idx] = I * (k[2] * a[idx] - k[0] * c[idx]);
            out[2][idx] = I * (k[0] * b[idx] - k[1] * a[idx]);
        }
        out
    };
    Ok(VectorField::from_parts(g, comps, d == 3, true))
}

pub fn laplacian(field: &VectorField) -> VectorField {
    let g = field.grid().clone();
    let mut out = field.clone();
    for c in 0..out.ncomp() {
        for (idx, z) in out.component_mut(c).iter_mut().enumerate() {
            *z *= -g.k2(idx);
        }
    }
    out.set_tags(field.is_solenoidal(), true);
    out
}

/// `P̂û_k = û_k − k(k·û_k)/|k|²`; the mean mode passes through.
pub fn leray_project(field: &VectorField) -> Result<VectorField> {
    let mut out = field.clone();
    project_in_place(&mut out)?;
    Ok(out)
}

pub(crate) fn project_in_place(field: &mut VectorField) -> Result<()> {
    let g = field.grid().clone();
    let d = g.dim();
    if field.ncomp() != d {
        return Err(Error::InvalidOperator(format!(
            "Leray projection needs a {d}-component field, got {}",
            field.ncomp()
        )));
    }
    let mean_zero = field.is_mean_zero();
    let comps = field.components_mut();
    for idx in 1..g.len() {
        let k = g.k(idx);
        let mut dot = Complex64::default();
        for a in 0..d {
            dot += comps[a][idx] * k[a];
        }
        let s = dot / g.k2(idx);
        for a in 0..d {
            comps[a][idx] -= s * k[a];
        }
    }
    field.set_tags(true, mean_zero);
    Ok(())
}

/// Inverts `1 − αΔ` with the multiplier `1/(1 + α|k|²)`.
pub fn helmholtz_solve(field: &VectorField, alpha: f64) -> Result<VectorField> {
    check_alpha(alpha)?;
    Ok(multiply(field, |k2| 1.0 / (1.0 + alpha * k2)))
}

/// Applies `1 − αΔ`.
pub fn helmholtz_apply(field: &VectorField, alpha: f64) -> Result<VectorField> {
    check_alpha(alpha)?;
    Ok(multiply(field, |k2| 1.0 + alpha * k2))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be finite and non-negative, got {alpha}"
        )));
    }
    Ok(())
}

fn multiply(field: &VectorField, m: impl Fn(f64) -> f64) -> VectorField {
    let g = field.grid().clone();
    let mut out = field.clone();
    for c in 0..out.ncomp() {
        for (idx, z) in out.component_mut(c).iter_mut().enumerate() {
            *z *= m(g.k2(idx));
        }
    }
    out
}

/// Zeroes every mode outside the 2/3-rule mask.
pub fn dealias(field: &VectorField) -> VectorField {
    let g = field.grid().clone();
    let mut out = field.clone();
    for c in 0..out.ncomp() {
        for (idx, z) in out.component_mut(c).iter_mut().enumerate() {
            if !g.retained(idx) {
                *z = Complex64::default();
            }
        }
    }
    out
}

/// Copies the modes of `field` retained on `target` (same dimension); modes
/// outside the target's dealias band are dropped.
pub fn resample(field: &VectorField, target: &Arc<SpectralGrid>) -> Result<VectorField> {
    let src = field.grid();
    if src.dim() != target.dim() {
        return Err(Error::InvalidOperator(format!(
            "cannot resample a {}D field onto a {}D grid",
            src.dim(),
            target.dim()
        )));
    }
    let d = target.dim();
    let mut out = VectorField::zeros(target, field.ncomp());
    let mut k = [0i64; 3];
    for idx in 0..target.len() {
        if !target.retained(idx) {
            continue;
        }
        let kt = target.k(idx);
        for a in 0..d {
            k[a] = kt[a] as i64;
        }
        if let Some(j) = src.index_of(&k[..d]) {
            for c in 0..field.ncomp() {
                out.component_mut(c)[idx] = field.component(c)[j];
            }
        }
    }
    out.set_tags(field.is_solenoidal(), field.is_mean_zero());
    Ok(out)
}

/// `⟨f, g⟩ = ∫ f·g = (2π)^d Σ_k Re(f̂_k conj(ĝ_k))` for real fields.
pub fn inner(a: &VectorField, b: &VectorField) -> f64 {
    let s: f64 = a
        .components()
        .iter()
        .zip(b.components())
        .flat_map(|(x, y)| x.iter().zip(y))
        .map(|(p, q)| (p * q.conj()).re)
        .sum();
    a.grid().volume() * s
}
