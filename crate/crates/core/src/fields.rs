//! Norms used by the estimates and constructors for test and benchmark
//! fields.
//!
//! Sobolev norms use the Bessel weight, `‖u‖²_{H^m} = (2π)^d Σ_k
//! (1+|k|²)^m |û_k|²`, which is equivalent to the multi-index definition
//! with dimension-only constants and satisfies `‖u‖_{H^m} ≤
//! ‖u‖_{H^{m-1}}^{1/2} ‖u‖_{H^{m+1}}^{1/2}` exactly (Cauchy-Schwarz). Lebesgue
//! norms are collocation quadratures on the same grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{gradient, leray_project, SpectralGrid, VectorField};

/// All norms in the integral (unnormalized) convention.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub l3: f64,
    /// `‖∇u‖_{L⁶}`
    pub l6: f64,
    /// `‖∇u‖_{L∞}`, pointwise Frobenius norm of the gradient.
    pub lip: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LebesgueExponent {
    L2,
    L3,
    L6,
    /// `max_x |u(x)|`
    Inf,
    /// `max_x |∇u(x)|_F`
    InfGrad,
}

/// `(2π)^d Σ_k w(|k|²) |û_k|²` summed over components.
pub fn weighted_sq(field: &VectorField, w: impl Fn(f64) -> f64) -> f64 {
    let g = field.grid();
    let mut s = 0.0;
    for c in field.components() {
        for (idx, z) in c.iter().enumerate() {
            s += w(g.k2(idx)) * z.norm_sqr();
        }
    }
    g.volume() * s
}

pub fn sobolev_norm(field: &VectorField, m: u32) -> Result<f64> {
    if m > 3 {
        return Err(Error::InvalidParameter(format!(
            "Sobolev index must be 0..=3, got {m}"
        )));
    }
    Ok(weighted_sq(field, |k2| (1.0 + k2).powi(m as i32)).sqrt())
}

/// `‖∇u‖_{L²}`
pub fn grad_l2(field: &VectorField) -> f64 {
    weighted_sq(field, |k2| k2).sqrt()
}

pub fn lebesgue_norm(field: &VectorField, p: LebesgueExponent) -> f64 {
    match p {
        LebesgueExponent::InfGrad => pointwise_max(&gradient(field)),
        LebesgueExponent::Inf => pointwise_max(field),
        LebesgueExponent::L2 => quadrature_lp(field, 2.0),
        LebesgueExponent::L3 => quadrature_lp(field, 3.0),
        LebesgueExponent::L6 => quadrature_lp(field, 6.0),
    }
}

fn pointwise_abs(field: &VectorField) -> Vec<f64> {
    let phys = field.to_physical();
    let mut acc = vec![0.0; field.grid().len()];
    for c in phys.components() {
        for (a, v) in acc.iter_mut().zip(c) {
            *a += v * v;
        }
    }
    acc.iter_mut().for_each(|a| *a = a.sqrt());
    acc
}

fn lp_of(values: &[f64], p: f64, cell: f64) -> f64 {
    let s: f64 = values.iter().map(|v| v.powf(p)).sum();
    (cell * s).powf(1.0 / p)
}

fn quadrature_lp(field: &VectorField, p: f64) -> f64 {
    lp_of(&pointwise_abs(field), p, field.grid().cell_volume())
}

fn pointwise_max(field: &VectorField) -> f64 {
    pointwise_abs(field).into_iter().fold(0.0, f64::max)
}

/// Every norm of [`NormReport`] with one transform of `u` and one of `∇u`.
pub fn norm_report(u: &VectorField) -> NormReport {
    let cell = u.grid().cell_volume();
    let mags = pointwise_abs(u);
    let grad = pointwise_abs(&gradient(u));
    let sob = |m: i32| weighted_sq(u, |k2| (1.0 + k2).powi(m)).sqrt();
    NormReport {
        l2: sob(0),
        h1: sob(1),
        h2: sob(2),
        h3: sob(3),
        l3: lp_of(&mags, 3.0, cell),
        l6: lp_of(&grad, 6.0, cell),
        lip: grad.iter().copied().fold(0.0, f64::max),
    }
}

/// Parameters of [`random_divfree_field`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomFieldSpec {
    pub seed: u64,
    #[serde(default = "default_slope")]
    pub spectrum_slope: f64,
    pub k_max: u32,
    pub amplitude: f64,
}

fn default_slope() -> f64 {
    -2.0
}

/// Random divergence-free, mean-zero field with `|û_k| ∝ |k|^slope` on the
/// shell `1 ≤ |k| ≤ k_max`, uniform phases, scaled to `‖u‖_{L²} = amplitude`.
/// Deterministic in `seed`.
pub fn random_divfree_field(grid: &Arc<SpectralGrid>, spec: &RandomFieldSpec) -> Result<VectorField> {
    let d = grid.dim();
    let k_max = spec.k_max as usize;
    if k_max < 1 || k_max > grid.k_retained_max() {
        return Err(Error::InvalidParameter(format!(
            "k_max = {k_max} outside 1..={} retained by the dealias mask",
            grid.k_retained_max()
        )));
    }
    if !spec.amplitude.is_finite() || spec.amplitude < 0.0 || !spec.spectrum_slope.is_finite() {
        return Err(Error::InvalidParameter(
            "amplitude must be finite and non-negative, slope finite".into(),
        ));
    }
    if spec.amplitude == 0.0 {
        return Ok(VectorField::zeros(grid, d));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let kmax2 = (k_max * k_max) as f64;
    let mut comps = vec![vec![Complex64::default(); grid.len()]; d];
    for idx in 1..grid.len() {
        let k2 = grid.k2(idx);
        // draw for every mode so the stream does not depend on k_max
        let phases: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
        if k2 > kmax2 {
            continue;
        }
        let mag = k2.sqrt().powf(spec.spectrum_slope);
        for a in 0..d {
            comps[a][idx] = Complex64::from_polar(mag, 2.0 * PI * phases[a]);
        }
    }
    let mut f = VectorField::from_components(grid, comps)?;
    f.symmetrize();
    let mut f = leray_project(&f)?;
    let norm = f.l2_norm();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("random field degenerated to zero".into()));
    }
    f.scale(spec.amplitude / norm);
    f.set_tags(true, true);
    Ok(f)
}

/// `u = a (sin x cos y, −cos x sin y)`, embedded z-independently with a zero
/// third component on 3D grids.
pub fn taylor_green(grid: &Arc<SpectralGrid>, amplitude: f64) -> VectorField {
    let d = grid.dim();
    let mut f = VectorField::zeros(grid, d);
    let q = Complex64::new(0.0, amplitude / 4.0);
    let modes: [([i64; 2], Complex64, Complex64); 4] = [
        ([1, 1], -q, q),
        ([-1, -1], q, -q),
        ([1, -1], -q, -q),
        ([-1, 1], q, q),
    ];
    for (k, c0, c1) in modes {
        let idx = if d == 2 {
            grid.index_of(&k)
        } else {
            grid.index_of(&[k[0], k[1], 0])
        }
        .expect("grid holds |k| = 1 modes");
        f.component_mut(0)[idx] = c0;
        f.component_mut(1)[idx] = c1;
    }
    f
}

/// Ratios whose suprema are the Gagliardo-Nirenberg / Sobolev constants the
/// estimates invoke.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GnRatios {
    /// `‖u‖_{L³} / (‖u‖_{L²} ‖u‖_{H¹})^{1/2}`
    pub l3: f64,
    /// `‖∇u‖_{L⁶} / ‖∇u‖_{H¹}`
    pub l6: f64,
    /// `Lip(u) / (‖u‖_{H¹}^{1/4} ‖u‖_{H³}^{3/4})`
    pub lip: f64,
    /// `‖u‖_{L∞} / (‖u‖_{H¹} ‖u‖_{H²})^{1/2}`
    pub linf: f64,
}

impl GnRatios {
    pub fn max(self, other: GnRatios) -> GnRatios {
        GnRatios {
            l3: self.l3.max(other.l3),
            l6: self.l6.max(other.l6),
            lip: self.lip.max(other.lip),
            linf: self.linf.max(other.linf),
        }
    }
}

pub fn gn_ratios(u: &VectorField) -> GnRatios {
    let n = norm_report(u);
    if n.l2 == 0.0 {
        return GnRatios::default();
    }
    let grad_h1 = weighted_sq(u, |k2| (1.0 + k2) * k2).sqrt();
    let linf = lebesgue_norm(u, LebesgueExponent::Inf);
    GnRatios {
        l3: n.l3 / (n.l2 * n.h1).sqrt(),
        l6: n.l6 / grad_h1,
        lip: n.lip / (n.h1.powf(0.25) * n.h3.powf(0.75)),
        linf: linf / (n.h1 * n.h2).sqrt(),
    }
}

/// Suite maxima of [`gn_ratios`].
pub fn estimate_gn_constants<'a>(fields: impl IntoIterator<Item = &'a VectorField>) -> GnRatios {
    fields
        .into_iter()
        .map(gn_ratios)
        .fold(GnRatios::default(), GnRatios::max)
}
