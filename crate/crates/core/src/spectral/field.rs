use std::sync::Arc;

use num_complex::Complex64;

use super::grid::SpectralGrid;
use crate::error::{Error, Result};

/// A real field held by its Fourier coefficients, one array per component.
///
/// Scalars (e.g. 2D vorticity) are one-component fields. The `solenoidal`
/// and `mean_zero` tags record what the constructor or last operator
/// guaranteed; they are not re-verified on every access.
#[derive(Clone, Debug)]
pub struct VectorField {
    grid: Arc<SpectralGrid>,
    comps: Vec<Vec<Complex64>>,
    solenoidal: bool,
    mean_zero: bool,
}

/// Collocation values of a real field on the `n^dim` grid.
#[derive(Clone, Debug)]
pub struct PhysicalField {
    grid: Arc<SpectralGrid>,
    comps: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn zeros(grid: &Arc<SpectralGrid>, ncomp: usize) -> Self {
        Self {
            grid: grid.clone(),
            comps: vec![vec![Complex64::default(); grid.len()]; ncomp],
            solenoidal: true,
            mean_zero: true,
        }
    }

    pub fn from_components(grid: &Arc<SpectralGrid>, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::SizeMismatch { expected: 1, got: 0 });
        }
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::SizeMismatch {
                    expected: grid.len(),
                    got: c.len(),
                });
            }
        }
        let mean_zero = comps.iter().all(|c| c[0] == Complex64::default());
        Ok(Self {
            grid: grid.clone(),
            comps,
            solenoidal: false,
            mean_zero,
        })
    }

    pub(crate) fn from_parts(
        grid: &Arc<SpectralGrid>,
        comps: Vec<Vec<Complex64>>,
        solenoidal: bool,
        mean_zero: bool,
    ) -> Self {
        debug_assert!(comps.iter().all(|c| c.len() == grid.len()));
        Self {
            grid: grid.clone(),
            comps,
            solenoidal,
            mean_zero,
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub(crate) fn components_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    pub fn is_mean_zero(&self) -> bool {
        self.mean_zero
    }

    pub(crate) fn set_tags(&mut self, solenoidal: bool, mean_zero: bool) {
        self.solenoidal = solenoidal;
        self.mean_zero = mean_zero;
    }

    /// Tag as divergence-free after checking [`Self::divergence_defect`] against `tol`.
    pub fn mark_solenoidal(&mut self, tol: f64) -> Result<()> {
        let worst = self.divergence_defect();
        if worst > tol {
            return Err(Error::InvalidInitialData(format!(
                "field is not divergence-free (relative defect {worst:.3e})"
            )));
        }
        self.solenoidal = true;
        Ok(())
    }

    pub fn enforce_mean_zero(&mut self) {
        for c in &mut self.comps {
            c[0] = Complex64::default();
        }
        self.mean_zero = true;
    }

    /// Replaces every coefficient by `(û_k + conj(û_{-k}))/2`.
    pub fn symmetrize(&mut self) {
        let g = self.grid.clone();
        for c in &mut self.comps {
            symmetrize_slice(&g, c);
        }
    }

    /// `max_k |û_k - conj(û_{-k})|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for c in &self.comps {
            for idx in 0..self.grid.len() {
                let d = (c[idx] - c[self.grid.neg(idx)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / scale
    }

    /// `max_k |k·û_k| / |k|` relative to the largest coefficient. Requires
    /// `ncomp == dim`.
    pub fn divergence_defect(&self) -> f64 {
        let d = self.grid.dim();
        if self.ncomp() != d {
            return f64::INFINITY;
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for idx in 1..self.grid.len() {
            let k = self.grid.k(idx);
            let mut dot = Complex64::default();
            for a in 0..d {
                dot += self.comps[a][idx] * k[a];
            }
            worst = worst.max(dot.norm() / self.grid.k2(idx).sqrt());
        }
        worst / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m: f64, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &VectorField) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b))
            .fold(0.0, |m: f64, (x, y)| m.max((x - y).norm()))
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.comps {
            for z in c.iter_mut() {
                *z *= s;
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            for (p, q) in x.iter_mut().zip(y) {
                *p += q * a;
            }
        }
        self.solenoidal &= other.solenoidal;
        self.mean_zero &= other.mean_zero;
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Parseval `L²` norm, `((2π)^d Σ |û_k|²)^{1/2}` over all components.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm_sqr())
            .sum();
        (self.grid.volume() * s).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn to_physical(&self) -> PhysicalField {
        let refs: Vec<&[Complex64]> = self.comps.iter().map(|c| c.as_slice()).collect();
        PhysicalField {
            grid: self.grid.clone(),
            comps: to_physical_many(&self.grid, &refs),
        }
    }
}

impl PhysicalField {
    pub fn from_components(grid: &Arc<SpectralGrid>, comps: Vec<Vec<f64>>) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::SizeMismatch {
                    expected: grid.len(),
                    got: c.len(),
                });
            }
        }
        Ok(Self {
            grid: grid.clone(),
            comps,
        })
    }

    /// Samples `f(x, component)` at every collocation point.
    pub fn from_fn(
        grid: &Arc<SpectralGrid>,
        ncomp: usize,
        f: impl Fn([f64; 3], usize) -> f64,
    ) -> Self {
        let comps = (0..ncomp)
            .map(|c| (0..grid.len()).map(|i| f(grid.point(i), c)).collect())
            .collect();
        Self {
            grid: grid.clone(),
            comps,
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    /// Forward transform; the result is Hermitian-symmetrized.
    pub fn to_spectral(&self) -> VectorField {
        let refs: Vec<&[f64]> = self.comps.iter().map(|c| c.as_slice()).collect();
        let comps = to_spectral_many(&self.grid, &refs);
        let mean_zero = comps.iter().all(|c| c[0] == Complex64::default());
        VectorField::from_parts(&self.grid, comps, false, mean_zero)
    }

    pub fn max_abs_diff(&self, other: &PhysicalField) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b))
            .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
    }
}

pub(crate) fn symmetrize_slice(g: &SpectralGrid, c: &mut [Complex64]) {
    for idx in 0..g.len() {
        let j = g.neg(idx);
        if j < idx {
            continue;
        }
        let s = (c[idx] + c[j].conj()) * 0.5;
        c[idx] = s;
        c[j] = s.conj();
    }
}

/// Inverse transforms of real fields, two per complex FFT
/// (`â + i b̂ ↦ a + i b`).
pub(crate) fn to_physical_many(g: &SpectralGrid, comps: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(comps.len());
    let mut buf = vec![Complex64::default(); g.len()];
    for pair in comps.chunks(2) {
        match pair {
            [a, b] => {
                for ((z, &x), &y) in buf.iter_mut().zip(a.iter()).zip(b.iter()) {
                    *z = x + i * y;
                }
                g.plan().inverse(&mut buf);
                out.push(buf.iter().map(|z| z.re).collect());
                out.push(buf.iter().map(|z| z.im).collect());
            }
            [a] => {
                buf.copy_from_slice(a);
                g.plan().inverse(&mut buf);
                out.push(buf.iter().map(|z| z.re).collect());
            }
            _ => unreachable!(),
        }
    }
    out
}

/// Forward transforms of real fields, two per complex FFT, separated by
/// Hermitian symmetry; the outputs are exactly symmetric.
pub(crate) fn to_spectral_many(g: &SpectralGrid, comps: &[&[f64]]) -> Vec<Vec<Complex64>> {
    let norm = 1.0 / g.len() as f64;
    let mut out = Vec::with_capacity(comps.len());
    let mut buf = vec![Complex64::default(); g.len()];
    for pair in comps.chunks(2) {
        match pair {
            [a, b] => {
                for ((z, &x), &y) in buf.iter_mut().zip(a.iter()).zip(b.iter()) {
                    *z = Complex64::new(x, y);
                }
                g.plan().forward(&mut buf);
                let mut ha = vec![Complex64::default(); g.len()];
                let mut hb = vec![Complex64::default(); g.len()];
                for idx in 0..g.len() {
                    let zk = buf[idx];
                    let zm = buf[g.neg(idx)].conj();
                    ha[idx] = (zk + zm) * (0.5 * norm);
                    // (zk - zm) / 2i
                    let d = (zk - zm) * (0.5 * norm);
                    hb[idx] = Complex64::new(d.im, -d.re);
                }
                out.push(ha);
                out.push(hb);
            }
            [a] => {
                for (z, &x) in buf.iter_mut().zip(a.iter()) {
                    *z = Complex64::new(x, 0.0);
                }
                g.plan().forward(&mut buf);
                let mut h: Vec<Complex64> = buf.iter().map(|z| z * norm).collect();
                symmetrize_slice(g, &mut h);
                out.push(h);
            }
            _ => unreachable!(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::make_grid;
    use super::*;

    #[test]
    fn single_mode_is_cosine() {
        let g = make_grid(2, 16).unwrap();
        let mut f = VectorField::zeros(&g, 1);
        f.component_mut(0)[g.index_of(&[1, 0]).unwrap()] = Complex64::new(0.5, 0.0);
        f.component_mut(0)[g.index_of(&[-1, 0]).unwrap()] = Complex64::new(0.5, 0.0);
        let p = f.to_physical();
        for idx in 0..g.len() {
            let x = g.point(idx);
            assert!((p.component(0)[idx] - x[0].cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_round_trip() {
        let g = make_grid(3, 8).unwrap();
        let f = VectorField::zeros(&g, 3);
        let p = f.to_physical();
        assert!(p.components().iter().flatten().all(|&v| v == 0.0));
        assert_eq!(p.to_spectral().max_abs(), 0.0);
    }

    #[test]
    fn pair_transform_separates_components() {
        let g = make_grid(2, 16).unwrap();
        let p = PhysicalField::from_fn(&g, 3, |x, c| match c {
            0 => (x[0] + 2.0 * x[1]).sin(),
            1 => (3.0 * x[1]).cos() + 0.25,
            _ => (x[0]).cos() * (x[1]).sin(),
        });
        let s = p.to_spectral();
        let a = s.component(0);
        let k12 = g.index_of(&[1, 2]).unwrap();
        assert!((a[k12] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((s.component(1)[0] - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!(s.hermitian_defect() < 1e-15);
        let back = s.to_physical();
        assert!(back.max_abs_diff(&p) < 1e-14);
    }

    #[test]
    fn size_mismatch_rejected() {
        let g = make_grid(2, 8).unwrap();
        let bad = vec![vec![Complex64::default(); 10]];
        assert!(matches!(
            VectorField::from_components(&g, bad),
            Err(Error::SizeMismatch { expected: 64, got: 10 })
        ));
        assert!(PhysicalField::from_components(&g, vec![vec![0.0; 63]]).is_err());
    }
}
