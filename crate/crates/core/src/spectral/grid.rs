use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Discretization of the torus `[0, 2π)^dim` with `n` collocation points per
/// axis. Modes are stored in full-complex layout, row-major with axis 0
/// slowest; the wavenumber of axis index `j` is `j` for `j <= n/2` and
/// `j - n` otherwise.
pub struct SpectralGrid {
    dim: usize,
    n: usize,
    len: usize,
    axis_k: Vec<i64>,
    kvec: Vec<[f64; 3]>,
    k2: Vec<f64>,
    mask: Vec<bool>,
    neg: Vec<usize>,
    plan: FftPlan,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n
    }
}

/// Builds the grid, its wavenumber lattice and the 2/3-rule dealias mask.
pub fn make_grid(dim: usize, n: usize) -> Result<Arc<SpectralGrid>> {
    SpectralGrid::new(dim, n).map(Arc::new)
}

impl SpectralGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Sizing(format!("dimension must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::Sizing(format!(
                "points per axis must be even and at least 8, got {n}"
            )));
        }
        let axis_k: Vec<i64> = (0..n)
            .map(|j| if j <= n / 2 { j as i64 } else { j as i64 - n as i64 })
            .collect();
        let len = n.pow(dim as u32);
        let mut kvec = Vec::with_capacity(len);
        let mut k2 = Vec::with_capacity(len);
        let mut mask = Vec::with_capacity(len);
        let mut neg = Vec::with_capacity(len);
        for idx in 0..len {
            let ix = unravel(idx, n, dim);
            let mut k = [0.0; 3];
            let mut retained = true;
            let mut nidx = 0;
            for a in 0..dim {
                let ka = axis_k[ix[a]];
                k[a] = ka as f64;
                // |k_a| <= n/3 without rounding
                if 3 * ka.unsigned_abs() as usize > n {
                    retained = false;
                }
                nidx = nidx * n + (n - ix[a]) % n;
            }
            k2.push(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
            kvec.push(k);
            mask.push(retained);
            neg.push(nidx);
        }
        Ok(Self {
            dim,
            n,
            len,
            axis_k,
            kvec,
            k2,
            mask,
            neg,
            plan: FftPlan::new(n, dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of modes (= number of collocation points), `n^dim`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `(2π)^dim`
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Quadrature weight of one collocation point, `(2π/n)^dim`.
    pub fn cell_volume(&self) -> f64 {
        (2.0 * PI / self.n as f64).powi(self.dim as i32)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn axis_wavenumbers(&self) -> &[i64] {
        &self.axis_k
    }

    /// Wavenumber vector of mode `idx`; unused trailing entries are zero.
    #[inline]
    pub fn k(&self, idx: usize) -> [f64; 3] {
        self.kvec[idx]
    }

    #[inline]
    pub fn k2(&self, idx: usize) -> f64 {
        self.k2[idx]
    }

    pub fn k2_all(&self) -> &[f64] {
        &self.k2
    }

    #[inline]
    pub fn retained(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.mask
    }

    /// Index of the mode `-k`.
    #[inline]
    pub fn neg(&self, idx: usize) -> usize {
        self.neg[idx]
    }

    /// Largest per-axis wavenumber kept by the dealias mask.
    pub fn k_retained_max(&self) -> usize {
        self.n / 3
    }

    /// Linear index of the mode with the given signed wavenumbers.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let n = self.n as i64;
        let mut idx = 0usize;
        for &ka in k {
            if ka > n / 2 || ka <= -n / 2 {
                return None;
            }
            idx = idx * self.n + ka.rem_euclid(n) as usize;
        }
        Some(idx)
    }

    /// Physical coordinates of collocation point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let ix = unravel(idx, self.n, self.dim);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = ix[a] as f64 * h;
        }
        x
    }

    pub(crate) fn plan(&self) -> &FftPlan {
        &self.plan
    }
}

fn unravel(mut idx: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut ix = [0usize; 3];
    for a in (0..dim).rev() {
        ix[a] = idx % n;
        idx /= n;
    }
    ix
}

/// Multi-dimensional complex FFT assembled from 1D plans. Plans are
/// immutable; scratch space is allocated per call.
pub(crate) struct FftPlan {
    n: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPlan {
    fn new(n: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            dim,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Unnormalized `Σ_x f(x) e^{-ik·x}`.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(&*self.forward, data);
    }

    /// Unnormalized `Σ_k f̂_k e^{ik·x}`.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(&*self.inverse, data);
    }

    fn run(&self, fft: &dyn Fft<f64>, data: &mut [Complex64]) {
        let n = self.n;
        let len = data.len();
        debug_assert_eq!(len, n.pow(self.dim as u32));
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut tile = vec![Complex64::default(); TILE * n];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            // strided lines go through a small tile of TILE contiguous lines
            let outer = len / (n * stride);
            for o in 0..outer {
                let base = o * n * stride;
                for i0 in (0..stride).step_by(TILE) {
                    let w = TILE.min(stride - i0);
                    let tile = &mut tile[..w * n];
                    for j in 0..n {
                        let row = &data[base + j * stride + i0..base + j * stride + i0 + w];
                        for (b, &z) in row.iter().enumerate() {
                            tile[b * n + j] = z;
                        }
                    }
                    fft.process_with_scratch(tile, &mut scratch);
                    for j in 0..n {
                        let row = &mut data[base + j * stride + i0..base + j * stride + i0 + w];
                        for (b, z) in row.iter_mut().enumerate() {
                            *z = tile[b * n + j];
                        }
                    }
                }
            }
        }
    }
}

/// Lines per cache tile in strided passes.
const TILE: usize = 16;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_wavenumbers_n8() {
        let g = make_grid(2, 8).unwrap();
        assert_eq!(g.axis_wavenumbers(), &[0, 1, 2, 3, 4, -3, -2, -1]);
        for idx in 0..g.len() {
            let k = g.k(idx);
            let big = k[0].abs() >= 3.0 || k[1].abs() >= 3.0;
            assert_eq!(g.retained(idx), !big, "k = {k:?}");
        }
    }

    #[test]
    fn mask_n32_keeps_up_to_10() {
        let g = make_grid(3, 32).unwrap();
        assert_eq!(g.k_retained_max(), 10);
        assert!(g.retained(g.index_of(&[10, -10, 10]).unwrap()));
        assert!(!g.retained(g.index_of(&[11, 0, 0]).unwrap()));
        assert!(!g.retained(g.index_of(&[0, 0, -11]).unwrap()));
        assert!(g.retained(0));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(make_grid(2, 7), Err(Error::Sizing(_))));
        assert!(matches!(make_grid(2, 6), Err(Error::Sizing(_))));
        assert!(matches!(make_grid(4, 8), Err(Error::Sizing(_))));
    }

    #[test]
    fn neg_index_is_involution() {
        let g = make_grid(3, 8).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.neg(g.neg(idx)), idx);
            let (k, m) = (g.k(idx), g.k(g.neg(idx)));
            for a in 0..3 {
                // Nyquist maps onto itself
                if k[a].abs() < 4.0 {
                    assert_eq!(k[a], -m[a]);
                }
            }
        }
    }

    #[test]
    fn fft_matches_direct_sum() {
        let g = make_grid(2, 8).unwrap();
        let data: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = data.clone();
        g.plan().forward(&mut fast);
        for m in 0..g.len() {
            let k = g.k(m);
            let mut acc = Complex64::default();
            for (x, &d) in data.iter().enumerate() {
                let p = g.point(x);
                acc += d * Complex64::from_polar(1.0, -(k[0] * p[0] + k[1] * p[1]));
            }
            assert!((acc - fast[m]).norm() < 1e-11);
        }
    }
}
