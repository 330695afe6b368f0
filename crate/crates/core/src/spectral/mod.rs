//! Fourier representation of fields on the periodic torus and the exact
//! Fourier-multiplier operators used by the equations: derivatives, Leray
//! projection, Helmholtz inversion and 2/3-rule dealiasing.
//!
//! Convention: `u(x) = Σ_k û_k e^{ik·x}`, so that
//! `∫|u|² = (2π)^d Σ_k |û_k|²`.

pub(crate) mod field;
mod grid;
pub(crate) mod ops;

pub use field::{PhysicalField, VectorField};
pub use grid::{make_grid, SpectralGrid};
pub use ops::{
    curl, dealias, differentiate, divergence, gradient, helmholtz_apply, helmholtz_solve,
    inner, laplacian, leray_project, resample, DerivativeKind,
};
