//! C ABI over the solver. Grids, fields and simulations are opaque handles
//! created and freed through this interface; every fallible call returns an
//! [`SgStatus`] and leaves a message for [`sg_last_error_message`].
//!
//! Handles are not synchronized: one handle must not be used from two
//! threads at once. Distinct handles are independent.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use secondgrade::diagnostics::{lemma1_ratio, local_time_bound};
use secondgrade::dynamics::{checkpoint, Formulation, Integrator, Solver, SolverParams};
use secondgrade::fields::{norm_report, random_divfree_field, taylor_green, RandomFieldSpec};
use secondgrade::spectral::{make_grid, PhysicalField, SpectralGrid, VectorField};
use secondgrade::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidData = 3,
    BlowUp = 4,
    Checkpoint = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SgFormulation {
    Velocity = 0,
    Curl = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SgIntegrator {
    IfRk4 = 0,
    ImexEuler = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SgSolverParams {
    pub alpha: f64,
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub formulation: SgFormulation,
    pub integrator: SgIntegrator,
    pub cfl_limit: f64,
    pub sample_every: usize,
}

/// Norms in the integral convention; `grad_l6` is `‖∇u‖_{L⁶}` and `lip` is
/// the largest pointwise Frobenius norm of `∇u`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SgNorms {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub l3: f64,
    pub grad_l6: f64,
    pub lip: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SgCheckpointHeader {
    pub version: u32,
    pub dim: u32,
    pub n: u32,
    pub alpha: f64,
    pub nu: f64,
    pub time: f64,
}

pub struct SgGrid(Arc<SpectralGrid>);

pub struct SgField(VectorField);

pub struct SgSimulation(Solver);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    // interior NULs cannot cross the C boundary
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(SgStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::BlowUp(_) => SgStatus::BlowUp,
            Error::Truncated(_) | Error::Checkpoint(_) => SgStatus::Checkpoint,
            Error::Io(_) => SgStatus::Io,
            Error::InvalidInitialData(_) => SgStatus::InvalidData,
            _ => SgStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SgStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SgStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            SgStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| Fail(SgStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

impl From<&SgSolverParams> for SolverParams {
    fn from(p: &SgSolverParams) -> Self {
        let mut s = SolverParams::new(p.alpha, p.nu, p.dt, p.t_end)
            .with_formulation(match p.formulation {
                SgFormulation::Velocity => Formulation::Velocity,
                SgFormulation::Curl => Formulation::Curl,
            })
            .with_integrator(match p.integrator {
                SgIntegrator::IfRk4 => Integrator::IfRk4,
                SgIntegrator::ImexEuler => Integrator::ImexEuler,
            })
            .with_sample_every(p.sample_every);
        s.cfl_limit = p.cfl_limit;
        s
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn sg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parameters with the library defaults for everything but the four given.
#[no_mangle]
pub extern "C" fn sg_solver_params_default(alpha: f64, nu: f64, dt: f64, t_end: f64) -> SgSolverParams {
    let p = SolverParams::new(alpha, nu, dt, t_end);
    SgSolverParams {
        alpha,
        nu,
        dt,
        t_end,
        formulation: SgFormulation::Velocity,
        integrator: SgIntegrator::IfRk4,
        cfl_limit: p.cfl_limit,
        sample_every: p.sample_every,
    }
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_grid_new(dim: usize, n: usize, out: *mut *mut SgGrid) -> SgStatus {
    guard(|| write_out(out, SgGrid(make_grid(dim, n)?)))
}

/// Collocation points (and Fourier modes) per component.
///
/// # Safety
/// `grid` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn sg_grid_len(grid: *const SgGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// # Safety
/// `grid` must be null or a handle from [`sg_grid_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_grid_free(grid: *mut SgGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// # Safety
/// `grid` must be a live grid handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_field_taylor_green(grid: *const SgGrid, amplitude: f64, out: *mut *mut SgField) -> SgStatus {
    guard(|| {
        let g = as_ref(grid, "grid")?;
        if !amplitude.is_finite() {
            return Err(Fail(SgStatus::InvalidArgument, "amplitude must be finite".into()));
        }
        write_out(out, SgField(taylor_green(&g.0, amplitude)))
    })
}

/// Seeded random divergence-free field with `‖u‖_{L²} = amplitude`.
///
/// # Safety
/// `grid` must be a live grid handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_field_random(
    grid: *const SgGrid,
    seed: u64,
    spectrum_slope: f64,
    k_max: u32,
    amplitude: f64,
    out: *mut *mut SgField,
) -> SgStatus {
    guard(|| {
        let g = as_ref(grid, "grid")?;
        let spec = RandomFieldSpec {
            seed,
            spectrum_slope,
            k_max,
            amplitude,
        };
        write_out(out, SgField(random_divfree_field(&g.0, &spec)?))
    })
}

/// Builds a field from physical samples laid out component-major, each
/// component in the grid's row-major point order.
///
/// # Safety
/// `grid` must be a live grid handle, `data` must point to `len` readable
/// doubles and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_field_from_physical(
    grid: *const SgGrid,
    data: *const f64,
    len: usize,
    out: *mut *mut SgField,
) -> SgStatus {
    guard(|| {
        let g = &as_ref(grid, "grid")?.0;
        if data.is_null() {
            return Err(null("data"));
        }
        let per = g.len();
        if len != g.dim() * per {
            return Err(Error::SizeMismatch { expected: g.dim() * per, got: len }.into());
        }
        let s = std::slice::from_raw_parts(data, len);
        let comps = s.chunks(per).map(|c| c.to_vec()).collect();
        write_out(out, SgField(PhysicalField::from_components(g, comps)?.to_spectral()))
    })
}

/// # Safety
/// `field` must be null or a live field handle.
#[no_mangle]
pub unsafe extern "C" fn sg_field_ncomp(field: *const SgField) -> usize {
    field.as_ref().map_or(0, |f| f.0.ncomp())
}

/// Writes the physical samples (same layout as [`sg_field_from_physical`]).
///
/// # Safety
/// `field` must be a live field handle and `buf` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sg_field_to_physical(field: *const SgField, buf: *mut f64, len: usize) -> SgStatus {
    guard(|| {
        let f = &as_ref(field, "field")?.0;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        let per = f.grid().len();
        if len != f.ncomp() * per {
            return Err(Error::SizeMismatch { expected: f.ncomp() * per, got: len }.into());
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        let p = f.to_physical();
        for (c, chunk) in out.chunks_mut(per).enumerate() {
            chunk.copy_from_slice(p.component(c));
        }
        Ok(())
    })
}

/// # Safety
/// `field` must be a live field handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_field_norms(field: *const SgField, out: *mut SgNorms) -> SgStatus {
    guard(|| {
        let f = &as_ref(field, "field")?.0;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let n = norm_report(f);
        *out = SgNorms {
            l2: n.l2,
            h1: n.h1,
            h2: n.h2,
            h3: n.h3,
            l3: n.l3,
            grad_l6: n.l6,
            lip: n.lip,
        };
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_field_free(field: *mut SgField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be a live field handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_lemma1_ratio(field: *const SgField, alpha: f64, out: *mut f64) -> SgStatus {
    guard(|| {
        let f = &as_ref(field, "field")?.0;
        let r = lemma1_ratio(f, alpha)?;
        *out.as_mut().ok_or_else(|| null("output pointer"))? = r;
        Ok(())
    })
}

/// Local existence time `ν³/(K(‖u₀‖_{H¹} + √α‖u₀‖_{H²})⁴)`; infinite for
/// the zero field.
///
/// # Safety
/// `field` must be a live field handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_local_time_bound(field: *const SgField, alpha: f64, nu: f64, k: f64, out: *mut f64) -> SgStatus {
    guard(|| {
        let f = &as_ref(field, "field")?.0;
        if !(nu > 0.0 && k > 0.0) {
            return Err(Fail(SgStatus::InvalidArgument, "nu and k must be positive".into()));
        }
        let t = local_time_bound(f, alpha, nu, k)?;
        *out.as_mut().ok_or_else(|| null("output pointer"))? = t;
        Ok(())
    })
}

/// Starts a simulation from `initial` (copied; the caller keeps ownership).
///
/// # Safety
/// `initial` and `params` must be valid and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_simulation_new(
    initial: *const SgField,
    params: *const SgSolverParams,
    out: *mut *mut SgSimulation,
) -> SgStatus {
    guard(|| {
        let u0 = &as_ref(initial, "initial field")?.0;
        let p = SolverParams::from(as_ref(params, "params")?);
        write_out(out, SgSimulation(Solver::new(u0, &p)?))
    })
}

/// Advances `steps` time steps. On [`SgStatus::BlowUp`] the simulation keeps
/// the last finite state.
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn sg_simulation_advance(sim: *mut SgSimulation, steps: u64) -> SgStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("simulation"))?;
        s.0.advance(steps)?;
        Ok(())
    })
}

/// Current time, or NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn sg_simulation_time(sim: *const SgSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.0.state().time)
}

/// `2ν∫₀ᵗ‖∇u‖²` so far, or NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn sg_simulation_dissipation(sim: *const SgSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.0.dissipation_integral())
}

/// Copies the current velocity into a new field handle.
///
/// # Safety
/// `sim` must be a live simulation handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_simulation_velocity(sim: *const SgSimulation, out: *mut *mut SgField) -> SgStatus {
    guard(|| {
        let s = &as_ref(sim, "simulation")?.0;
        write_out(out, SgField(s.state().velocity().clone()))
    })
}

/// # Safety
/// `sim` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_simulation_free(sim: *mut SgSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Writes the current velocity, α, ν and time as a checkpoint.
///
/// # Safety
/// `sim` must be a live simulation handle and `path` a NUL-terminated
/// UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn sg_simulation_save(sim: *const SgSimulation, path: *const c_char) -> SgStatus {
    guard(|| {
        let s = &as_ref(sim, "simulation")?.0;
        let p = s.params();
        checkpoint::save(path_arg(path)?, s.state().velocity(), p.alpha, p.nu, s.state().time)?;
        Ok(())
    })
}

/// # Safety
/// `field` must be a live field handle and `path` a NUL-terminated UTF-8
/// string.
#[no_mangle]
pub unsafe extern "C" fn sg_checkpoint_save(
    field: *const SgField,
    path: *const c_char,
    alpha: f64,
    nu: f64,
    time: f64,
) -> SgStatus {
    guard(|| {
        let f = &as_ref(field, "field")?.0;
        checkpoint::save(path_arg(path)?, f, alpha, nu, time)?;
        Ok(())
    })
}

/// Loads a checkpoint; `header` may be null.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string, `out` valid for writes
/// and `header` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_checkpoint_load(
    path: *const c_char,
    out: *mut *mut SgField,
    header: *mut SgCheckpointHeader,
) -> SgStatus {
    guard(|| {
        let c = checkpoint::load(path_arg(path)?)?;
        if let Some(h) = header.as_mut() {
            *h = SgCheckpointHeader {
                version: c.header.version,
                dim: c.header.dim,
                n: c.header.n,
                alpha: c.header.alpha,
                nu: c.header.nu,
                time: c.header.time,
            };
        }
        write_out(out, SgField(c.u))
    })
}
