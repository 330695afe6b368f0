use std::ffi::{CStr, CString};
use std::ptr;

use secondgrade_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sg_last_error_message()) }.to_string_lossy().into_owned()
}

fn grid(dim: usize, n: usize) -> *mut SgGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { sg_grid_new(dim, n, &mut g) }, SgStatus::Ok);
    g
}

#[test]
fn taylor_green_decays_exactly() {
    unsafe {
        let g = grid(2, 16);
        let mut u = ptr::null_mut();
        assert_eq!(sg_field_taylor_green(g, 1.0, &mut u), SgStatus::Ok);
        let params = sg_solver_params_default(0.1, 0.1, 1e-2, 1.0);
        let mut sim = ptr::null_mut();
        assert_eq!(sg_simulation_new(u, &params, &mut sim), SgStatus::Ok);
        assert_eq!(sg_simulation_advance(sim, 20), SgStatus::Ok);
        assert!((sg_simulation_time(sim) - 0.2).abs() < 1e-12);
        let mut v = ptr::null_mut();
        assert_eq!(sg_simulation_velocity(sim, &mut v), SgStatus::Ok);
        let (mut n0, mut n1) = (SgNorms::default(), SgNorms::default());
        sg_field_norms(u, &mut n0);
        sg_field_norms(v, &mut n1);
        let rate = 2.0 * 0.1 / 1.2;
        assert!((n1.l2 / n0.l2 - (-rate * 0.2f64).exp()).abs() < 1e-12);
        assert!(sg_simulation_dissipation(sim) > 0.0);
        sg_field_free(v);
        sg_simulation_free(sim);
        sg_field_free(u);
        sg_grid_free(g);
    }
}

#[test]
fn physical_round_trip_and_size_checks() {
    unsafe {
        let g = grid(3, 8);
        let mut u = ptr::null_mut();
        assert_eq!(sg_field_random(g, 4, -2.0, 2, 1.5, &mut u), SgStatus::Ok);
        assert_eq!(sg_field_ncomp(u), 3);
        let len = 3 * sg_grid_len(g);
        let mut buf = vec![0.0; len];
        assert_eq!(sg_field_to_physical(u, buf.as_mut_ptr(), len), SgStatus::Ok);
        let mut w = ptr::null_mut();
        assert_eq!(sg_field_from_physical(g, buf.as_ptr(), len, &mut w), SgStatus::Ok);
        let (mut a, mut b) = (SgNorms::default(), SgNorms::default());
        sg_field_norms(u, &mut a);
        sg_field_norms(w, &mut b);
        assert!((a.l2 - 1.5).abs() < 1e-12 && (a.l2 - b.l2).abs() < 1e-12);
        assert_eq!(sg_field_to_physical(u, buf.as_mut_ptr(), len - 1), SgStatus::InvalidArgument);
        assert!(last_error().contains("size mismatch"));
        sg_field_free(w);
        sg_field_free(u);
        sg_grid_free(g);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(sg_grid_new(4, 16, &mut g), SgStatus::InvalidArgument);
        assert!(g.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(sg_grid_new(2, 16, ptr::null_mut()), SgStatus::NullPointer);
        let mut u = ptr::null_mut();
        assert_eq!(sg_field_taylor_green(ptr::null(), 1.0, &mut u), SgStatus::NullPointer);
        let g = grid(2, 16);
        assert_eq!(sg_field_random(g, 1, -2.0, 99, 1.0, &mut u), SgStatus::InvalidArgument);
        // zero field: Lemma 1 ratio is undefined, the time bound unbounded
        assert_eq!(sg_field_random(g, 1, -2.0, 3, 0.0, &mut u), SgStatus::Ok);
        let mut r = 0.0;
        assert_eq!(sg_lemma1_ratio(u, 0.1, &mut r), SgStatus::InvalidArgument);
        assert_eq!(sg_local_time_bound(u, 0.1, 0.1, 1.0, &mut r), SgStatus::Ok);
        assert_eq!(r, f64::INFINITY);
        assert_eq!(sg_local_time_bound(u, 0.1, 0.1, 1.0, &mut r), SgStatus::Ok);
        assert!(last_error().is_empty());
        let mut params = sg_solver_params_default(0.1, 0.1, 0.0, 1.0);
        let mut sim = ptr::null_mut();
        assert_eq!(sg_simulation_new(u, &params, &mut sim), SgStatus::InvalidArgument);
        params.dt = 1e-2;
        params.alpha = 2.0;
        assert_eq!(sg_simulation_new(u, &params, &mut sim), SgStatus::InvalidArgument);
        assert!(sim.is_null());
        assert!(sg_simulation_time(ptr::null()).is_nan());
        sg_field_free(u);
        sg_grid_free(g);
        sg_field_free(ptr::null_mut());
    }
}

#[test]
fn blow_up_keeps_last_state() {
    unsafe {
        let g = grid(2, 32);
        let mut u = ptr::null_mut();
        assert_eq!(sg_field_random(g, 4, 0.0, 10, 2000.0, &mut u), SgStatus::Ok);
        let params = sg_solver_params_default(0.0, 1e-3, 0.1, 20.0);
        let mut sim = ptr::null_mut();
        assert_eq!(sg_simulation_new(u, &params, &mut sim), SgStatus::Ok);
        assert_eq!(sg_simulation_advance(sim, 200), SgStatus::BlowUp);
        assert!(last_error().contains("blew up"));
        let t = sg_simulation_time(sim);
        assert!(t.is_finite() && t < 20.0);
        let mut v = ptr::null_mut();
        assert_eq!(sg_simulation_velocity(sim, &mut v), SgStatus::Ok);
        sg_field_free(v);
        sg_simulation_free(sim);
        sg_field_free(u);
        sg_grid_free(g);
    }
}

#[test]
fn checkpoints_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("u.g2ck").to_str().unwrap()).unwrap();
    unsafe {
        let g = grid(2, 16);
        let mut u = ptr::null_mut();
        sg_field_random(g, 8, -1.0, 4, 3.0, &mut u);
        let params = sg_solver_params_default(0.2, 0.1, 1e-2, 1.0);
        let mut sim = ptr::null_mut();
        sg_simulation_new(u, &params, &mut sim);
        sg_simulation_advance(sim, 5);
        assert_eq!(sg_simulation_save(sim, path.as_ptr()), SgStatus::Ok);
        let mut w = ptr::null_mut();
        let mut h = SgCheckpointHeader::default();
        assert_eq!(sg_checkpoint_load(path.as_ptr(), &mut w, &mut h), SgStatus::Ok);
        assert_eq!((h.version, h.dim, h.n), (1, 2, 16));
        assert_eq!((h.alpha, h.nu), (0.2, 0.1));
        assert!((h.time - 0.05).abs() < 1e-12);
        let mut v = ptr::null_mut();
        sg_simulation_velocity(sim, &mut v);
        let len = 2 * sg_grid_len(g);
        let (mut a, mut b) = (vec![0.0; len], vec![0.0; len]);
        sg_field_to_physical(v, a.as_mut_ptr(), len);
        sg_field_to_physical(w, b.as_mut_ptr(), len);
        assert_eq!(a, b);

        let missing = CString::new(dir.path().join("none.g2ck").to_str().unwrap()).unwrap();
        assert_eq!(sg_checkpoint_load(missing.as_ptr(), &mut w, ptr::null_mut()), SgStatus::Io);
        let bytes = std::fs::read(dir.path().join("u.g2ck")).unwrap();
        std::fs::write(dir.path().join("u.g2ck"), &bytes[..100]).unwrap();
        let mut x = ptr::null_mut();
        assert_eq!(sg_checkpoint_load(path.as_ptr(), &mut x, ptr::null_mut()), SgStatus::Checkpoint);
        assert!(last_error().contains("truncated at byte 100"));
        for f in [u, v, w] {
            sg_field_free(f);
        }
        sg_simulation_free(sim);
        sg_grid_free(g);
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(sg_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
