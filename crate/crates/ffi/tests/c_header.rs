//! Compiles and runs a small C program against the generated header and the
//! static library. Skipped when no C compiler is on the path.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "secondgrade.h"

int main(void) {
    SgGrid *g = NULL;
    SgField *u = NULL;
    SgSimulation *sim = NULL;
    if (sg_grid_new(2, 16, &g) != SG_STATUS_OK) return 1;
    if (sg_field_taylor_green(g, 1.0, &u) != SG_STATUS_OK) return 2;
    SgSolverParams p = sg_solver_params_default(0.1, 0.1, 0.01, 1.0);
    if (sg_simulation_new(u, &p, &sim) != SG_STATUS_OK) return 3;
    if (sg_simulation_advance(sim, 10) != SG_STATUS_OK) return 4;
    if (fabs(sg_simulation_time(sim) - 0.1) > 1e-12) return 5;
    if (sg_grid_new(2, 16, NULL) != SG_STATUS_NULL_POINTER) return 6;
    printf("%s\n", sg_last_error_message());
    sg_simulation_free(sim);
    sg_field_free(u);
    sg_grid_free(g);
    return 0;
}
"#;

fn find_staticlib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let deps = exe.parent()?;
    [deps.parent()?, deps]
        .iter()
        .map(|d| d.join("libsecondgrade_ffi.a"))
        .find(|p| p.exists())
}

fn have(cmd: &str) -> bool {
    Command::new(cmd).arg("--version").output().is_ok()
}

#[test]
fn header_compiles_and_links() {
    if !have("cc") {
        eprintln!("no C compiler; skipping");
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(&src, PROGRAM).unwrap();

    let st = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(st.success(), "header does not compile");

    let Some(lib) = find_staticlib() else {
        eprintln!("static library not found next to the test binary; link step skipped");
        return;
    };
    let exe = dir.path().join("smoke");
    let st = Command::new("cc")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(st.success(), "link failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C smoke program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("null"));
}
