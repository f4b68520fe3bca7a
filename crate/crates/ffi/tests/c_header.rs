//! Compiles and runs a small C program against the generated header and
//! the static library produced by this crate.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "memchua.h"

int main(void) {
    double p[5];
    if (memchua_reference_coefficients(p) != MEMCHUA_STATUS_OK) return 10;
    MemchuaDesignSpec spec = memchua_design_spec_default();
    MemchuaCircuit *c = NULL;
    if (memchua_circuit_design(p, 1.2, 2.6, &spec, &c) != MEMCHUA_STATUS_OK) return 11;
    MemchuaComponents k;
    memchua_circuit_components(c, &k);
    if (fabs(k.r - 7643.0) / 7643.0 > 0.01) return 12;
    MemchuaEquilibrium eq[3];
    size_t n = 0;
    if (memchua_circuit_equilibria(c, eq, 3, &n) != MEMCHUA_STATUS_OK || n != 3) return 13;
    spec.v_eq = 1.5;
    MemchuaCircuit *bad = NULL;
    if (memchua_circuit_design(p, 1.2, 2.6, &spec, &bad) != MEMCHUA_STATUS_DESIGN_FAILED) return 14;
    printf("%s\n", memchua_last_error());
    memchua_circuit_free(c);
    return 0;
}
"#;

fn artifact_dir() -> PathBuf {
    // target/<profile>/deps/<test-binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let dir = artifact_dir();
    let lib = dir.join("libmemchua_ffi.a");
    assert!(lib.is_file(), "static library missing at {}", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("smoke.c");
    let bin = work.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();

    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler (cc) is required for this test");
    assert!(status.success(), "C compilation failed");

    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("safe-window"));
}
