//! Compiles a small C program against the generated header and the static
//! library, then runs it. Skipped when no C compiler is on the path.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "s4gauss.h"

int main(void) {
    S4Analysis *h = NULL;
    if (s4_analysis_from_config_text("[immersion] kind=clifford_torus [grid] nx=16 ny=16", &h) != S4_STATUS_OK) {
        fprintf(stderr, "%s\n", s4_last_error_message());
        return 1;
    }
    double row[S4_FIELD_COLUMNS];
    if (s4_analysis_field_row(h, 0, row) != S4_STATUS_OK) return 2;
    S4EnergySummary e;
    if (s4_analysis_energy(h, &e) != S4_STATUS_OK) return 3;
    S4Verdict v;
    if (s4_analysis_verdict(h, 1e-6, &v) != S4_STATUS_OK) return 4;
    if (s4_analysis_from_config_text("[immersion] kind=nope", &h) != S4_STATUS_CONFIG_ERROR) return 5;
    printf("u=%.15f E=%.6f harmonic=%d\n", row[2], e.energy, v.harmonic_by_m && v.harmonic_by_grad_h);
    s4_analysis_free(h);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // .../target/<profile>/deps/c_program-xxxx -> .../target/<profile>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn compiler() -> Option<&'static str> {
    ["cc", "gcc", "clang"].into_iter().find(|c| {
        Command::new(c)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success())
    })
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let lib = target_dir().join("libs4gauss_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = dir.path().join("main");
    let out = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "compile failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(
        run.status.success(),
        "exit {:?}: {}",
        run.status,
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(
        stdout.starts_with("u=-0.693147180559945 E=39.478418 harmonic=1"),
        "{stdout}"
    );
}
