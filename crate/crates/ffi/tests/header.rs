//! The generated header declares every exported symbol and a C program
//! linked against the shared library can drive a full session.

use std::path::{Path, PathBuf};
use std::process::Command;

const EXPORTS: &[&str] = &[
    "gbc_last_error",
    "gbc_version",
    "gbc_session_from_csv_path",
    "gbc_session_from_csv_text",
    "gbc_session_from_arrays",
    "gbc_session_free",
    "gbc_session_shape",
    "gbc_session_patch_config",
    "gbc_session_config_json",
    "gbc_string_free",
    "gbc_session_attribute_order",
    "gbc_session_sample_points",
    "gbc_session_sample_colors",
    "gbc_session_render_map",
    "gbc_session_write_outputs",
    "gbc_disc_to_rgb",
];

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/gbc_chroma.h")
}

#[test]
fn header_declares_exports() {
    let text = std::fs::read_to_string(header()).unwrap();
    assert!(text.contains("typedef struct GbcSession GbcSession;"));
    assert!(text.contains("GBC_STATUS_BUFFER_TOO_SMALL = 8"));
    for name in EXPORTS {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "gbc_chroma.h"

int main(void) {
    const char *csv = "x,y,a,b,c\n0,0,1,0,0\n1,0,0,1,0\n0,1,0,0,1\n1,1,1,1,1\n0.3,0.6,0.2,0.7,0.1\n";
    GbcSession *s = NULL;
    if (gbc_session_from_csv_text(csv, &s) != GBC_STATUS_OK) return 1;
    if (gbc_session_patch_config(s, "{\"grid\": [8, 8], \"kernel\": {\"k_neighbors\": 3}}") != GBC_STATUS_OK) return 2;
    size_t len = 0, w = 0, h = 0;
    if (gbc_session_render_map(s, NULL, &len, &w, &h) != GBC_STATUS_OK || len != 8 * 8 * 3) return 3;
    unsigned char rgb[3];
    if (gbc_session_sample_colors(s, NULL, &len) != GBC_STATUS_OK || len != 15) return 4;
    if (gbc_session_patch_config(s, "{\"shrink\": 2}") != GBC_STATUS_INVALID_CONFIG) return 5;
    if (strlen(gbc_last_error()) == 0) return 6;
    gbc_session_free(s);
    if (gbc_disc_to_rgb(0.0, 0.0, 0.65, rgb) != GBC_STATUS_OK || rgb[0] != 166) return 7;
    printf("ok %s\n", gbc_version());
    return 0;
}
"#;

fn shared_library() -> Option<PathBuf> {
    // target/<profile>/deps/<test-binary>
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join(format!(
        "{}gbc_chroma_ffi{}",
        std::env::consts::DLL_PREFIX,
        std::env::consts::DLL_SUFFIX
    ));
    lib.is_file().then_some(lib)
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = shared_library() else {
        eprintln!("skipping: shared library not built next to the test binary");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let lib_dir = lib.parent().unwrap();
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg("-L")
        .arg(lib_dir)
        .arg("-lgbc_chroma_ffi")
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
