mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use common::decode_png;
use gbc_chroma::data::load_table;
use gbc_chroma::{Pipeline, SessionConfig, WarpKind};

const BIN: &str = env!("CARGO_BIN_EXE_gbc-chroma");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn synth(dir: &Path, m: usize, n: usize) -> String {
    let path = dir.join("synth.csv");
    let p = path.to_str().unwrap();
    let out = run(&["synth", "--m", &m.to_string(), "--n", &n.to_string(), "--seed", "3", "--out", p]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    p.to_owned()
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn synth_writes_requested_shape() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synth(dir.path(), 120, 5);
    let table = load_table(&csv).unwrap();
    assert_eq!((table.n_samples(), table.n_attributes()), (120, 5));
}

#[test]
fn render_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synth(dir.path(), 80, 6);
    let out_dir = dir.path().join("out");
    let out = run(&["render", "--input", &csv, "--mode", "contrast", "--grid", "40x30", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let table = load_table(&csv).unwrap();
    let mut expected: Vec<String> = vec!["layout.json".into(), "legend.png".into(), "map.png".into()];
    expected.extend(table.attribute_names().iter().map(|n| format!("attr_{n}.png")));
    expected.sort();
    let names: Vec<String> = dir_contents(&out_dir).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, expected);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), expected.len());

    let (w, h, _) = decode_png(&std::fs::read(out_dir.join("map.png")).unwrap());
    assert_eq!((w, h), (40, 30));
    let layout: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("layout.json")).unwrap()).unwrap();
    assert_eq!(layout["order"].as_array().unwrap().len(), 6);
    assert_eq!(layout["points"].as_array().unwrap().len(), 80);
}

#[test]
fn cli_map_matches_library_render() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synth(dir.path(), 60, 4);
    let out_dir = dir.path().join("out");
    let args = ["render", "--input", &csv, "--mode", "compress", "--grid", "32x24", "--lightness", "0.6", "--intensity"];
    let out = Command::new(BIN).args(args).args(["--out", out_dir.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    let cfg = SessionConfig {
        warp_mode: WarpKind::ComparisonCompression,
        grid: (32, 24),
        lightness: 0.6,
        intensity_on: true,
        ..Default::default()
    };
    let png = Pipeline::new(load_table(&csv).unwrap()).map(&cfg).unwrap().png.clone();
    assert_eq!(std::fs::read(out_dir.join("map.png")).unwrap(), png);
}

#[test]
fn seeded_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let csv = synth(dir.path(), 150, 5);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = run(&["render", "--input", &csv, "--grid", "64x64", "--seeded", "--out", d.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let c = dir.path().join("c");
    assert!(run(&["render", "--input", &csv, "--grid", "64x64", "--out", c.to_str().unwrap()]).status.success());
    assert_eq!(dir_contents(&a), dir_contents(&b));
    assert_eq!(dir_contents(&a), dir_contents(&c));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["render", "--input", "/no/such/file.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,y,a,b,c\n0,0,1,2,three\n").unwrap();
    assert_eq!(run(&["render", "--input", bad.to_str().unwrap()]).status.code(), Some(2));

    let csv = synth(dir.path(), 30, 3);
    assert_eq!(run(&["render", "--input", &csv, "--lightness", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["render", "--input", &csv, "--mode", "sideways"]).status.code(), Some(2));
    assert_eq!(run(&["render", "--input", &csv, "--grid", "0x10"]).status.code(), Some(2));

    // Output "directory" is an existing file.
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let out = run(&["render", "--input", &csv, "--grid", "16x16", "--out", blocker.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let out = run(&["synth", "--m", "30", "--n", "3", "--out", blocker.join("x.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(run(&["synth", "--m", "30", "--n", "2", "--out", "x.csv"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

fn free_port() -> u16 {
    std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

#[test]
fn serve_honours_port_env() {
    let port = free_port();
    let mut child = Command::new(BIN)
        .args(["serve", "--port", "1"])
        .env("GBC_CHROMA_PORT", port.to_string())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.as_mut().unwrap()).read_line(&mut line).unwrap();
    assert!(line.contains(&format!(":{port}")), "{line}");

    let csv = "x,y,a,b,c\n0,0,1,0,0\n1,0,0,1,0\n0,1,0,0,1\n";
    let mut stream = TcpStream::connect(("127.0.0.1", port)).unwrap();
    write!(
        stream,
        "POST /api/v1/sessions HTTP/1.1\r\nHost: localhost\r\nContent-Type: text/csv\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{csv}",
        csv.len()
    )
    .unwrap();
    let mut resp = String::new();
    stream.read_to_string(&mut resp).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(resp.starts_with("HTTP/1.1 201"), "{resp}");
    assert!(resp.contains("\"m\":3"));
}
