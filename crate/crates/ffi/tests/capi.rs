use std::ffi::{CStr, CString};
use std::ptr;

use gbc_chroma_ffi::*;

const CSV: &str = "x,y,a,b,c,d\n0,0,1,0,0,0\n1,0,0,1,0,0\n1,1,0,0,1,0\n0,1,0,0,0,1\n0.5,0.5,1,1,1,1\n0.2,0.7,0.3,0.1,0.9,0.2\n0.8,0.3,0.6,0.2,0.1,0.7\n0.4,0.1,0.2,0.8,0.4,0.3\n0.6,0.9,0.9,0.5,0.3,0.1\n0.1,0.4,0.1,0.3,0.6,0.9\n";

fn session() -> *mut GbcSession {
    let csv = CString::new(CSV).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gbc_session_from_csv_text(csv.as_ptr(), &mut s) }, GbcStatus::Ok);
    assert!(!s.is_null());
    s
}

fn last_error() -> String {
    let p = gbc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn patch(s: *mut GbcSession, json: &str) -> GbcStatus {
    let json = CString::new(json).unwrap();
    unsafe { gbc_session_patch_config(s, json.as_ptr()) }
}

#[test]
fn shape_and_order() {
    let s = session();
    let (mut m, mut n) = (0, 0);
    assert_eq!(unsafe { gbc_session_shape(s, &mut m, &mut n) }, GbcStatus::Ok);
    assert_eq!((m, n), (10, 4));

    let mut len = 0;
    assert_eq!(unsafe { gbc_session_attribute_order(s, ptr::null_mut(), &mut len) }, GbcStatus::Ok);
    assert_eq!(len, 4);
    let mut order = vec![0usize; len];
    assert_eq!(unsafe { gbc_session_attribute_order(s, order.as_mut_ptr(), &mut len) }, GbcStatus::Ok);
    let mut sorted = order.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, [0, 1, 2, 3]);
    assert_eq!(order[0], 0);
    unsafe { gbc_session_free(s) };
}

#[test]
fn buffers_report_size_and_reject_short() {
    let s = session();
    let mut len = 5;
    let mut buf = [0.0f64; 5];
    assert_eq!(unsafe { gbc_session_sample_points(s, buf.as_mut_ptr(), &mut len) }, GbcStatus::BufferTooSmall);
    assert_eq!(len, 20);
    assert!(last_error().contains("need 20"));

    let mut points = vec![0.0f64; len];
    assert_eq!(unsafe { gbc_session_sample_points(s, points.as_mut_ptr(), &mut len) }, GbcStatus::Ok);
    for p in points.chunks_exact(2) {
        assert!(p[0].hypot(p[1]) <= 1.0 + 1e-12);
    }
    // The balanced sample sits at the white point.
    assert!(points[8].abs() < 1e-12 && points[9].abs() < 1e-12);
    unsafe { gbc_session_free(s) };
}

#[test]
fn colors_and_map_match_core() {
    let s = session();
    assert_eq!(patch(s, r#"{"grid": [24, 16]}"#), GbcStatus::Ok);
    let mut len = 0;
    assert_eq!(unsafe { gbc_session_sample_colors(s, ptr::null_mut(), &mut len) }, GbcStatus::Ok);
    let mut rgb = vec![0u8; len];
    assert_eq!(unsafe { gbc_session_sample_colors(s, rgb.as_mut_ptr(), &mut len) }, GbcStatus::Ok);
    assert_eq!(&rgb[12..15], &[166, 166, 166]);

    let (mut w, mut h, mut len) = (0, 0, 0);
    assert_eq!(unsafe { gbc_session_render_map(s, ptr::null_mut(), &mut len, &mut w, &mut h) }, GbcStatus::Ok);
    assert_eq!((w, h, len), (24, 16, 24 * 16 * 3));
    let mut pixels = vec![0u8; len];
    assert_eq!(unsafe { gbc_session_render_map(s, pixels.as_mut_ptr(), &mut len, &mut w, &mut h) }, GbcStatus::Ok);

    let table = gbc_chroma::DataTable::from_csv_str(CSV).unwrap();
    let cfg = gbc_chroma::SessionConfig { grid: (24, 16), ..Default::default() };
    let expected = gbc_chroma::Pipeline::new(table).map(&cfg).unwrap().field.to_rgb_bytes();
    assert_eq!(pixels, expected);
    unsafe { gbc_session_free(s) };
}

#[test]
fn config_patch_round_trip_and_errors() {
    let s = session();
    assert_eq!(patch(s, r#"{"warp_mode": "comparison_compression", "shrink": 0.5}"#), GbcStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { gbc_session_config_json(s, &mut json) }, GbcStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { gbc_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["warp_mode"], "comparison_compression");
    assert_eq!(v["shrink"], 0.5);

    assert_eq!(patch(s, r#"{"shrink": 0}"#), GbcStatus::InvalidConfig);
    assert_eq!(patch(s, "{not json"), GbcStatus::InvalidArgument);
    assert_eq!(patch(s, r#"{"no_such_field": 1}"#), GbcStatus::InvalidArgument);
    // Failed patches leave the config alone.
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { gbc_session_config_json(s, &mut json) }, GbcStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(json) }.to_str().unwrap(), text);
    unsafe { gbc_string_free(json) };
    unsafe { gbc_session_free(s) };
}

#[test]
fn from_arrays_matches_csv() {
    let names: Vec<CString> = ["a", "b", "c"].iter().map(|n| CString::new(*n).unwrap()).collect();
    let name_ptrs: Vec<_> = names.iter().map(|n| n.as_ptr()).collect();
    let locations = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
    let values = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    let mut s = ptr::null_mut();
    let status =
        unsafe { gbc_session_from_arrays(name_ptrs.as_ptr(), 3, locations.as_ptr(), values.as_ptr(), 3, &mut s) };
    assert_eq!(status, GbcStatus::Ok);
    let mut len = 6;
    let mut pts = [0.0; 6];
    assert_eq!(unsafe { gbc_session_sample_points(s, pts.as_mut_ptr(), &mut len) }, GbcStatus::Ok);
    for p in pts.chunks_exact(2) {
        assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
    }
    unsafe { gbc_session_free(s) };

    let mut s = ptr::null_mut();
    let status =
        unsafe { gbc_session_from_arrays(name_ptrs.as_ptr(), 2, locations.as_ptr(), values.as_ptr(), 3, &mut s) };
    assert_eq!(status, GbcStatus::InvalidData);
    assert!(s.is_null());
}

#[test]
fn errors_are_reported() {
    let mut s = ptr::null_mut();
    let missing = CString::new("/definitely/not/here.csv").unwrap();
    assert_eq!(unsafe { gbc_session_from_csv_path(missing.as_ptr(), &mut s) }, GbcStatus::Io);
    assert!(!last_error().is_empty());

    let bad = CString::new("x,y,a,b,c\n0,0,1,oops,3\n").unwrap();
    assert_eq!(unsafe { gbc_session_from_csv_text(bad.as_ptr(), &mut s) }, GbcStatus::InvalidData);
    assert!(last_error().contains("oops") || last_error().contains("numeric"));

    assert_eq!(unsafe { gbc_session_from_csv_text(ptr::null(), &mut s) }, GbcStatus::NullPointer);
    let (mut m, mut n) = (0, 0);
    assert_eq!(unsafe { gbc_session_shape(ptr::null(), &mut m, &mut n) }, GbcStatus::NullPointer);
    unsafe { gbc_session_free(ptr::null_mut()) };
    unsafe { gbc_string_free(ptr::null_mut()) };
}

#[test]
fn disc_to_rgb_primitives() {
    let mut rgb = [0u8; 3];
    assert_eq!(unsafe { gbc_disc_to_rgb(0.0, 0.0, 0.65, rgb.as_mut_ptr()) }, GbcStatus::Ok);
    assert_eq!(rgb, [166, 166, 166]);
    assert_eq!(unsafe { gbc_disc_to_rgb(1.0, 0.0, 0.5, rgb.as_mut_ptr()) }, GbcStatus::Ok);
    assert_eq!(rgb, [255, 0, 0]);
    assert_eq!(unsafe { gbc_disc_to_rgb(0.0, 0.0, 1.5, rgb.as_mut_ptr()) }, GbcStatus::InvalidArgument);
    let v = unsafe { CStr::from_ptr(gbc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn write_outputs_creates_files() {
    let s = session();
    assert_eq!(patch(s, r#"{"grid": [16, 16]}"#), GbcStatus::Ok);
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { gbc_session_write_outputs(s, out.as_ptr()) }, GbcStatus::Ok);
    for f in ["map.png", "legend.png", "attr_a.png", "attr_d.png", "layout.json"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    unsafe { gbc_session_free(s) };
}
