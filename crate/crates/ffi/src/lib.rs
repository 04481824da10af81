//! C ABI over the `gbc-chroma` pipeline.
//!
//! Every fallible call returns a [`GbcStatus`]; on failure the message is
//! available from [`gbc_last_error`] on the same thread. Sessions are opaque
//! handles created by the `gbc_session_*` constructors and released with
//! [`gbc_session_free`]. Buffers are always caller-allocated; passing a null
//! buffer to a sized query reports the required length instead.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use gbc_chroma::colorspace::disc_to_hsl;
use gbc_chroma::config::PatchError;
use gbc_chroma::data::{load_table, DataError};
use gbc_chroma::{DataTable, Pipeline, PipelineError, SessionConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidData = 3,
    InvalidConfig = 4,
    NotFound = 5,
    Compute = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Dataset plus its current configuration.
pub struct GbcSession {
    pipeline: Pipeline,
    config: SessionConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(GbcStatus, String);

type FfiResult<T = ()> = Result<T, Failure>;

fn fail<T>(status: GbcStatus, msg: impl Into<String>) -> FfiResult<T> {
    Err(Failure(status, msg.into()))
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let status = match &e {
            PipelineError::Data(_) => GbcStatus::InvalidData,
            PipelineError::Config(_) => GbcStatus::InvalidConfig,
            PipelineError::UnknownAttribute(_) | PipelineError::UnknownSample(_) => GbcStatus::NotFound,
            e if e.is_io() => GbcStatus::Io,
            _ => GbcStatus::Compute,
        };
        Failure(status, e.to_string())
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        let status = if matches!(e, DataError::Io(_)) { GbcStatus::Io } else { GbcStatus::InvalidData };
        Failure(status, e.to_string())
    }
}

/// Runs `f`, recording any error or panic for [`gbc_last_error`].
fn guard(f: impl FnOnce() -> FfiResult) -> GbcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GbcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside gbc-chroma");
            GbcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return fail(GbcStatus::NullPointer, format!("{what} is null"));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(s),
        Err(_) => fail(GbcStatus::InvalidArgument, format!("{what} is not UTF-8")),
    }
}

unsafe fn session_ref<'a>(s: *const GbcSession) -> FfiResult<&'a GbcSession> {
    s.as_ref().map_or_else(|| fail(GbcStatus::NullPointer, "session is null"), Ok)
}

unsafe fn session_mut<'a>(s: *mut GbcSession) -> FfiResult<&'a mut GbcSession> {
    s.as_mut().map_or_else(|| fail(GbcStatus::NullPointer, "session is null"), Ok)
}

/// Copies `data` into `out` when it fits; `*len` always receives the
/// required element count.
unsafe fn fill<T: Copy>(data: &[T], out: *mut T, len: *mut usize) -> FfiResult {
    if len.is_null() {
        return fail(GbcStatus::NullPointer, "length pointer is null");
    }
    let capacity = *len;
    *len = data.len();
    if out.is_null() {
        return Ok(());
    }
    if capacity < data.len() {
        return fail(GbcStatus::BufferTooSmall, format!("buffer holds {capacity}, need {}", data.len()));
    }
    ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
    Ok(())
}

unsafe fn publish(table: DataTable, out: *mut *mut GbcSession) -> FfiResult {
    if out.is_null() {
        return fail(GbcStatus::NullPointer, "output handle is null");
    }
    let session = GbcSession { pipeline: Pipeline::new(table), config: SessionConfig::default() };
    *out = Box::into_raw(Box::new(session));
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn gbc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gbc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a CSV file (`x,y,<attr>...`) into a new session.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gbc_session_from_csv_path(path: *const c_char, out: *mut *mut GbcSession) -> GbcStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        publish(load_table(Path::new(path))?, out)
    })
}

/// Parses CSV text into a new session.
///
/// # Safety
/// `csv` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gbc_session_from_csv_text(csv: *const c_char, out: *mut *mut GbcSession) -> GbcStatus {
    guard(|| {
        let csv = str_arg(csv, "csv")?;
        publish(DataTable::from_csv_str(csv)?, out)
    })
}

/// Builds a session from `m` samples over `n` attributes. `locations` holds
/// `2m` values (x, y per sample), `values` holds `m * n` row-major values.
///
/// # Safety
/// `names` must point to `n` NUL-terminated strings and the arrays must have
/// the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gbc_session_from_arrays(
    names: *const *const c_char,
    n: usize,
    locations: *const f64,
    values: *const f64,
    m: usize,
    out: *mut *mut GbcSession,
) -> GbcStatus {
    guard(|| {
        if names.is_null() || locations.is_null() || values.is_null() {
            return fail(GbcStatus::NullPointer, "input array is null");
        }
        let Some(total) = m.checked_mul(n) else {
            return fail(GbcStatus::InvalidArgument, "m * n overflows");
        };
        let names = std::slice::from_raw_parts(names, n)
            .iter()
            .map(|&p| str_arg(p, "attribute name").map(str::to_owned))
            .collect::<FfiResult<Vec<_>>>()?;
        let locations = std::slice::from_raw_parts(locations, 2 * m).chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        let rows = if n == 0 {
            vec![Vec::new(); m]
        } else {
            std::slice::from_raw_parts(values, total).chunks_exact(n).map(<[f64]>::to_vec).collect()
        };
        publish(DataTable::new(names, locations, rows)?, out)
    })
}

/// Releases a session. Null is ignored.
///
/// # Safety
/// `session` must come from a `gbc_session_*` constructor and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn gbc_session_free(session: *mut GbcSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Writes the sample count to `m` and the attribute count to `n`.
///
/// # Safety
/// `session` must be a live handle; `m` and `n` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gbc_session_shape(session: *const GbcSession, m: *mut usize, n: *mut usize) -> GbcStatus {
    guard(|| {
        let s = session_ref(session)?;
        if m.is_null() || n.is_null() {
            return fail(GbcStatus::NullPointer, "output pointer is null");
        }
        *m = s.pipeline.table().n_samples();
        *n = s.pipeline.table().n_attributes();
        Ok(())
    })
}

/// Merges a JSON object into the session config, e.g.
/// `{"warp_mode": "comparison_compression", "lightness": 0.6}`. The config is
/// unchanged on failure.
///
/// # Safety
/// `session` must be a live handle; `patch_json` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gbc_session_patch_config(session: *mut GbcSession, patch_json: *const c_char) -> GbcStatus {
    guard(|| {
        let s = session_mut(session)?;
        let text = str_arg(patch_json, "patch")?;
        let patch: serde_json::Value = match serde_json::from_str(text) {
            Ok(v) => v,
            Err(e) => return fail(GbcStatus::InvalidArgument, format!("invalid JSON: {e}")),
        };
        s.config = s.config.merged(&patch).map_err(|e| match e {
            PatchError::Malformed(m) => Failure(GbcStatus::InvalidArgument, m),
            PatchError::Invalid(e) => Failure(GbcStatus::InvalidConfig, e.to_string()),
        })?;
        Ok(())
    })
}

/// Current config as a JSON string; release it with [`gbc_string_free`].
///
/// # Safety
/// `session` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gbc_session_config_json(session: *const GbcSession, out: *mut *mut c_char) -> GbcStatus {
    guard(|| {
        let s = session_ref(session)?;
        if out.is_null() {
            return fail(GbcStatus::NullPointer, "output pointer is null");
        }
        let json = serde_json::to_string(&s.config).map_err(|e| Failure(GbcStatus::Compute, e.to_string()))?;
        *out = CString::new(json).map_err(|e| Failure(GbcStatus::Compute, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gbc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Cyclic attribute order (attribute indices, `n` entries).
///
/// # Safety
/// `session` must be a live handle; `out` null or writable for `*len`
/// entries; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn gbc_session_attribute_order(
    session: *const GbcSession,
    out: *mut usize,
    len: *mut usize,
) -> GbcStatus {
    guard(|| {
        let s = session_ref(session)?;
        let layout = s.pipeline.layout(&s.config)?;
        fill(&layout.model.order, out, len)
    })
}

/// Sample positions in the unit disc after the configured warp, as `2m`
/// interleaved x, y values.
///
/// # Safety
/// As for [`gbc_session_attribute_order`].
#[no_mangle]
pub unsafe extern "C" fn gbc_session_sample_points(
    session: *const GbcSession,
    out: *mut f64,
    len: *mut usize,
) -> GbcStatus {
    guard(|| {
        let s = session_ref(session)?;
        let warped = s.pipeline.warped(&s.config)?;
        let flat: Vec<f64> = warped.points.iter().flatten().copied().collect();
        fill(&flat, out, len)
    })
}

/// Sample colors as `3m` RGB bytes.
///
/// # Safety
/// As for [`gbc_session_attribute_order`].
#[no_mangle]
pub unsafe extern "C" fn gbc_session_sample_colors(
    session: *const GbcSession,
    out: *mut u8,
    len: *mut usize,
) -> GbcStatus {
    guard(|| {
        let s = session_ref(session)?;
        let colors = s.pipeline.sample_colors(&s.config)?;
        let flat: Vec<u8> = colors.iter().flat_map(|c| c.to_rgb().channels()).collect();
        fill(&flat, out, len)
    })
}

/// Renders the pseudo-colored map as row-major RGB bytes (top row first).
/// `width` and `height` receive the raster size.
///
/// # Safety
/// As for [`gbc_session_attribute_order`]; `width` and `height` writable.
#[no_mangle]
pub unsafe extern "C" fn gbc_session_render_map(
    session: *const GbcSession,
    out: *mut u8,
    len: *mut usize,
    width: *mut usize,
    height: *mut usize,
) -> GbcStatus {
    guard(|| {
        let s = session_ref(session)?;
        if width.is_null() || height.is_null() {
            return fail(GbcStatus::NullPointer, "size pointer is null");
        }
        let image = s.pipeline.map(&s.config)?;
        *width = image.field.width;
        *height = image.field.height;
        fill(&image.field.to_rgb_bytes(), out, len)
    })
}

/// Writes map.png, legend.png, one attr_<name>.png per attribute and
/// layout.json into `dir`, creating it if needed.
///
/// # Safety
/// `session` must be a live handle; `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gbc_session_write_outputs(session: *const GbcSession, dir: *const c_char) -> GbcStatus {
    guard(|| {
        let s = session_ref(session)?;
        let dir = str_arg(dir, "dir")?;
        s.pipeline.write_outputs(&s.config, Path::new(dir))?;
        Ok(())
    })
}

/// Color of the disc point (x, y) at lightness `l`, as 3 RGB bytes.
///
/// # Safety
/// `rgb` must be writable for 3 bytes.
#[no_mangle]
pub unsafe extern "C" fn gbc_disc_to_rgb(x: f64, y: f64, l: f64, rgb: *mut u8) -> GbcStatus {
    guard(|| {
        if rgb.is_null() {
            return fail(GbcStatus::NullPointer, "rgb is null");
        }
        if !(x.is_finite() && y.is_finite() && (0.0..=1.0).contains(&l)) {
            return fail(GbcStatus::InvalidArgument, "x, y must be finite and l in [0, 1]");
        }
        let c = disc_to_hsl([x, y], l).to_rgb().channels();
        ptr::copy_nonoverlapping(c.as_ptr(), rgb, 3);
        Ok(())
    })
}
