//! C interface to the video-sampling core.
//!
//! The surface covers what a host application needs to run the
//! transformation pipeline against its own decoder and training stack:
//! homography solving and point mapping over flat `double[8]` coefficient
//! arrays, spatial and temporal transform specs as plain C structs, and an
//! opaque clip handle with file round-trips, frame selection, warping, and
//! the resize-and-crop preprocessing step.
//!
//! Conventions, uniform across the surface:
//!
//! * Every fallible function returns [`V3sStatus`]; `V3S_STATUS_OK` is zero.
//!   Outputs are written through pointers only on success.
//! * On failure, a human-readable description is stored per thread and can
//!   be fetched with [`v3s_last_error_message`]. The pointer stays valid
//!   until the next failing call on the same thread.
//! * No function panics across the boundary; unexpected panics are caught
//!   and reported as `V3S_STATUS_INTERNAL_PANIC`.
//! * Corner arrays are eight doubles `x0,y0,x1,y1,x2,y2,x3,y3` ordered
//!   top-left, bottom-left, bottom-right, top-right. Homography coefficient
//!   arrays are the eight entries `m0..m7` of the 3x3 matrix whose last
//!   entry is fixed at 1, row-major.
//! * Clip sample buffers are `float` in `[0,1]` laid out `[t][y][x][c]`.
//!
//! The build script generates `include/v3s.h` from these declarations via
//! cbindgen, so the header never drifts from the implementation.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use v3s_core::error::Error;
use v3s_core::geometry::{Homography, Point2, Quad};
use v3s_core::io::{read_clip, write_clip};
use v3s_core::video::{Clip, Frame};
use v3s_core::warp::{apply_spatial, preprocess, CropRect, HeadEnd, Side, SpatialSpec};
use v3s_core::TemporalSpec;

/// Result of a fallible call. Zero is success; everything else names the
/// failure class, with detail available from `v3s_last_error_message()`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum V3sStatus {
    /// The call succeeded and all outputs are valid.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument failed validation (bad factor, size, index, or enum tag).
    InvalidArgument = 2,
    /// A numerically degenerate configuration (singular system, horizon point).
    NumericalError = 3,
    /// File or format trouble: I/O failure, bad magic, out-of-range samples.
    DataError = 4,
    /// A bug: an internal panic was caught at the boundary.
    InternalPanic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    // NUL bytes never appear in the crate's error strings; strip them
    // defensively rather than fail while reporting a failure.
    let clean: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(clean).unwrap_or_default());
}

/// Records the error message and picks the status for a core error.
fn fail(err: Error) -> V3sStatus {
    set_last_error(&err.to_string());
    match err {
        Error::SingularSystem
        | Error::DegenerateDenominator { .. }
        | Error::GradCheckFailed { .. } => V3sStatus::NumericalError,
        Error::InvalidFactor { .. }
        | Error::InvalidCrop { .. }
        | Error::InvalidFrame(_)
        | Error::DimensionMismatch(_)
        | Error::ClipTooShort { .. }
        | Error::Parse(_) => V3sStatus::InvalidArgument,
        _ => V3sStatus::DataError,
    }
}

fn fail_null(what: &str) -> V3sStatus {
    set_last_error(&format!("{what} must not be null"));
    V3sStatus::NullArgument
}

fn fail_invalid(msg: &str) -> V3sStatus {
    set_last_error(msg);
    V3sStatus::InvalidArgument
}

/// Runs a body that may touch caller memory, converting panics into a status
/// instead of unwinding into foreign frames.
fn shielded(body: impl FnOnce() -> V3sStatus) -> V3sStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic caught at the C boundary");
            V3sStatus::InternalPanic
        }
    }
}

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn v3s_version() -> *const c_char {
    VERSION.as_ptr().cast()
}

/// Static name for a status code; never null, even for unknown values.
#[no_mangle]
pub extern "C" fn v3s_status_name(status: V3sStatus) -> *const c_char {
    let name: &'static str = match status {
        V3sStatus::Ok => "ok\0",
        V3sStatus::NullArgument => "null argument\0",
        V3sStatus::InvalidArgument => "invalid argument\0",
        V3sStatus::NumericalError => "numerical error\0",
        V3sStatus::DataError => "data error\0",
        V3sStatus::InternalPanic => "internal panic\0",
    };
    name.as_ptr().cast()
}

/// Message from this thread's most recent failure, NUL-terminated. Empty
/// until a call fails. Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn v3s_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

// ---------------------------------------------------------------------------
// Homographies over flat coefficient arrays
// ---------------------------------------------------------------------------

fn quad_from_flat(flat: &[f64]) -> Quad {
    let mut corners = [Point2::new(0.0, 0.0); 4];
    for (i, c) in corners.iter_mut().enumerate() {
        *c = Point2::new(flat[2 * i], flat[2 * i + 1]);
    }
    Quad::new(corners)
}

fn quad_to_flat(quad: &Quad, out: &mut [f64]) {
    for (i, c) in quad.corners.iter().enumerate() {
        out[2 * i] = c.x;
        out[2 * i + 1] = c.y;
    }
}

/// Solves for the homography sending each `src` corner to the matching
/// `dst` corner and writes its eight coefficients to `out`.
///
/// `src`, `dst`: corner arrays of 8 doubles; `out`: coefficient array of 8.
///
/// # Safety
/// `src` and `dst` must point to 8 readable doubles each and `out` to 8
/// writable doubles, or be null (reported as `V3S_STATUS_NULL_ARGUMENT`).
#[no_mangle]
pub unsafe extern "C" fn v3s_homography_solve(
    src: *const f64,
    dst: *const f64,
    out: *mut f64,
) -> V3sStatus {
    if src.is_null() || dst.is_null() {
        return fail_null("src/dst corner array");
    }
    if out.is_null() {
        return fail_null("out coefficient array");
    }
    let src = unsafe { std::slice::from_raw_parts(src, 8) };
    let dst = unsafe { std::slice::from_raw_parts(dst, 8) };
    let out = unsafe { std::slice::from_raw_parts_mut(out, 8) };
    shielded(|| {
        match v3s_core::solve_homography(&quad_from_flat(src), &quad_from_flat(dst)) {
            Ok(h) => {
                out.copy_from_slice(&h.coefficients());
                V3sStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Maps the point `(x, y)` through the homography with coefficients `h`.
///
/// # Safety
/// `h` must point to 8 readable doubles; `out_x` and `out_y` must be
/// writable or null (reported, not dereferenced).
#[no_mangle]
pub unsafe extern "C" fn v3s_homography_map_point(
    h: *const f64,
    x: f64,
    y: f64,
    out_x: *mut f64,
    out_y: *mut f64,
) -> V3sStatus {
    if h.is_null() {
        return fail_null("homography coefficients");
    }
    if out_x.is_null() || out_y.is_null() {
        return fail_null("out_x/out_y");
    }
    let coeffs = unsafe { std::slice::from_raw_parts(h, 8) };
    let mut m = [0.0f64; 8];
    m.copy_from_slice(coeffs);
    shielded(|| {
        let h = match Homography::from_coefficients(m) {
            Ok(h) => h,
            Err(e) => return fail(e),
        };
        match h.map_point(Point2::new(x, y)) {
            Ok(p) => {
                unsafe {
                    *out_x = p.x;
                    *out_y = p.y;
                }
                V3sStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes the coefficients of the inverse homography to `out`.
///
/// # Safety
/// `h` must point to 8 readable doubles and `out` to 8 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn v3s_homography_invert(h: *const f64, out: *mut f64) -> V3sStatus {
    if h.is_null() {
        return fail_null("homography coefficients");
    }
    if out.is_null() {
        return fail_null("out coefficient array");
    }
    let coeffs = unsafe { std::slice::from_raw_parts(h, 8) };
    let out = unsafe { std::slice::from_raw_parts_mut(out, 8) };
    let mut m = [0.0f64; 8];
    m.copy_from_slice(coeffs);
    shielded(|| {
        let result = Homography::from_coefficients(m).and_then(|h| h.invert());
        match result {
            Ok(inv) => {
                out.copy_from_slice(&inv.coefficients());
                V3sStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// ---------------------------------------------------------------------------
// Spatial transform specs
// ---------------------------------------------------------------------------

/// Which edge of the frame becomes the shortened head end of a projection.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum V3sSide {
    Left = 0,
    Right = 1,
    Top = 2,
    Bottom = 3,
}

impl From<V3sSide> for Side {
    fn from(side: V3sSide) -> Side {
        match side {
            V3sSide::Left => Side::Left,
            V3sSide::Right => Side::Right,
            V3sSide::Top => Side::Top,
            V3sSide::Bottom => Side::Bottom,
        }
    }
}

/// Discriminant for [`V3sSpatialSpec`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum V3sSpatialKind {
    /// Pass the frame through unchanged.
    Identity = 0,
    /// Stretch width by `a` and height by `b`; exactly one factor must be 1.
    Scale = 1,
    /// Shrink the `side` edge to `factor` times its length, centered.
    Projection = 2,
}

/// One spatial transformation class as a plain C struct. Only the fields
/// named by `kind` are read: `a`/`b` for scale, `factor`/`side` for
/// projection. Build with the `v3s_spatial_*` constructors rather than by
/// hand so unused fields carry harmless values.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V3sSpatialSpec {
    pub kind: V3sSpatialKind,
    pub a: f64,
    pub b: f64,
    pub factor: f64,
    pub side: V3sSide,
}

impl V3sSpatialSpec {
    fn to_core(self) -> Result<SpatialSpec, Error> {
        match self.kind {
            V3sSpatialKind::Identity => Ok(SpatialSpec::Identity),
            V3sSpatialKind::Scale => SpatialSpec::scale(self.a, self.b),
            V3sSpatialKind::Projection => {
                SpatialSpec::projection(self.factor, self.side.into())
            }
        }
    }
}

/// The identity spatial spec.
#[no_mangle]
pub extern "C" fn v3s_spatial_identity() -> V3sSpatialSpec {
    V3sSpatialSpec {
        kind: V3sSpatialKind::Identity,
        a: 1.0,
        b: 1.0,
        factor: 1.0,
        side: V3sSide::Left,
    }
}

/// An anisotropic scale spec stretching width by `a` and height by `b`.
/// Not validated here; invalid factors surface when the spec is used.
#[no_mangle]
pub extern "C" fn v3s_spatial_scale(a: f64, b: f64) -> V3sSpatialSpec {
    V3sSpatialSpec {
        kind: V3sSpatialKind::Scale,
        a,
        b,
        factor: 1.0,
        side: V3sSide::Left,
    }
}

/// A projection spec shrinking `side` to `factor` times its length.
/// Not validated here; invalid factors surface when the spec is used.
#[no_mangle]
pub extern "C" fn v3s_spatial_projection(factor: f64, side: V3sSide) -> V3sSpatialSpec {
    V3sSpatialSpec {
        kind: V3sSpatialKind::Projection,
        a: 1.0,
        b: 1.0,
        factor,
        side,
    }
}

/// Checks a spec's parameters without applying it.
///
/// # Safety
/// `spec` must point to a readable `V3sSpatialSpec` or be null.
#[no_mangle]
pub unsafe extern "C" fn v3s_spatial_validate(spec: *const V3sSpatialSpec) -> V3sStatus {
    if spec.is_null() {
        return fail_null("spec");
    }
    let spec = unsafe { *spec };
    shielded(|| match spec.to_core() {
        Ok(_) => V3sStatus::Ok,
        Err(e) => fail(e),
    })
}

/// Writes the destination corners of `spec` for a `width` x `height` frame
/// into `out` (corner array of 8 doubles).
///
/// # Safety
/// `spec` must be readable and `out` must point to 8 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn v3s_spatial_corners(
    spec: *const V3sSpatialSpec,
    width: usize,
    height: usize,
    out: *mut f64,
) -> V3sStatus {
    if spec.is_null() {
        return fail_null("spec");
    }
    if out.is_null() {
        return fail_null("out corner array");
    }
    let spec = unsafe { *spec };
    let out = unsafe { std::slice::from_raw_parts_mut(out, 8) };
    shielded(|| {
        let result = spec.to_core().and_then(|s| s.corners(width, height));
        match result {
            Ok(quad) => {
                quad_to_flat(&quad, out);
                V3sStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes the output canvas for `spec` applied to a `width` x `height`
/// frame: the corner bounding box rounded up to whole pixels.
///
/// # Safety
/// `spec` must be readable; `out_width` and `out_height` must be writable.
#[no_mangle]
pub unsafe extern "C" fn v3s_spatial_canvas(
    spec: *const V3sSpatialSpec,
    width: usize,
    height: usize,
    out_width: *mut usize,
    out_height: *mut usize,
) -> V3sStatus {
    if spec.is_null() {
        return fail_null("spec");
    }
    if out_width.is_null() || out_height.is_null() {
        return fail_null("out_width/out_height");
    }
    let spec = unsafe { *spec };
    shielded(|| {
        let result = spec.to_core().and_then(|s| s.canvas(width, height));
        match result {
            Ok((w, h)) => {
                unsafe {
                    *out_width = w;
                    *out_height = h;
                }
                V3sStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes the homography sending the full `width` x `height` rectangle onto
/// the spec's destination corners (coefficient array of 8 doubles).
///
/// # Safety
/// `spec` must be readable and `out` must point to 8 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn v3s_spatial_homography(
    spec: *const V3sSpatialSpec,
    width: usize,
    height: usize,
    out: *mut f64,
) -> V3sStatus {
    if spec.is_null() {
        return fail_null("spec");
    }
    if out.is_null() {
        return fail_null("out coefficient array");
    }
    let spec = unsafe { *spec };
    let out = unsafe { std::slice::from_raw_parts_mut(out, 8) };
    shielded(|| {
        let result = spec.to_core().and_then(|s| s.homography(width, height));
        match result {
            Ok(h) => {
                out.copy_from_slice(&h.coefficients());
                V3sStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

// ---------------------------------------------------------------------------
// Temporal transform specs
// ---------------------------------------------------------------------------

/// Discriminant for [`V3sTemporalSpec`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum V3sTemporalKind {
    /// Constant stride `s1`, producing an `l1`-frame clip.
    Scale = 0,
    /// Stride `s1` for `l1` frames, then stride `s2` for `l2` more.
    Projection = 1,
}

/// One temporal transformation class as a plain C struct. A scale spec reads
/// `s1`/`l1` only; a projection spec reads all four fields. Build with the
/// `v3s_temporal_*` constructors.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct V3sTemporalSpec {
    pub kind: V3sTemporalKind,
    pub s1: usize,
    pub s2: usize,
    pub l1: usize,
    pub l2: usize,
}

impl V3sTemporalSpec {
    fn to_core(self) -> Result<TemporalSpec, Error> {
        match self.kind {
            V3sTemporalKind::Scale => TemporalSpec::scale(self.s1, self.l1),
            V3sTemporalKind::Projection => {
                TemporalSpec::projection(self.s1, self.s2, self.l1, self.l2)
            }
        }
    }
}

/// A constant-stride spec: every `s`-th frame, `l` frames long.
/// Not validated here; zero values surface when the spec is used.
#[no_mangle]
pub extern "C" fn v3s_temporal_scale(s: usize, l: usize) -> V3sTemporalSpec {
    V3sTemporalSpec { kind: V3sTemporalKind::Scale, s1: s, s2: s, l1: l, l2: 0 }
}

/// A two-stage spec: stride `s1` for `l1` frames, then `s2` for `l2`.
/// Not validated here; bad stage values surface when the spec is used.
#[no_mangle]
pub extern "C" fn v3s_temporal_projection(
    s1: usize,
    s2: usize,
    l1: usize,
    l2: usize,
) -> V3sTemporalSpec {
    V3sTemporalSpec { kind: V3sTemporalKind::Projection, s1, s2, l1, l2 }
}

/// Checks a spec's parameters.
///
/// # Safety
/// `spec` must point to a readable `V3sTemporalSpec` or be null.
#[no_mangle]
pub unsafe extern "C" fn v3s_temporal_validate(spec: *const V3sTemporalSpec) -> V3sStatus {
    if spec.is_null() {
        return fail_null("spec");
    }
    let spec = unsafe { *spec };
    shielded(|| match spec.to_core() {
        Ok(_) => V3sStatus::Ok,
        Err(e) => fail(e),
    })
}

/// Writes the number of frames the spec selects (`l`, or `l1 + l2`).
///
/// # Safety
/// `spec` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn v3s_temporal_clip_len(
    spec: *const V3sTemporalSpec,
    out: *mut usize,
) -> V3sStatus {
    if spec.is_null() {
        return fail_null("spec");
    }
    if out.is_null() {
        return fail_null("out");
    }
    let spec = unsafe { *spec };
    shielded(|| match spec.to_core() {
        Ok(s) => {
            unsafe { *out = s.clip_len() };
            V3sStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Writes the number of source frames the spec needs from its start frame:
/// the last selected index minus the first, plus one.
///
/// # Safety
/// `spec` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn v3s_temporal_required_span(
    spec: *const V3sTemporalSpec,
    out: *mut usize,
) -> V3sStatus {
    if spec.is_null() {
        return fail_null("spec");
    }
    if out.is_null() {
        return fail_null("out");
    }
    let spec = unsafe { *spec };
    shielded(|| match spec.to_core() {
        Ok(s) => {
            unsafe { *out = v3s_core::temporal::required_span(&s) };
            V3sStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Writes the source frame indices the spec selects from a `video_len`-frame
/// video starting at frame `start`. `capacity` is the length of `out`;
/// `out_written` receives the count, which always equals the spec's clip
/// length on success.
///
/// # Safety
/// `spec` must be readable, `out` must point to `capacity` writable
/// elements, and `out_written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn v3s_temporal_indices(
    spec: *const V3sTemporalSpec,
    video_len: usize,
    start: usize,
    out: *mut usize,
    capacity: usize,
    out_written: *mut usize,
) -> V3sStatus {
    if spec.is_null() {
        return fail_null("spec");
    }
    if out.is_null() || out_written.is_null() {
        return fail_null("out/out_written");
    }
    let spec = unsafe { *spec };
    let out = unsafe { std::slice::from_raw_parts_mut(out, capacity) };
    shielded(|| {
        let indices = match spec.to_core().and_then(|s| s.indices(video_len, start)) {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
        if indices.len() > capacity {
            return fail_invalid(&format!(
                "index buffer holds {capacity} elements, spec selects {}",
                indices.len()
            ));
        }
        out[..indices.len()].copy_from_slice(&indices);
        unsafe { *out_written = indices.len() };
        V3sStatus::Ok
    })
}

// ---------------------------------------------------------------------------
// Opaque clip handles
// ---------------------------------------------------------------------------

/// An in-memory video clip; opaque to C. Create with `v3s_clip_create` or
/// `v3s_clip_read`, release with `v3s_clip_free`.
pub struct V3sClip {
    inner: Clip,
}

fn clip_arg<'a>(clip: *const V3sClip) -> Result<&'a Clip, V3sStatus> {
    if clip.is_null() {
        return Err(fail_null("clip"));
    }
    Ok(unsafe { &(*clip).inner })
}

fn emit_clip(clip: Clip, out: *mut *mut V3sClip) -> V3sStatus {
    let handle = Box::new(V3sClip { inner: clip });
    unsafe { *out = Box::into_raw(handle) };
    V3sStatus::Ok
}

/// Builds a clip from a sample buffer of `frames * height * width *
/// channels` floats in `[t][y][x][c]` order, values in `[0,1]`.
///
/// On success `*out` owns the new clip.
///
/// # Safety
/// `data` must point to `data_len` readable floats and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn v3s_clip_create(
    frames: usize,
    height: usize,
    width: usize,
    channels: usize,
    data: *const f32,
    data_len: usize,
    out: *mut *mut V3sClip,
) -> V3sStatus {
    if data.is_null() {
        return fail_null("data");
    }
    if out.is_null() {
        return fail_null("out");
    }
    let data = unsafe { std::slice::from_raw_parts(data, data_len) };
    shielded(|| {
        let frame_len = height * width * channels;
        if frames == 0 || frame_len == 0 || frames * frame_len != data_len {
            return fail_invalid(&format!(
                "data_len {data_len} does not match {frames} frames of {height}x{width}x{channels}"
            ));
        }
        let mut built = Vec::with_capacity(frames);
        for chunk in data.chunks_exact(frame_len) {
            match Frame::from_data(width, height, channels, chunk.to_vec()) {
                Ok(f) => built.push(f),
                Err(e) => return fail(e),
            }
        }
        match Clip::new(built) {
            Ok(clip) => emit_clip(clip, out),
            Err(e) => fail(e),
        }
    })
}

fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, V3sStatus> {
    if path.is_null() {
        return Err(fail_null("path"));
    }
    let bytes = unsafe { CStr::from_ptr(path) };
    match bytes.to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => Err(fail_invalid("path is not valid UTF-8")),
    }
}

/// Reads a clip file. On success `*out` owns the new clip.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn v3s_clip_read(path: *const c_char, out: *mut *mut V3sClip) -> V3sStatus {
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    if out.is_null() {
        return fail_null("out");
    }
    shielded(|| match read_clip(path) {
        Ok(clip) => emit_clip(clip, out),
        Err(e) => fail(e),
    })
}

/// Writes the clip to a clip file, atomically replacing any existing file.
///
/// # Safety
/// `clip` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn v3s_clip_write(clip: *const V3sClip, path: *const c_char) -> V3sStatus {
    let clip = match clip_arg(clip) {
        Ok(c) => c,
        Err(s) => return s,
    };
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    shielded(|| match write_clip(path, clip) {
        Ok(()) => V3sStatus::Ok,
        Err(e) => fail(e),
    })
}

/// Number of frames; 0 if `clip` is null.
///
/// # Safety
/// `clip` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn v3s_clip_frames(clip: *const V3sClip) -> usize {
    clip_arg(clip).map(Clip::len).unwrap_or(0)
}

/// Frame height in pixels; 0 if `clip` is null.
///
/// # Safety
/// `clip` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn v3s_clip_height(clip: *const V3sClip) -> usize {
    clip_arg(clip).map(Clip::height).unwrap_or(0)
}

/// Frame width in pixels; 0 if `clip` is null.
///
/// # Safety
/// `clip` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn v3s_clip_width(clip: *const V3sClip) -> usize {
    clip_arg(clip).map(Clip::width).unwrap_or(0)
}

/// Channels per pixel; 0 if `clip` is null.
///
/// # Safety
/// `clip` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn v3s_clip_channels(clip: *const V3sClip) -> usize {
    clip_arg(clip).map(Clip::channels).unwrap_or(0)
}

/// Total float count of the clip's sample buffer (`frames * height * width
/// * channels`); the capacity `v3s_clip_copy_data` needs. 0 if null.
///
/// # Safety
/// `clip` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn v3s_clip_sample_count(clip: *const V3sClip) -> usize {
    clip_arg(clip)
        .map(|c| c.len() * c.height() * c.width() * c.channels())
        .unwrap_or(0)
}

/// Copies the clip's samples into `out` in `[t][y][x][c]` order. `capacity`
/// must be at least `v3s_clip_sample_count(clip)`.
///
/// # Safety
/// `clip` must be a live handle and `out` must point to `capacity` writable
/// floats.
#[no_mangle]
pub unsafe extern "C" fn v3s_clip_copy_data(
    clip: *const V3sClip,
    out: *mut f32,
    capacity: usize,
) -> V3sStatus {
    let clip = match clip_arg(clip) {
        Ok(c) => c,
        Err(s) => return s,
    };
    if out.is_null() {
        return fail_null("out");
    }
    let out = unsafe { std::slice::from_raw_parts_mut(out, capacity) };
    shielded(|| {
        let needed = clip.len() * clip.height() * clip.width() * clip.channels();
        if capacity < needed {
            return fail_invalid(&format!(
                "sample buffer holds {capacity} floats, clip has {needed}"
            ));
        }
        let mut offset = 0;
        for frame in clip.frames() {
            let data = frame.data();
            out[offset..offset + data.len()].copy_from_slice(data);
            offset += data.len();
        }
        V3sStatus::Ok
    })
}

/// Builds a new clip from the given frame indices of an existing one, in
/// order, duplicates allowed. On success `*out` owns the new clip.
///
/// # Safety
/// `clip` must be a live handle, `indices` must point to `count` readable
/// elements, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn v3s_clip_select(
    clip: *const V3sClip,
    indices: *const usize,
    count: usize,
    out: *mut *mut V3sClip,
) -> V3sStatus {
    let clip = match clip_arg(clip) {
        Ok(c) => c,
        Err(s) => return s,
    };
    if indices.is_null() {
        return fail_null("indices");
    }
    if out.is_null() {
        return fail_null("out");
    }
    let indices = unsafe { std::slice::from_raw_parts(indices, count) };
    shielded(|| match clip.select(indices) {
        Ok(selected) => emit_clip(selected, out),
        Err(e) => fail(e),
    })
}

/// Warps every frame through the spec's homography onto an `out_width` x
/// `out_height` canvas (inverse-mapped bilinear sampling, black outside).
/// Pass the dims from `v3s_spatial_canvas` to keep the whole image in view.
/// On success `*out` owns the new clip.
///
/// # Safety
/// `clip` must be a live handle, `spec` readable, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn v3s_clip_apply_spatial(
    clip: *const V3sClip,
    spec: *const V3sSpatialSpec,
    out_width: usize,
    out_height: usize,
    out: *mut *mut V3sClip,
) -> V3sStatus {
    let clip = match clip_arg(clip) {
        Ok(c) => c,
        Err(s) => return s,
    };
    if spec.is_null() {
        return fail_null("spec");
    }
    if out.is_null() {
        return fail_null("out");
    }
    let spec = unsafe { *spec };
    shielded(|| {
        let result = spec
            .to_core()
            .and_then(|s| apply_spatial(clip, &s, out_width, out_height));
        match result {
            Ok(warped) => emit_clip(warped, out),
            Err(e) => fail(e),
        }
    })
}

/// The shortened edge of a projection-warped frame: its pixel length and
/// which side it sits on.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct V3sHeadEnd {
    pub len: usize,
    pub side: V3sSide,
}

/// Resize-and-crop preprocessing for every frame: resize to `resize_to`
/// square, then cut the `crop_w` x `crop_h` window at `(crop_x, crop_y)`.
///
/// `head_end` may be null. When it names an edge shorter than `resize_to`,
/// the square flush against that edge is cut out first and resized to the
/// crop window's size, keeping a strongly foreshortened region in view.
/// On success `*out` owns the new clip.
///
/// # Safety
/// `clip` must be a live handle, `head_end` readable or null, and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn v3s_clip_preprocess(
    clip: *const V3sClip,
    resize_to: usize,
    crop_x: usize,
    crop_y: usize,
    crop_w: usize,
    crop_h: usize,
    head_end: *const V3sHeadEnd,
    out: *mut *mut V3sClip,
) -> V3sStatus {
    let clip = match clip_arg(clip) {
        Ok(c) => c,
        Err(s) => return s,
    };
    if out.is_null() {
        return fail_null("out");
    }
    let head = if head_end.is_null() {
        None
    } else {
        let he = unsafe { *head_end };
        Some(HeadEnd { len: he.len, side: he.side.into() })
    };
    shielded(|| {
        let rect = CropRect::new(crop_x, crop_y, crop_w, crop_h);
        match clip.map_frames(|f| preprocess(f, resize_to, rect, head)) {
            Ok(processed) => emit_clip(processed, out),
            Err(e) => fail(e),
        }
    })
}

/// Releases a clip handle. Null is a no-op. The handle must not be used
/// afterwards.
///
/// # Safety
/// `clip` must be a pointer previously returned through a `*mut *mut
/// V3sClip` output of this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn v3s_clip_free(clip: *mut V3sClip) {
    if !clip.is_null() {
        drop(unsafe { Box::from_raw(clip) });
    }
}
