//! C ABI for the survey pipeline.
//!
//! The surface mirrors the CLI's shape: parse a log, run the pipeline,
//! read or export the cloud, score detection files. Handles (`BsLog`,
//! `BsCloud`) are opaque; every constructor has a matching `*_free`, and
//! freeing a null pointer is a no-op. Functions that can fail return a
//! [`BsStatus`]; on failure a message is stored per thread and readable
//! through [`bs_last_error`] until the next failing call on that thread.
//!
//! Status codes match the CLI exit codes: 1 for malformed data, 2 for
//! calibration failure, 3 for file I/O, with 4 added for misused
//! arguments (null pointers, out-of-range values).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fmt::Display;
use std::path::Path;

use bathyscan::cloud::{export_ply, export_xyz, CloudPoint};
use bathyscan::detect::{evaluate, parse_ground_truth, parse_predictions};
use bathyscan::pipeline::{self, PipelineError, PipelineParams};
use bathyscan::sonarlog::{parse_csv, parse_log, SensorConfig, SurveyLog};
use bathyscan::trajectory::Calibration;

/// Result of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsStatus {
    /// The call succeeded.
    Ok = 0,
    /// The input bytes or records are malformed.
    Parse = 1,
    /// No ping was usable as a calibration reference.
    Calibration = 2,
    /// A file could not be read or written.
    Io = 3,
    /// A caller-supplied pointer or value is invalid.
    InvalidArgument = 4,
}

/// A parsed survey log. Opaque; create with [`bs_log_parse_file`] or
/// [`bs_log_parse_bytes`], release with [`bs_log_free`].
pub struct BsLog(SurveyLog);

/// A computed point cloud plus its run facts. Opaque; create with
/// [`bs_pipeline_run`], release with [`bs_cloud_free`].
pub struct BsCloud {
    points: Vec<CloudPoint>,
    calibration: Calibration,
    points_before: usize,
    removed: usize,
}

/// One cloud point. `source` is 0 for nadir, 1 for the positive side,
/// 2 for the negative side; `ping` indexes into the source log.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub source: u8,
    pub ping: u64,
}

/// Pipeline tuning knobs. Use [`bs_pipeline_params_default`] and adjust
/// fields from there; sentinel values select the adaptive defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsPipelineParams {
    /// First-return threshold on the normalized intensity scale, in (0, 1].
    pub threshold: f64,
    /// Relabel the scanline halves (sensor mounted reversed).
    pub swap_sides: bool,
    /// Calibration reference ping; negative selects automatically.
    pub ref_ping: i64,
    /// When false the local frame is anchored at the first GPS fix.
    pub has_origin: bool,
    pub origin_lat: f64,
    pub origin_lon: f64,
    /// Outlier search radius in meters; zero or negative selects the
    /// default of five pixels at the calibrated scale.
    pub radius: f64,
    /// Neighbors required within the radius to keep a point.
    pub min_neighbors: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: BsStatus, message: impl Display) -> BsStatus {
    let text = message.to_string();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).unwrap_or_default();
    });
    status
}

fn invalid(message: impl Display) -> BsStatus {
    fail(BsStatus::InvalidArgument, message)
}

/// The message for the most recent failing call on this thread, as a
/// NUL-terminated UTF-8 string (empty before any failure).
///
/// # Safety
///
/// The pointer is owned by the library and valid until the next failing
/// call on the same thread. Do not free it.
#[no_mangle]
pub unsafe extern "C" fn bs_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

// ---------------------------------------------------------------------------
// log handles
// ---------------------------------------------------------------------------

unsafe fn path_from(ptr: *const c_char, what: &str) -> Result<String, BsStatus> {
    if ptr.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(s.to_owned()),
        Err(_) => Err(invalid(format!("{what} is not valid UTF-8"))),
    }
}

fn store_log(log: SurveyLog, out: *mut *mut BsLog) -> BsStatus {
    unsafe { *out = Box::into_raw(Box::new(BsLog(log))) };
    BsStatus::Ok
}

/// Parse a survey log file into a new handle. Files ending in `.csv`
/// (case-insensitive) are read as CSV with default sensor geometry for
/// their width; everything else is parsed as the binary encoding.
///
/// # Safety
///
/// `path` must be a NUL-terminated string and `out` a valid pointer;
/// on success `*out` owns the log and must be released with
/// [`bs_log_free`].
#[no_mangle]
pub unsafe extern "C" fn bs_log_parse_file(
    path: *const c_char,
    out: *mut *mut BsLog,
) -> BsStatus {
    if out.is_null() {
        return invalid("out is null");
    }
    let path = match path_from(path, "path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    let is_csv = Path::new(&path)
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => return fail(BsStatus::Io, format!("{path}: {e}")),
        };
        let width = match sniff_csv_width(&text) {
            Some(w) => w,
            None => return fail(BsStatus::Parse, format!("{path}: unrecognized csv header")),
        };
        let config = match SensorConfig::defaults_for_width(width) {
            Ok(c) => c,
            Err(e) => return fail(BsStatus::Parse, format!("{path}: {e}")),
        };
        match parse_csv(&text, config) {
            Ok(log) => store_log(log, out),
            Err(e) => fail(BsStatus::Parse, format!("{path}: {e}")),
        }
    } else {
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) => return fail(BsStatus::Io, format!("{path}: {e}")),
        };
        match parse_log(&bytes) {
            Ok(log) => store_log(log, out),
            Err(e) => fail(BsStatus::Parse, format!("{path}: {e}")),
        }
    }
}

/// Column count of the CSV header minus the four fixed fields.
fn sniff_csv_width(text: &str) -> Option<u32> {
    let header = text.lines().next()?;
    let fields = header.split(',').count();
    u32::try_from(fields.checked_sub(4)?).ok().filter(|&w| w > 0)
}

/// Parse an in-memory binary log into a new handle.
///
/// # Safety
///
/// `bytes` must point to `len` readable bytes and `out` must be a valid
/// pointer; on success `*out` owns the log and must be released with
/// [`bs_log_free`].
#[no_mangle]
pub unsafe extern "C" fn bs_log_parse_bytes(
    bytes: *const u8,
    len: usize,
    out: *mut *mut BsLog,
) -> BsStatus {
    if out.is_null() {
        return invalid("out is null");
    }
    if bytes.is_null() && len > 0 {
        return invalid("bytes is null");
    }
    let slice = if len == 0 {
        &[][..]
    } else {
        std::slice::from_raw_parts(bytes, len)
    };
    match parse_log(slice) {
        Ok(log) => store_log(log, out),
        Err(e) => fail(BsStatus::Parse, e),
    }
}

/// Number of pings in the log; 0 for a null handle.
///
/// # Safety
///
/// `log` must be null or a live handle from a parse call.
#[no_mangle]
pub unsafe extern "C" fn bs_log_ping_count(log: *const BsLog) -> usize {
    log.as_ref().map_or(0, |l| l.0.ping_count())
}

/// Scanline width of the log; 0 for a null handle.
///
/// # Safety
///
/// `log` must be null or a live handle from a parse call.
#[no_mangle]
pub unsafe extern "C" fn bs_log_width(log: *const BsLog) -> u32 {
    log.as_ref().map_or(0, |l| l.0.width())
}

/// Release a log handle. Null is a no-op.
///
/// # Safety
///
/// `log` must be null or a live handle from a parse call; the handle
/// must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bs_log_free(log: *mut BsLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

/// The default tuning: threshold 0.3, sides as recorded, automatic
/// calibration ping, frame anchored at the first fix, radius of five
/// pixels at the calibrated scale, three required neighbors.
#[no_mangle]
pub extern "C" fn bs_pipeline_params_default() -> BsPipelineParams {
    BsPipelineParams {
        threshold: pipeline::DEFAULT_THRESHOLD,
        swap_sides: false,
        ref_ping: -1,
        has_origin: false,
        origin_lat: 0.0,
        origin_lon: 0.0,
        radius: 0.0,
        min_neighbors: 3,
    }
}

fn to_pipeline_params(p: &BsPipelineParams) -> PipelineParams {
    PipelineParams {
        threshold: p.threshold,
        swap_sides: p.swap_sides,
        ref_ping: usize::try_from(p.ref_ping).ok(),
        origin: p.has_origin.then_some((p.origin_lat, p.origin_lon)),
        radius: (p.radius > 0.0).then_some(p.radius),
        min_neighbors: p.min_neighbors,
    }
}

fn pipeline_status(e: &PipelineError) -> BsStatus {
    match e {
        PipelineError::BadThreshold(_) | PipelineError::Cloud(_) => BsStatus::InvalidArgument,
        PipelineError::Calibration(_) => BsStatus::Calibration,
        PipelineError::Projection { .. } | PipelineError::Trajectory(_) => BsStatus::Parse,
    }
}

/// Run the full pipeline over a parsed log.
///
/// # Safety
///
/// `log` must be a live handle, `params` null (for defaults) or a valid
/// pointer, and `out` a valid pointer; on success `*out` owns the cloud
/// and must be released with [`bs_cloud_free`].
#[no_mangle]
pub unsafe extern "C" fn bs_pipeline_run(
    log: *const BsLog,
    params: *const BsPipelineParams,
    out: *mut *mut BsCloud,
) -> BsStatus {
    if out.is_null() {
        return invalid("out is null");
    }
    let Some(log) = log.as_ref() else {
        return invalid("log is null");
    };
    let params = params
        .as_ref()
        .copied()
        .unwrap_or_else(|| bs_pipeline_params_default());

    match pipeline::run(&log.0, &to_pipeline_params(&params)) {
        Ok(run) => {
            let cloud = BsCloud {
                points: run.cloud,
                calibration: run.calibration,
                points_before: run.points_before,
                removed: run.removed,
            };
            *out = Box::into_raw(Box::new(cloud));
            BsStatus::Ok
        }
        Err(e) => fail(pipeline_status(&e), e),
    }
}

// ---------------------------------------------------------------------------
// cloud handles
// ---------------------------------------------------------------------------

/// Number of points in the cloud; 0 for a null handle.
///
/// # Safety
///
/// `cloud` must be null or a live handle from [`bs_pipeline_run`].
#[no_mangle]
pub unsafe extern "C" fn bs_cloud_len(cloud: *const BsCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.points.len())
}

/// Number of points discarded by the outlier filter; 0 for a null handle.
///
/// # Safety
///
/// `cloud` must be null or a live handle from [`bs_pipeline_run`].
#[no_mangle]
pub unsafe extern "C" fn bs_cloud_removed(cloud: *const BsCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.removed)
}

/// Number of points before outlier filtering; 0 for a null handle.
///
/// # Safety
///
/// `cloud` must be null or a live handle from [`bs_pipeline_run`].
#[no_mangle]
pub unsafe extern "C" fn bs_cloud_points_before(cloud: *const BsCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.points_before)
}

/// Calibrated pixels-per-meter scale; 0 for a null handle.
///
/// # Safety
///
/// `cloud` must be null or a live handle from [`bs_pipeline_run`].
#[no_mangle]
pub unsafe extern "C" fn bs_cloud_ppd(cloud: *const BsCloud) -> f64 {
    cloud.as_ref().map_or(0.0, |c| c.calibration.ppd)
}

/// Copy one point out of the cloud.
///
/// # Safety
///
/// `cloud` must be a live handle and `point` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_cloud_get(
    cloud: *const BsCloud,
    index: usize,
    point: *mut BsPoint,
) -> BsStatus {
    let Some(cloud) = cloud.as_ref() else {
        return invalid("cloud is null");
    };
    if point.is_null() {
        return invalid("point is null");
    }
    let Some(p) = cloud.points.get(index) else {
        return invalid(format!(
            "index {index} out of range for {} points",
            cloud.points.len()
        ));
    };
    *point = BsPoint {
        x: p.x,
        y: p.y,
        z: p.z,
        source: p.source.code(),
        ping: p.ping as u64,
    };
    BsStatus::Ok
}

/// Write the cloud as ASCII XYZ, one `x y z` line per point.
///
/// # Safety
///
/// `cloud` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bs_cloud_write_xyz(
    cloud: *const BsCloud,
    path: *const c_char,
) -> BsStatus {
    let Some(cloud) = cloud.as_ref() else {
        return invalid("cloud is null");
    };
    let path = match path_from(path, "path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    match std::fs::write(&path, export_xyz(&cloud.points)) {
        Ok(()) => BsStatus::Ok,
        Err(e) => fail(BsStatus::Io, format!("{path}: {e}")),
    }
}

/// Write the cloud as binary little-endian PLY with a per-point source
/// label.
///
/// # Safety
///
/// `cloud` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bs_cloud_write_ply(
    cloud: *const BsCloud,
    path: *const c_char,
) -> BsStatus {
    let Some(cloud) = cloud.as_ref() else {
        return invalid("cloud is null");
    };
    let path = match path_from(path, "path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    match std::fs::write(&path, export_ply(&cloud.points)) {
        Ok(()) => BsStatus::Ok,
        Err(e) => fail(BsStatus::Io, format!("{path}: {e}")),
    }
}

/// Release a cloud handle. Null is a no-op.
///
/// # Safety
///
/// `cloud` must be null or a live handle from [`bs_pipeline_run`]; the
/// handle must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bs_cloud_free(cloud: *mut BsCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

// ---------------------------------------------------------------------------
// detection scoring
// ---------------------------------------------------------------------------

/// Score a prediction file against a ground-truth file and report the
/// mean average precision and the mean IoU of matched pairs. Either
/// output pointer may be null to skip that value.
///
/// # Safety
///
/// `pred_path` and `truth_path` must be NUL-terminated strings;
/// `map_out` and `mean_iou_out` must each be null or valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bs_eval_detection_files(
    pred_path: *const c_char,
    truth_path: *const c_char,
    iou_threshold: f64,
    map_out: *mut f64,
    mean_iou_out: *mut f64,
) -> BsStatus {
    if !(iou_threshold.is_finite() && (0.0..=1.0).contains(&iou_threshold)) {
        return invalid(format!(
            "iou_threshold must be within [0, 1], got {iou_threshold}"
        ));
    }
    let pred_path = match path_from(pred_path, "pred_path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    let truth_path = match path_from(truth_path, "truth_path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    let pred_text = match std::fs::read_to_string(&pred_path) {
        Ok(t) => t,
        Err(e) => return fail(BsStatus::Io, format!("{pred_path}: {e}")),
    };
    let truth_text = match std::fs::read_to_string(&truth_path) {
        Ok(t) => t,
        Err(e) => return fail(BsStatus::Io, format!("{truth_path}: {e}")),
    };
    let preds = match parse_predictions(&pred_text) {
        Ok(p) => p,
        Err(e) => return fail(BsStatus::Parse, format!("{pred_path}: {e}")),
    };
    let truths = match parse_ground_truth(&truth_text) {
        Ok(t) => t,
        Err(e) => return fail(BsStatus::Parse, format!("{truth_path}: {e}")),
    };

    let report = evaluate(&preds, &truths, iou_threshold);
    if !map_out.is_null() {
        *map_out = report.map;
    }
    if !mean_iou_out.is_null() {
        *mean_iou_out = report.mean_iou_tp;
    }
    BsStatus::Ok
}
