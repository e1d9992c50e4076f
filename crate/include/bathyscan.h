#ifndef BATHYSCAN_H
#define BATHYSCAN_H

/* Generated from the bathyscan-capi crate by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a fallible call.
typedef enum BsStatus {
  // The call succeeded.
  BS_STATUS_OK = 0,
  // The input bytes or records are malformed.
  BS_STATUS_PARSE = 1,
  // No ping was usable as a calibration reference.
  BS_STATUS_CALIBRATION = 2,
  // A file could not be read or written.
  BS_STATUS_IO = 3,
  // A caller-supplied pointer or value is invalid.
  BS_STATUS_INVALID_ARGUMENT = 4,
} BsStatus;

// A computed point cloud plus its run facts. Opaque; create with
// [`bs_pipeline_run`], release with [`bs_cloud_free`].
typedef struct BsCloud BsCloud;

// A parsed survey log. Opaque; create with [`bs_log_parse_file`] or
// [`bs_log_parse_bytes`], release with [`bs_log_free`].
typedef struct BsLog BsLog;

// Pipeline tuning knobs. Use [`bs_pipeline_params_default`] and adjust
// fields from there; sentinel values select the adaptive defaults.
typedef struct BsPipelineParams {
  // First-return threshold on the normalized intensity scale, in (0, 1].
  double threshold;
  // Relabel the scanline halves (sensor mounted reversed).
  bool swap_sides;
  // Calibration reference ping; negative selects automatically.
  int64_t ref_ping;
  // When false the local frame is anchored at the first GPS fix.
  bool has_origin;
  double origin_lat;
  double origin_lon;
  // Outlier search radius in meters; zero or negative selects the
  // default of five pixels at the calibrated scale.
  double radius;
  // Neighbors required within the radius to keep a point.
  uintptr_t min_neighbors;
} BsPipelineParams;

// One cloud point. `source` is 0 for nadir, 1 for the positive side,
// 2 for the negative side; `ping` indexes into the source log.
typedef struct BsPoint {
  double x;
  double y;
  double z;
  uint8_t source;
  uint64_t ping;
} BsPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The message for the most recent failing call on this thread, as a
// NUL-terminated UTF-8 string (empty before any failure).
//
// # Safety
//
// The pointer is owned by the library and valid until the next failing
// call on the same thread. Do not free it.
const char *bs_last_error(void);

// Parse a survey log file into a new handle. Files ending in `.csv`
// (case-insensitive) are read as CSV with default sensor geometry for
// their width; everything else is parsed as the binary encoding.
//
// # Safety
//
// `path` must be a NUL-terminated string and `out` a valid pointer;
// on success `*out` owns the log and must be released with
// [`bs_log_free`].
enum BsStatus bs_log_parse_file(const char *path, struct BsLog **out);

// Parse an in-memory binary log into a new handle.
//
// # Safety
//
// `bytes` must point to `len` readable bytes and `out` must be a valid
// pointer; on success `*out` owns the log and must be released with
// [`bs_log_free`].
enum BsStatus bs_log_parse_bytes(const uint8_t *bytes, uintptr_t len, struct BsLog **out);

// Number of pings in the log; 0 for a null handle.
//
// # Safety
//
// `log` must be null or a live handle from a parse call.
uintptr_t bs_log_ping_count(const struct BsLog *log);

// Scanline width of the log; 0 for a null handle.
//
// # Safety
//
// `log` must be null or a live handle from a parse call.
uint32_t bs_log_width(const struct BsLog *log);

// Release a log handle. Null is a no-op.
//
// # Safety
//
// `log` must be null or a live handle from a parse call; the handle
// must not be used afterwards.
void bs_log_free(struct BsLog *log);

// The default tuning: threshold 0.3, sides as recorded, automatic
// calibration ping, frame anchored at the first fix, radius of five
// pixels at the calibrated scale, three required neighbors.
struct BsPipelineParams bs_pipeline_params_default(void);

// Run the full pipeline over a parsed log.
//
// # Safety
//
// `log` must be a live handle, `params` null (for defaults) or a valid
// pointer, and `out` a valid pointer; on success `*out` owns the cloud
// and must be released with [`bs_cloud_free`].
enum BsStatus bs_pipeline_run(const struct BsLog *log,
                              const struct BsPipelineParams *params,
                              struct BsCloud **out);

// Number of points in the cloud; 0 for a null handle.
//
// # Safety
//
// `cloud` must be null or a live handle from [`bs_pipeline_run`].
uintptr_t bs_cloud_len(const struct BsCloud *cloud);

// Number of points discarded by the outlier filter; 0 for a null handle.
//
// # Safety
//
// `cloud` must be null or a live handle from [`bs_pipeline_run`].
uintptr_t bs_cloud_removed(const struct BsCloud *cloud);

// Number of points before outlier filtering; 0 for a null handle.
//
// # Safety
//
// `cloud` must be null or a live handle from [`bs_pipeline_run`].
uintptr_t bs_cloud_points_before(const struct BsCloud *cloud);

// Calibrated pixels-per-meter scale; 0 for a null handle.
//
// # Safety
//
// `cloud` must be null or a live handle from [`bs_pipeline_run`].
double bs_cloud_ppd(const struct BsCloud *cloud);

// Copy one point out of the cloud.
//
// # Safety
//
// `cloud` must be a live handle and `point` a valid pointer.
enum BsStatus bs_cloud_get(const struct BsCloud *cloud, uintptr_t index, struct BsPoint *point);

// Write the cloud as ASCII XYZ, one `x y z` line per point.
//
// # Safety
//
// `cloud` must be a live handle and `path` a NUL-terminated string.
enum BsStatus bs_cloud_write_xyz(const struct BsCloud *cloud, const char *path);

// Write the cloud as binary little-endian PLY with a per-point source
// label.
//
// # Safety
//
// `cloud` must be a live handle and `path` a NUL-terminated string.
enum BsStatus bs_cloud_write_ply(const struct BsCloud *cloud, const char *path);

// Release a cloud handle. Null is a no-op.
//
// # Safety
//
// `cloud` must be null or a live handle from [`bs_pipeline_run`]; the
// handle must not be used afterwards.
void bs_cloud_free(struct BsCloud *cloud);

// Score a prediction file against a ground-truth file and report the
// mean average precision and the mean IoU of matched pairs. Either
// output pointer may be null to skip that value.
//
// # Safety
//
// `pred_path` and `truth_path` must be NUL-terminated strings;
// `map_out` and `mean_iou_out` must each be null or valid pointers.
enum BsStatus bs_eval_detection_files(const char *pred_path,
                                      const char *truth_path,
                                      double iou_threshold,
                                      double *map_out,
                                      double *mean_iou_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BATHYSCAN_H */
