#ifndef GBC_CHROMA_H
#define GBC_CHROMA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GbcStatus {
  GBC_STATUS_OK = 0,
  GBC_STATUS_NULL_POINTER = 1,
  GBC_STATUS_INVALID_ARGUMENT = 2,
  GBC_STATUS_INVALID_DATA = 3,
  GBC_STATUS_INVALID_CONFIG = 4,
  GBC_STATUS_NOT_FOUND = 5,
  GBC_STATUS_COMPUTE = 6,
  GBC_STATUS_IO = 7,
  GBC_STATUS_BUFFER_TOO_SMALL = 8,
  GBC_STATUS_PANIC = 9,
} GbcStatus;

/**
 * Dataset plus its current configuration.
 */
typedef struct GbcSession GbcSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *gbc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gbc_version(void);

/**
 * Loads a CSV file (`x,y,<attr>...`) into a new session.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum GbcStatus gbc_session_from_csv_path(const char *path, struct GbcSession **out);

/**
 * Parses CSV text into a new session.
 *
 * # Safety
 * `csv` must be a NUL-terminated string; `out` must be writable.
 */
enum GbcStatus gbc_session_from_csv_text(const char *csv, struct GbcSession **out);

/**
 * Builds a session from `m` samples over `n` attributes. `locations` holds
 * `2m` values (x, y per sample), `values` holds `m * n` row-major values.
 *
 * # Safety
 * `names` must point to `n` NUL-terminated strings and the arrays must have
 * the stated lengths; `out` must be writable.
 */
enum GbcStatus gbc_session_from_arrays(const char *const *names,
                                       size_t n,
                                       const double *locations,
                                       const double *values,
                                       size_t m,
                                       struct GbcSession **out);

/**
 * Releases a session. Null is ignored.
 *
 * # Safety
 * `session` must come from a `gbc_session_*` constructor and not be used
 * afterwards.
 */
void gbc_session_free(struct GbcSession *session);

/**
 * Writes the sample count to `m` and the attribute count to `n`.
 *
 * # Safety
 * `session` must be a live handle; `m` and `n` must be writable.
 */
enum GbcStatus gbc_session_shape(const struct GbcSession *session, size_t *m, size_t *n);

/**
 * Merges a JSON object into the session config, e.g.
 * `{"warp_mode": "comparison_compression", "lightness": 0.6}`. The config is
 * unchanged on failure.
 *
 * # Safety
 * `session` must be a live handle; `patch_json` a NUL-terminated string.
 */
enum GbcStatus gbc_session_patch_config(struct GbcSession *session, const char *patch_json);

/**
 * Current config as a JSON string; release it with [`gbc_string_free`].
 *
 * # Safety
 * `session` must be a live handle; `out` must be writable.
 */
enum GbcStatus gbc_session_config_json(const struct GbcSession *session, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void gbc_string_free(char *s);

/**
 * Cyclic attribute order (attribute indices, `n` entries).
 *
 * # Safety
 * `session` must be a live handle; `out` null or writable for `*len`
 * entries; `len` writable.
 */
enum GbcStatus gbc_session_attribute_order(const struct GbcSession *session,
                                           size_t *out,
                                           size_t *len);

/**
 * Sample positions in the unit disc after the configured warp, as `2m`
 * interleaved x, y values.
 *
 * # Safety
 * As for [`gbc_session_attribute_order`].
 */
enum GbcStatus gbc_session_sample_points(const struct GbcSession *session,
                                         double *out,
                                         size_t *len);

/**
 * Sample colors as `3m` RGB bytes.
 *
 * # Safety
 * As for [`gbc_session_attribute_order`].
 */
enum GbcStatus gbc_session_sample_colors(const struct GbcSession *session,
                                         uint8_t *out,
                                         size_t *len);

/**
 * Renders the pseudo-colored map as row-major RGB bytes (top row first).
 * `width` and `height` receive the raster size.
 *
 * # Safety
 * As for [`gbc_session_attribute_order`]; `width` and `height` writable.
 */
enum GbcStatus gbc_session_render_map(const struct GbcSession *session,
                                      uint8_t *out,
                                      size_t *len,
                                      size_t *width,
                                      size_t *height);

/**
 * Writes map.png, legend.png, one attr_<name>.png per attribute and
 * layout.json into `dir`, creating it if needed.
 *
 * # Safety
 * `session` must be a live handle; `dir` a NUL-terminated string.
 */
enum GbcStatus gbc_session_write_outputs(const struct GbcSession *session, const char *dir);

/**
 * Color of the disc point (x, y) at lightness `l`, as 3 RGB bytes.
 *
 * # Safety
 * `rgb` must be writable for 3 bytes.
 */
enum GbcStatus gbc_disc_to_rgb(double x, double y, double l, uint8_t *rgb);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GBC_CHROMA_H */
