/* C interface to the v3s video-sampling library. */

#ifndef V3S_H
#define V3S_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from the v3s-capi crate; edit the Rust source, not this file. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call. Zero is success; everything else names the
 * failure class, with detail available from `v3s_last_error_message()`.
 */
typedef enum V3sStatus {
  /**
   * The call succeeded and all outputs are valid.
   */
  V3S_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  V3S_STATUS_NULL_ARGUMENT = 1,
  /**
   * An argument failed validation (bad factor, size, index, or enum tag).
   */
  V3S_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A numerically degenerate configuration (singular system, horizon point).
   */
  V3S_STATUS_NUMERICAL_ERROR = 3,
  /**
   * File or format trouble: I/O failure, bad magic, out-of-range samples.
   */
  V3S_STATUS_DATA_ERROR = 4,
  /**
   * A bug: an internal panic was caught at the boundary.
   */
  V3S_STATUS_INTERNAL_PANIC = 5,
} V3sStatus;

/**
 * Discriminant for [`V3sSpatialSpec`].
 */
typedef enum V3sSpatialKind {
  /**
   * Pass the frame through unchanged.
   */
  V3S_SPATIAL_KIND_IDENTITY = 0,
  /**
   * Stretch width by `a` and height by `b`; exactly one factor must be 1.
   */
  V3S_SPATIAL_KIND_SCALE = 1,
  /**
   * Shrink the `side` edge to `factor` times its length, centered.
   */
  V3S_SPATIAL_KIND_PROJECTION = 2,
} V3sSpatialKind;

/**
 * Which edge of the frame becomes the shortened head end of a projection.
 */
typedef enum V3sSide {
  V3S_SIDE_LEFT = 0,
  V3S_SIDE_RIGHT = 1,
  V3S_SIDE_TOP = 2,
  V3S_SIDE_BOTTOM = 3,
} V3sSide;

/**
 * Discriminant for [`V3sTemporalSpec`].
 */
typedef enum V3sTemporalKind {
  /**
   * Constant stride `s1`, producing an `l1`-frame clip.
   */
  V3S_TEMPORAL_KIND_SCALE = 0,
  /**
   * Stride `s1` for `l1` frames, then stride `s2` for `l2` more.
   */
  V3S_TEMPORAL_KIND_PROJECTION = 1,
} V3sTemporalKind;

/**
 * An in-memory video clip; opaque to C. Create with `v3s_clip_create` or
 * `v3s_clip_read`, release with `v3s_clip_free`.
 */
typedef struct V3sClip V3sClip;

/**
 * One spatial transformation class as a plain C struct. Only the fields
 * named by `kind` are read: `a`/`b` for scale, `factor`/`side` for
 * projection. Build with the `v3s_spatial_*` constructors rather than by
 * hand so unused fields carry harmless values.
 */
typedef struct V3sSpatialSpec {
  enum V3sSpatialKind kind;
  double a;
  double b;
  double factor;
  enum V3sSide side;
} V3sSpatialSpec;

/**
 * One temporal transformation class as a plain C struct. A scale spec reads
 * `s1`/`l1` only; a projection spec reads all four fields. Build with the
 * `v3s_temporal_*` constructors.
 */
typedef struct V3sTemporalSpec {
  enum V3sTemporalKind kind;
  size_t s1;
  size_t s2;
  size_t l1;
  size_t l2;
} V3sTemporalSpec;

/**
 * The shortened edge of a projection-warped frame: its pixel length and
 * which side it sits on.
 */
typedef struct V3sHeadEnd {
  size_t len;
  enum V3sSide side;
} V3sHeadEnd;

/**
 * Library version as a static NUL-terminated string.
 */
const char *v3s_version(void);

/**
 * Static name for a status code; never null, even for unknown values.
 */
const char *v3s_status_name(enum V3sStatus status);

/**
 * Message from this thread's most recent failure, NUL-terminated. Empty
 * until a call fails. Valid until the next failing call on the same thread.
 */
const char *v3s_last_error_message(void);

/**
 * Solves for the homography sending each `src` corner to the matching
 * `dst` corner and writes its eight coefficients to `out`.
 *
 * `src`, `dst`: corner arrays of 8 doubles; `out`: coefficient array of 8.
 *
 * # Safety
 * `src` and `dst` must point to 8 readable doubles each and `out` to 8
 * writable doubles, or be null (reported as `V3S_STATUS_NULL_ARGUMENT`).
 */
enum V3sStatus v3s_homography_solve(const double *src, const double *dst, double *out);

/**
 * Maps the point `(x, y)` through the homography with coefficients `h`.
 *
 * # Safety
 * `h` must point to 8 readable doubles; `out_x` and `out_y` must be
 * writable or null (reported, not dereferenced).
 */
enum V3sStatus v3s_homography_map_point(const double *h,
                                        double x,
                                        double y,
                                        double *out_x,
                                        double *out_y);

/**
 * Writes the coefficients of the inverse homography to `out`.
 *
 * # Safety
 * `h` must point to 8 readable doubles and `out` to 8 writable doubles.
 */
enum V3sStatus v3s_homography_invert(const double *h, double *out);

/**
 * The identity spatial spec.
 */
struct V3sSpatialSpec v3s_spatial_identity(void);

/**
 * An anisotropic scale spec stretching width by `a` and height by `b`.
 * Not validated here; invalid factors surface when the spec is used.
 */
struct V3sSpatialSpec v3s_spatial_scale(double a, double b);

/**
 * A projection spec shrinking `side` to `factor` times its length.
 * Not validated here; invalid factors surface when the spec is used.
 */
struct V3sSpatialSpec v3s_spatial_projection(double factor, enum V3sSide side);

/**
 * Checks a spec's parameters without applying it.
 *
 * # Safety
 * `spec` must point to a readable `V3sSpatialSpec` or be null.
 */
enum V3sStatus v3s_spatial_validate(const struct V3sSpatialSpec *spec);

/**
 * Writes the destination corners of `spec` for a `width` x `height` frame
 * into `out` (corner array of 8 doubles).
 *
 * # Safety
 * `spec` must be readable and `out` must point to 8 writable doubles.
 */
enum V3sStatus v3s_spatial_corners(const struct V3sSpatialSpec *spec,
                                   size_t width,
                                   size_t height,
                                   double *out);

/**
 * Writes the output canvas for `spec` applied to a `width` x `height`
 * frame: the corner bounding box rounded up to whole pixels.
 *
 * # Safety
 * `spec` must be readable; `out_width` and `out_height` must be writable.
 */
enum V3sStatus v3s_spatial_canvas(const struct V3sSpatialSpec *spec,
                                  size_t width,
                                  size_t height,
                                  size_t *out_width,
                                  size_t *out_height);

/**
 * Writes the homography sending the full `width` x `height` rectangle onto
 * the spec's destination corners (coefficient array of 8 doubles).
 *
 * # Safety
 * `spec` must be readable and `out` must point to 8 writable doubles.
 */
enum V3sStatus v3s_spatial_homography(const struct V3sSpatialSpec *spec,
                                      size_t width,
                                      size_t height,
                                      double *out);

/**
 * A constant-stride spec: every `s`-th frame, `l` frames long.
 * Not validated here; zero values surface when the spec is used.
 */
struct V3sTemporalSpec v3s_temporal_scale(size_t s, size_t l);

/**
 * A two-stage spec: stride `s1` for `l1` frames, then `s2` for `l2`.
 * Not validated here; bad stage values surface when the spec is used.
 */
struct V3sTemporalSpec v3s_temporal_projection(size_t s1, size_t s2, size_t l1, size_t l2);

/**
 * Checks a spec's parameters.
 *
 * # Safety
 * `spec` must point to a readable `V3sTemporalSpec` or be null.
 */
enum V3sStatus v3s_temporal_validate(const struct V3sTemporalSpec *spec);

/**
 * Writes the number of frames the spec selects (`l`, or `l1 + l2`).
 *
 * # Safety
 * `spec` must be readable and `out` writable.
 */
enum V3sStatus v3s_temporal_clip_len(const struct V3sTemporalSpec *spec, size_t *out);

/**
 * Writes the number of source frames the spec needs from its start frame:
 * the last selected index minus the first, plus one.
 *
 * # Safety
 * `spec` must be readable and `out` writable.
 */
enum V3sStatus v3s_temporal_required_span(const struct V3sTemporalSpec *spec, size_t *out);

/**
 * Writes the source frame indices the spec selects from a `video_len`-frame
 * video starting at frame `start`. `capacity` is the length of `out`;
 * `out_written` receives the count, which always equals the spec's clip
 * length on success.
 *
 * # Safety
 * `spec` must be readable, `out` must point to `capacity` writable
 * elements, and `out_written` must be writable.
 */
enum V3sStatus v3s_temporal_indices(const struct V3sTemporalSpec *spec,
                                    size_t video_len,
                                    size_t start,
                                    size_t *out,
                                    size_t capacity,
                                    size_t *out_written);

/**
 * Builds a clip from a sample buffer of `frames * height * width *
 * channels` floats in `[t][y][x][c]` order, values in `[0,1]`.
 *
 * On success `*out` owns the new clip.
 *
 * # Safety
 * `data` must point to `data_len` readable floats and `out` must be
 * writable.
 */
enum V3sStatus v3s_clip_create(size_t frames,
                               size_t height,
                               size_t width,
                               size_t channels,
                               const float *data,
                               size_t data_len,
                               struct V3sClip **out);

/**
 * Reads a clip file. On success `*out` owns the new clip.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum V3sStatus v3s_clip_read(const char *path, struct V3sClip **out);

/**
 * Writes the clip to a clip file, atomically replacing any existing file.
 *
 * # Safety
 * `clip` must be a live handle and `path` a NUL-terminated string.
 */
enum V3sStatus v3s_clip_write(const struct V3sClip *clip, const char *path);

/**
 * Number of frames; 0 if `clip` is null.
 *
 * # Safety
 * `clip` must be a live handle or null.
 */
size_t v3s_clip_frames(const struct V3sClip *clip);

/**
 * Frame height in pixels; 0 if `clip` is null.
 *
 * # Safety
 * `clip` must be a live handle or null.
 */
size_t v3s_clip_height(const struct V3sClip *clip);

/**
 * Frame width in pixels; 0 if `clip` is null.
 *
 * # Safety
 * `clip` must be a live handle or null.
 */
size_t v3s_clip_width(const struct V3sClip *clip);

/**
 * Channels per pixel; 0 if `clip` is null.
 *
 * # Safety
 * `clip` must be a live handle or null.
 */
size_t v3s_clip_channels(const struct V3sClip *clip);

/**
 * Total float count of the clip's sample buffer (`frames * height * width
 * * channels`); the capacity `v3s_clip_copy_data` needs. 0 if null.
 *
 * # Safety
 * `clip` must be a live handle or null.
 */
size_t v3s_clip_sample_count(const struct V3sClip *clip);

/**
 * Copies the clip's samples into `out` in `[t][y][x][c]` order. `capacity`
 * must be at least `v3s_clip_sample_count(clip)`.
 *
 * # Safety
 * `clip` must be a live handle and `out` must point to `capacity` writable
 * floats.
 */
enum V3sStatus v3s_clip_copy_data(const struct V3sClip *clip, float *out, size_t capacity);

/**
 * Builds a new clip from the given frame indices of an existing one, in
 * order, duplicates allowed. On success `*out` owns the new clip.
 *
 * # Safety
 * `clip` must be a live handle, `indices` must point to `count` readable
 * elements, and `out` must be writable.
 */
enum V3sStatus v3s_clip_select(const struct V3sClip *clip,
                               const size_t *indices,
                               size_t count,
                               struct V3sClip **out);

/**
 * Warps every frame through the spec's homography onto an `out_width` x
 * `out_height` canvas (inverse-mapped bilinear sampling, black outside).
 * Pass the dims from `v3s_spatial_canvas` to keep the whole image in view.
 * On success `*out` owns the new clip.
 *
 * # Safety
 * `clip` must be a live handle, `spec` readable, and `out` writable.
 */
enum V3sStatus v3s_clip_apply_spatial(const struct V3sClip *clip,
                                      const struct V3sSpatialSpec *spec,
                                      size_t out_width,
                                      size_t out_height,
                                      struct V3sClip **out);

/**
 * Resize-and-crop preprocessing for every frame: resize to `resize_to`
 * square, then cut the `crop_w` x `crop_h` window at `(crop_x, crop_y)`.
 *
 * `head_end` may be null. When it names an edge shorter than `resize_to`,
 * the square flush against that edge is cut out first and resized to the
 * crop window's size, keeping a strongly foreshortened region in view.
 * On success `*out` owns the new clip.
 *
 * # Safety
 * `clip` must be a live handle, `head_end` readable or null, and `out`
 * writable.
 */
enum V3sStatus v3s_clip_preprocess(const struct V3sClip *clip,
                                   size_t resize_to,
                                   size_t crop_x,
                                   size_t crop_y,
                                   size_t crop_w,
                                   size_t crop_h,
                                   const struct V3sHeadEnd *head_end,
                                   struct V3sClip **out);

/**
 * Releases a clip handle. Null is a no-op. The handle must not be used
 * afterwards.
 *
 * # Safety
 * `clip` must be a pointer previously returned through a `*mut *mut
 * V3sClip` output of this library, not yet freed, or null.
 */
void v3s_clip_free(struct V3sClip *clip);

#endif  /* V3S_H */
