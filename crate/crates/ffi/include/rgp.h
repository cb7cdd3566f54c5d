/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef RGP_H
#define RGP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RgpDataset {
  RGP_DATASET_EYEPACS = 0,
  RGP_DATASET_MESSIDOR = 1,
} RgpDataset;

typedef enum RgpStatus {
  RGP_STATUS_OK = 0,
  RGP_STATUS_NULL_POINTER = 1,
  RGP_STATUS_INVALID_ARGUMENT = 2,
  RGP_STATUS_BLANK_IMAGE = 3,
  RGP_STATUS_AUC_UNDEFINED = 4,
  RGP_STATUS_INTERNAL = 5,
} RgpStatus;

typedef enum RgpTask {
  RGP_TASK_NORMAL_ABNORMAL = 0,
  RGP_TASK_REFERABLE = 1,
  RGP_TASK_TERNARY = 2,
  RGP_TASK_QUATERNARY = 3,
} RgpTask;

/**
 * Opaque image handle.
 */
typedef struct RgpImage RgpImage;

/**
 * Preprocessing parameters; start from `rgp_preprocess_config_default`.
 */
typedef struct RgpPreprocessConfig {
  size_t clahe_tiles_x;
  size_t clahe_tiles_y;
  double clahe_clip_limit;
  double blur_radius_fraction;
  double subtraction_gain;
  double subtraction_offset;
  size_t output_size;
} RgpPreprocessConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Free the
 * result with `rgp_string_free`.
 */
char *rgp_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void rgp_string_free(char *s);

/**
 * Copies `len == width * height * 3` interleaved RGB bytes into a new image.
 *
 * # Safety
 * `data` must point to `len` readable bytes; `out` must be writable.
 */
enum RgpStatus rgp_image_new_rgb(size_t width,
                                 size_t height,
                                 const uint8_t *data,
                                 size_t len,
                                 struct RgpImage **out);

/**
 * # Safety
 * `image` must be NULL or a handle from this library not yet freed.
 */
void rgp_image_free(struct RgpImage *image);

/**
 * # Safety
 * `image` must be a live handle; the out pointers must be writable.
 */
enum RgpStatus rgp_image_dims(const struct RgpImage *image,
                              size_t *width,
                              size_t *height,
                              size_t *channels);

/**
 * Borrows the interleaved samples; valid until the image is freed.
 *
 * # Safety
 * `image` must be a live handle; the out pointers must be writable.
 */
enum RgpStatus rgp_image_data(const struct RgpImage *image, const uint8_t **data, size_t *len);

struct RgpPreprocessConfig rgp_preprocess_config_default(void);

/**
 * Crop, equalize, subtract the local average and resize. On success `*out`
 * receives a new RGB image of side `config->output_size`.
 *
 * # Safety
 * `image` must be a live handle, `config` readable, `out` writable.
 */
enum RgpStatus rgp_preprocess(const struct RgpImage *image,
                              const struct RgpPreprocessConfig *config,
                              struct RgpImage **out);

/**
 * Otsu threshold of a 256-bin histogram.
 *
 * # Safety
 * `bins` must point to 256 readable counts; `out` must be writable.
 */
enum RgpStatus rgp_otsu_threshold(const uint64_t *bins, uint8_t *out);

/**
 * Class index of a native grade under `task`.
 *
 * # Safety
 * `out` must be writable.
 */
enum RgpStatus rgp_map_grade(enum RgpDataset dataset,
                             int64_t grade,
                             enum RgpTask task,
                             size_t *out);

/**
 * Area under the ROC curve; `labels[i] != 0` marks a positive.
 *
 * # Safety
 * `scores` and `labels` must hold `n` items; `out` must be writable.
 */
enum RgpStatus rgp_auc(const double *scores, const uint8_t *labels, size_t n, double *out);

/**
 * Best sensitivity with specificity >= `target`. Samples with
 * `score >= *threshold` are positive; `*has_threshold` is 0 when the
 * chosen cut calls nothing positive.
 *
 * # Safety
 * `scores` and `labels` must hold `n` items; out pointers must be writable.
 */
enum RgpStatus rgp_sensitivity_at_specificity(const double *scores,
                                              const uint8_t *labels,
                                              size_t n,
                                              double target,
                                              double *sensitivity,
                                              double *specificity,
                                              double *threshold,
                                              uint8_t *has_threshold);

/**
 * Mean of `models` probability rows (row-major, `classes` wide) and its
 * argmax, ties to the smallest index.
 *
 * # Safety
 * `probs` must hold `models * classes` values, `fused` room for `classes`,
 * and `predicted` must be writable.
 */
enum RgpStatus rgp_fuse_mean(const double *probs,
                             size_t models,
                             size_t classes,
                             double *fused,
                             size_t *predicted);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RGP_H */
