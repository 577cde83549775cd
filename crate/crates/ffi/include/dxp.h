#ifndef DXP_H
#define DXP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DxpStatus {
  DXP_STATUS_OK = 0,
  DXP_STATUS_ERROR = 1,
  /**
   * The ball holds no adversarial example: no CXp, and the only AXp is empty.
   */
  DXP_STATUS_NO_ADV_EXAMPLE = 2,
  DXP_STATUS_NULL_POINTER = 3,
  DXP_STATUS_INVALID_ARGUMENT = 4,
  DXP_STATUS_PARSE = 5,
  DXP_STATUS_IO = 6,
  DXP_STATUS_ORACLE = 7,
  DXP_STATUS_PANIC = 8,
  /**
   * The caller's buffer is too short; the required length was written.
   */
  DXP_STATUS_BUFFER_TOO_SMALL = 9,
} DxpStatus;

typedef enum DxpNorm {
  DXP_NORM_L0 = 0,
  DXP_NORM_L1 = 1,
  DXP_NORM_L2 = 2,
  DXP_NORM_LINF = 3,
} DxpNorm;

typedef enum DxpAlgo {
  DXP_ALGO_LINEAR = 0,
  DXP_ALGO_DICHO = 1,
  DXP_ALGO_SWIFT = 2,
} DxpAlgo;

typedef enum DxpKind {
  DXP_KIND_AXP = 0,
  DXP_KIND_CXP = 1,
} DxpKind;

typedef struct DxpExplanation DxpExplanation;

/**
 * A classifier, an instance and the oracle used to query them.
 */
typedef struct DxpProblem DxpProblem;

/**
 * Result of an enumeration.
 */
typedef struct DxpSets DxpSets;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *dxp_last_error(void);

const char *dxp_version(void);

/**
 * Loads a model document and an instance document from disk.
 *
 * # Safety
 * Paths must be nul-terminated strings; `out` must be writable.
 */
enum DxpStatus dxp_problem_load(const char *model_path,
                                const char *instance_path,
                                struct DxpProblem **out);

/**
 * Builds a problem from a model document held in memory. The instance label
 * is whatever the model predicts at `point`.
 *
 * # Safety
 * `model_json` must be a nul-terminated string and `point` must hold `len`
 * values.
 */
enum DxpStatus dxp_problem_from_json(const char *model_json,
                                     const double *point,
                                     size_t len,
                                     struct DxpProblem **out);

/**
 * Replaces the oracle: `auto`, `exhaustive`, `linear` or `external:<command>`.
 * A `timeout_ms` of 0 means no per-query timeout.
 *
 * # Safety
 * `problem` must come from this library; `spec` must be nul-terminated.
 */
enum DxpStatus dxp_problem_set_oracle(struct DxpProblem *problem,
                                      const char *spec,
                                      uint64_t timeout_ms);

/**
 * # Safety
 * `problem` must come from this library and not be used afterwards.
 */
void dxp_problem_free(struct DxpProblem *problem);

/**
 * # Safety
 * `problem` must come from this library.
 */
size_t dxp_problem_num_features(const struct DxpProblem *problem);

/**
 * Predicted class of the instance.
 *
 * # Safety
 * `problem` must come from this library.
 */
size_t dxp_problem_label(const struct DxpProblem *problem);

/**
 * One CXp. `workers` is only read by [`DxpAlgo::Swift`].
 *
 * # Safety
 * `problem` must come from this library; `out` must be writable.
 */
enum DxpStatus dxp_cxp(const struct DxpProblem *problem,
                       enum DxpNorm norm,
                       double epsilon,
                       enum DxpAlgo algo,
                       size_t workers,
                       struct DxpExplanation **out);

/**
 * One AXp, shrunk from the full feature set.
 *
 * # Safety
 * `problem` must come from this library; `out` must be writable.
 */
enum DxpStatus dxp_axp(const struct DxpProblem *problem,
                       enum DxpNorm norm,
                       double epsilon,
                       struct DxpExplanation **out);

/**
 * A CXp of minimum size.
 *
 * # Safety
 * `problem` must come from this library; `out` must be writable.
 */
enum DxpStatus dxp_min_cxp(const struct DxpProblem *problem,
                           enum DxpNorm norm,
                           double epsilon,
                           struct DxpExplanation **out);

/**
 * # Safety
 * `e` must come from this library.
 */
enum DxpKind dxp_explanation_kind(const struct DxpExplanation *e);

/**
 * # Safety
 * `e` must come from this library.
 */
size_t dxp_explanation_len(const struct DxpExplanation *e);

/**
 * # Safety
 * `e` must come from this library.
 */
uint64_t dxp_explanation_oracle_calls(const struct DxpExplanation *e);

/**
 * Copies the 1-based features into `buf`, ascending.
 *
 * # Safety
 * `e` must come from this library; `buf` must hold `cap` values and
 * `written` must be writable.
 */
enum DxpStatus dxp_explanation_features(const struct DxpExplanation *e,
                                        size_t *buf,
                                        size_t cap,
                                        size_t *written);

/**
 * # Safety
 * `e` must come from this library and not be used afterwards.
 */
void dxp_explanation_free(struct DxpExplanation *e);

/**
 * Enumerates AXps and CXps. A `limit` of 0 means no limit.
 *
 * # Safety
 * `problem` must come from this library; `out` must be writable.
 */
enum DxpStatus dxp_enumerate(const struct DxpProblem *problem,
                             enum DxpNorm norm,
                             double epsilon,
                             size_t limit,
                             struct DxpSets **out);

/**
 * # Safety
 * `sets` must come from this library.
 */
size_t dxp_sets_count(const struct DxpSets *sets, enum DxpKind kind);

/**
 * Whether the enumeration ran to the end rather than stopping at the limit.
 *
 * # Safety
 * `sets` must come from this library.
 */
bool dxp_sets_complete(const struct DxpSets *sets);

/**
 * Copies the `index`-th explanation of `kind`, in discovery order.
 *
 * # Safety
 * `sets` must come from this library; `buf` must hold `cap` values and
 * `written` must be writable.
 */
enum DxpStatus dxp_sets_get(const struct DxpSets *sets,
                            enum DxpKind kind,
                            size_t index,
                            size_t *buf,
                            size_t cap,
                            size_t *written);

/**
 * Per-feature attribution: the fraction of CXps containing each feature.
 *
 * # Safety
 * `sets` must come from this library; `buf` must hold `cap` values and
 * `written` must be writable.
 */
enum DxpStatus dxp_sets_ffa(const struct DxpSets *sets, double *buf, size_t cap, size_t *written);

/**
 * # Safety
 * `sets` must come from this library and not be used afterwards.
 */
void dxp_sets_free(struct DxpSets *sets);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DXP_H */
