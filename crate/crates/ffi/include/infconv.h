#ifndef INFCONV_H
#define INFCONV_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Status codes returned by every fallible function.
typedef enum InfconvStatus {
  INFCONV_OK = 0,
  INFCONV_ERR_NULL_POINTER = 1,
  INFCONV_ERR_INVALID_INPUT = 2,
  INFCONV_ERR_DIMENSION = 3,
  INFCONV_ERR_PRECONDITION = 4,
  INFCONV_ERR_DOMAIN_EMPTY = 5,
  INFCONV_ERR_INTERNAL = 6,
  INFCONV_ERR_PANIC = 7,
} InfconvStatus;

typedef enum InfconvKind {
  // Parameter is ε ≥ 0.
  INFCONV_FRECHET = 0,
  // Parameter is s > 0.
  INFCONV_HOLDER = 1,
} InfconvKind;

typedef enum InfconvVerdict {
  INFCONV_MEMBER = 0,
  INFCONV_NON_MEMBER = 1,
  INFCONV_UNDETERMINED = 2,
} InfconvVerdict;

// Records of a verification run.
typedef struct InfconvReport InfconvReport;

// A parsed scene together with its gauge and infimal convolution.
typedef struct InfconvScene InfconvScene;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into this library on the same thread.
const char *infconv_last_error(void);

// Parses a JSON scene. On success `*out` owns a handle to be released with
// [`infconv_scene_free`].
//
// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
enum InfconvStatus infconv_scene_new(const char *json, struct InfconvScene **out);

// # Safety
// `scene` must be null or a handle from [`infconv_scene_new`] not yet freed.
void infconv_scene_free(struct InfconvScene *scene);

// Dimension of the scene, or 0 for a null handle.
//
// # Safety
// `scene` must be null or a live handle.
size_t infconv_scene_dimension(const struct InfconvScene *scene);

// Gauge of the scene body at `x[0..n]`; `+∞` is reported as `INFINITY`.
//
// # Safety
// `scene` must be a live handle, `x` must point to `n` doubles and `value`
// must be valid for writes.
enum InfconvStatus infconv_gauge(const struct InfconvScene *scene,
                                 const double *x,
                                 size_t n,
                                 double *value);

// Value of `T = φ □ f` at `x[0..n]`; `approximate` is set when the value
// is a grid-search upper bound.
//
// # Safety
// As for [`infconv_gauge`]; `approximate` may be null.
enum InfconvStatus infconv_value(const struct InfconvScene *scene,
                                 const double *x,
                                 size_t n,
                                 double *value,
                                 bool *approximate);

// Whether `x[0..n]` lies in S₀, the set where T agrees with f.
//
// # Safety
// As for [`infconv_gauge`].
enum InfconvStatus infconv_in_s0(const struct InfconvScene *scene,
                                 const double *x,
                                 size_t n,
                                 bool *inside);

// Membership of `xstar` in the subdifferential of T at `x` (`lhs`) and in
// the right-hand side set built from f and φ (`rhs`). `param` is ε for
// Fréchet and s for Hölder. `x` must lie in S₀.
//
// # Safety
// `x` and `xstar` must point to `n` doubles; `lhs` and `rhs` must be valid
// for writes.
enum InfconvStatus infconv_subdiff(const struct InfconvScene *scene,
                                   const double *x,
                                   const double *xstar,
                                   size_t n,
                                   enum InfconvKind kind,
                                   double param,
                                   enum InfconvVerdict *lhs,
                                   enum InfconvVerdict *rhs);

// Runs the verification suite described by a JSON config; a null `config`
// selects the bundled suite. The report handle is released with
// [`infconv_report_free`].
//
// # Safety
// `config` must be null or a nul-terminated string; `out` must be valid.
enum InfconvStatus infconv_verify(const char *config, uint64_t seed, struct InfconvReport **out);

// # Safety
// `report` must be null or a handle from [`infconv_verify`] not yet freed.
void infconv_report_free(struct InfconvReport *report);

// True when no check failed. A null handle reports false.
//
// # Safety
// `report` must be null or a live handle.
bool infconv_report_passed(const struct InfconvReport *report);

// Number of check records.
//
// # Safety
// `report` must be null or a live handle.
size_t infconv_report_len(const struct InfconvReport *report);

// The records as line-delimited JSON, owned by the report.
//
// # Safety
// `report` must be null or a live handle.
const char *infconv_report_jsonl(const struct InfconvReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INFCONV_H */
