#ifndef MLSYS_H
#define MLSYS_H

#include <stdbool.h>
#include <stddef.h>

typedef enum MlsysStatus {
  MLSYS_STATUS_OK = 0,
  MLSYS_STATUS_NULL_ARGUMENT = 1,
  MLSYS_STATUS_INVALID_INPUT = 2,
  MLSYS_STATUS_CHECK_FAILED = 3,
  MLSYS_STATUS_NUMERIC = 4,
  MLSYS_STATUS_PANIC = 5,
} MlsysStatus;

// Opaque handle to a parsed Lie system.
typedef struct MlsysSystem MlsysSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failing call on this thread; empty after success.
// The pointer stays valid until the next call on the same thread.
const char *mlsys_last_error(void);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void mlsys_string_free(char *s);

// Load a system from a JSON file path or a built-in catalog id.
//
// # Safety
// `source` must be a NUL-terminated string and `out` a valid pointer.
enum MlsysStatus mlsys_system_load(const char *source, struct MlsysSystem **out);

// Release a system handle. Null is ignored.
//
// # Safety
// `sys` must come from [`mlsys_system_load`] and not have been freed.
void mlsys_system_free(struct MlsysSystem *sys);

// Manifold dimension and number of basis fields.
//
// # Safety
// `sys` must be a live handle; the output pointers may be null.
enum MlsysStatus mlsys_system_dims(const struct MlsysSystem *sys,
                                   size_t *n_coords,
                                   size_t *n_fields);

// Bracket of two named fields, as a JSON array of component strings.
//
// # Safety
// `sys` must be a live handle, `a` and `b` NUL-terminated, `out` valid.
enum MlsysStatus mlsys_bracket(const struct MlsysSystem *sys,
                               const char *a,
                               const char *b,
                               char **out);

// Structure constants as JSON `[{"alpha","beta","gamma","value"}, ...]`.
//
// # Safety
// `sys` must be a live handle and `out` valid.
enum MlsysStatus mlsys_structure_constants(const struct MlsysSystem *sys, char **out);

// Whether every adjoint trace vanishes.
//
// # Safety
// `sys` must be a live handle and `out` valid.
enum MlsysStatus mlsys_is_unimodular(const struct MlsysSystem *sys, bool *out);

// The invariant volume form, rendered as text. Fails with
// `CheckFailed` when the algebra is not unimodular.
//
// # Safety
// `sys` must be a live handle and `out` valid.
enum MlsysStatus mlsys_invariant_volume(const struct MlsysSystem *sys, char **out);

// Run every stored check. `failed` receives the failure count and `out`
// (optional) a JSON report. Returns `Ok` even when checks fail.
//
// # Safety
// `sys` must be a live handle; `failed` valid; `out` null or valid.
enum MlsysStatus mlsys_replicate(const struct MlsysSystem *sys,
                                 bool numeric,
                                 size_t *failed,
                                 char **out);

// Number of named constants of motion stored with the system.
//
// # Safety
// `sys` must be a live handle and `out` valid.
enum MlsysStatus mlsys_constant_count(const struct MlsysSystem *sys, size_t *out);

// Evaluate a named constant of motion at a point of the m-fold product.
// `point` holds the m coordinate blocks followed by the parameter values;
// `m_out` (optional) receives the number of blocks expected.
//
// # Safety
// `sys` must be a live handle, `name` NUL-terminated, `point` readable for
// `len` values and `out` valid.
enum MlsysStatus mlsys_constant_eval(const struct MlsysSystem *sys,
                                     const char *name,
                                     const double *point,
                                     size_t len,
                                     size_t *m_out,
                                     double *out);

// Fixed-step RK4 from `t0` to `t1`. Writes the final state to `x_out`
// (length `n`). `params` may be null when `n_params` is 0, in which case
// the system's stored parameter values are used.
//
// # Safety
// `sys` must be a live handle; `x0` and `x_out` hold `n` values; `params`
// holds `n_params` values.
enum MlsysStatus mlsys_integrate_rk4(const struct MlsysSystem *sys,
                                     const double *x0,
                                     size_t n,
                                     double t0,
                                     double t1,
                                     double step,
                                     const double *params,
                                     size_t n_params,
                                     double *x_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MLSYS_H */
