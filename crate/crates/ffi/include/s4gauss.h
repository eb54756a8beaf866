#ifndef S4GAUSS_H
#define S4GAUSS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Number of values per node returned by `s4_analysis_field_row`, in the
 column order of the fields CSV.
 */
#define S4_FIELD_COLUMNS 18

typedef enum S4Status {
  S4_STATUS_OK = 0,
  S4_STATUS_NULL_POINTER = 1,
  S4_STATUS_INVALID_ARGUMENT = 2,
  S4_STATUS_CONFIG_ERROR = 3,
  S4_STATUS_COMPUTE_ERROR = 4,
  S4_STATUS_IO_ERROR = 5,
  S4_STATUS_OUT_OF_RANGE = 6,
  S4_STATUS_PANIC = 7,
} S4Status;

/*
 Opaque analysis handle.
 */
typedef struct S4Analysis S4Analysis;

typedef struct S4EnergySummary {
  double energy;
  double willmore;
  double total_k;
  double area;
  double identity_residual;
  double bound_slack;
  /*
   Area outside a truncated sphere chart; NaN when not applicable.
   */
  double tail;
  uint32_t genus;
} S4EnergySummary;

typedef struct S4Verdict {
  double tolerance;
  double max_m;
  double max_grad_h;
  double route_gap;
  int harmonic_by_m;
  int harmonic_by_grad_h;
} S4Verdict;

typedef struct S4FamilySummary {
  double lambda_re;
  double lambda_im;
  double orthogonality;
  double sphere_deviation;
  double max_u_dev;
  double max_h1_dev;
  double max_xi1_dev;
  double max_k_dev;
  /*
   NaN when the direction is not periodic.
   */
  double monodromy_x;
  double monodromy_y;
} S4FamilySummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Builds an analysis from configuration text. Relative grid-file paths
 resolve against the current directory.

 # Safety
 `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum S4Status s4_analysis_from_config_text(const char *text, struct S4Analysis **out);

/*
 Builds an analysis from a configuration file.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum S4Status s4_analysis_from_config_file(const char *path, struct S4Analysis **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `handle` must come from this library and not be used afterwards.
 */
void s4_analysis_free(struct S4Analysis *handle);

/*
 Grid dimensions; nodes are numbered `i + nx * j`.

 # Safety
 `handle` must be live; `nx`, `ny` valid pointers.
 */
enum S4Status s4_analysis_grid_size(const struct S4Analysis *handle, size_t *nx, size_t *ny);

/*
 Writes the `S4_FIELD_COLUMNS` values of node `node`:
 `x, y, u, h1, h2, re xi1, im xi1, re xi2, im xi2, re sigma, im sigma,
 K, Kperp, res_G, res_C1, res_C2, res_R, density`.

 # Safety
 `handle` must be live; `out` must hold `S4_FIELD_COLUMNS` doubles.
 */
enum S4Status s4_analysis_field_row(const struct S4Analysis *handle, size_t node, double *out);

/*
 Energy totals.

 # Safety
 `handle` must be live; `out` a valid pointer.
 */
enum S4Status s4_analysis_energy(const struct S4Analysis *handle, struct S4EnergySummary *out);

/*
 Harmonicity verdict; `tolerance <= 0` selects the grid-derived default.

 # Safety
 `handle` must be live; `out` a valid pointer.
 */
enum S4Status s4_analysis_verdict(const struct S4Analysis *handle,
                                  double tolerance,
                                  struct S4Verdict *out);

/*
 Integrates the family member at `lambda = re + i im` (on the unit
 circle) with the configured path settings.

 # Safety
 `handle` must be live; `out` a valid pointer.
 */
enum S4Status s4_analysis_family(const struct S4Analysis *handle,
                                 double re,
                                 double im,
                                 struct S4FamilySummary *out);

/*
 Runs the residual suite: `*passed` is 1 when every check passes and
 `*failed` counts the failing checks.

 # Safety
 `handle` must be live; `passed`, `failed` valid pointers.
 */
enum S4Status s4_analysis_verify(const struct S4Analysis *handle, int *passed, size_t *failed);

/*
 Message of the last failed call on this thread (empty after success).
 Valid until the next call into this library from the same thread.
 */
const char *s4_last_error_message(void);

/*
 Library version, a static NUL-terminated string.
 */
const char *s4_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* S4GAUSS_H */
