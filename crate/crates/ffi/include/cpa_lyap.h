#ifndef CPA_LYAP_H
#define CPA_LYAP_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CpaStatus {
  CPA_STATUS_OK = 0,
  CPA_STATUS_NULL_POINTER = 1,
  CPA_STATUS_INVALID_ARGUMENT = 2,
  CPA_STATUS_PARSE = 3,
  CPA_STATUS_MESH = 4,
  CPA_STATUS_SYNTHESIS = 5,
  CPA_STATUS_PANIC = 6,
} CpaStatus;

/**
 * Simplicial mesh.
 */
typedef struct CpaMesh CpaMesh;

/**
 * Outcome of a synthesis run.
 */
typedef struct CpaReport CpaReport;

/**
 * Dynamics and domain.
 */
typedef struct CpaSystem CpaSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call on the same thread.
 */
const char *cpa_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void cpa_string_free(char *s);

/**
 * Builds a system from `dim` expression strings over the box `[lo, hi]`.
 *
 * # Safety
 * `dynamics` must hold `dim` C strings; `lo` and `hi` must hold `dim` values.
 */
enum CpaStatus cpa_system_new(const char *name,
                              const char *const *dynamics,
                              size_t dim,
                              const double *lo,
                              const double *hi,
                              struct CpaSystem **system);

/**
 * One of the built-in benchmark systems `"A"` to `"D"`.
 *
 * # Safety
 * `name` must be a C string and `system` writable.
 */
enum CpaStatus cpa_system_builtin(const char *name, struct CpaSystem **system);

/**
 * # Safety
 * `system` must come from this library and not be freed twice.
 */
void cpa_system_free(struct CpaSystem *system);

/**
 * # Safety
 * `system` must be a live handle.
 */
size_t cpa_system_dim(const struct CpaSystem *system);

/**
 * Uniform Freudenthal grid over the system domain with one spacing per axis.
 *
 * # Safety
 * `spacing` must hold `dim` values.
 */
enum CpaStatus cpa_mesh_grid(const struct CpaSystem *system,
                             const double *spacing,
                             struct CpaMesh **mesh);

/**
 * # Safety
 * `mesh` must come from this library and not be freed twice.
 */
void cpa_mesh_free(struct CpaMesh *mesh);

/**
 * # Safety
 * `mesh` must be a live handle.
 */
size_t cpa_mesh_num_vertices(const struct CpaMesh *mesh);

/**
 * # Safety
 * `mesh` must be a live handle.
 */
size_t cpa_mesh_num_simplices(const struct CpaMesh *mesh);

/**
 * Copies the coordinates of vertex `index` into `coords` (dimension entries).
 *
 * # Safety
 * `coords` must have room for the mesh dimension.
 */
enum CpaStatus cpa_mesh_vertex(const struct CpaMesh *mesh, size_t index, double *coords);

/**
 * Copies the vertex indices of simplex `index` into `vertices`
 * (dimension + 1 entries).
 *
 * # Safety
 * `vertices` must have room for dimension + 1 values.
 */
enum CpaStatus cpa_mesh_simplex(const struct CpaMesh *mesh, size_t index, size_t *vertices);

/**
 * Longest-edge bisection of simplex `index`, in place.
 *
 * # Safety
 * `mesh` must be a live handle.
 */
enum CpaStatus cpa_mesh_refine(struct CpaMesh *mesh, size_t index);

/**
 * Mesh as JSON; release with [`cpa_string_free`].
 *
 * # Safety
 * `json` must be writable.
 */
enum CpaStatus cpa_mesh_to_json(const struct CpaMesh *mesh, char **json);

/**
 * Adaptive refinement starting from `mesh`; the mesh handle is not modified.
 *
 * # Safety
 * All handles must be live and `report` writable.
 */
enum CpaStatus cpa_adapt(const struct CpaSystem *system,
                         const struct CpaMesh *mesh,
                         double alpha,
                         size_t max_iterations,
                         struct CpaReport **report);

/**
 * Runs a JSON configuration (same schema as the command-line tool).
 *
 * # Safety
 * `config_json` must be a C string and `report` writable.
 */
enum CpaStatus cpa_run_config(const char *config_json, struct CpaReport **report);

/**
 * # Safety
 * `report` must come from this library and not be freed twice.
 */
void cpa_report_free(struct CpaReport *report);

/**
 * True when synthesis succeeded and the certificate rechecks.
 *
 * # Safety
 * `report` must be a live handle.
 */
bool cpa_report_viable(const struct CpaReport *report);

/**
 * Number of slack programs solved.
 *
 * # Safety
 * `report` must be a live handle.
 */
size_t cpa_report_iterations(const struct CpaReport *report);

/**
 * Simplices added to the initial mesh.
 *
 * # Safety
 * `report` must be a live handle.
 */
ptrdiff_t cpa_report_delta_simplices(const struct CpaReport *report);

/**
 * Copy of the final mesh; release with [`cpa_mesh_free`].
 *
 * # Safety
 * `report` must be a live handle and `mesh` writable.
 */
enum CpaStatus cpa_report_mesh(const struct CpaReport *report, struct CpaMesh **mesh);

/**
 * Final candidate as JSON; release with [`cpa_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `json` writable.
 */
enum CpaStatus cpa_report_candidate_json(const struct CpaReport *report, char **json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CPA_LYAP_H */
