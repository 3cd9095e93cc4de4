#ifndef NDSPLINE_H
#define NDSPLINE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NdsStatus {
  NDS_STATUS_OK = 0,
  NDS_STATUS_NULL_POINTER = 1,
  NDS_STATUS_INVALID_ARGUMENT = 2,
  NDS_STATUS_INVALID_MESH = 3,
  NDS_STATUS_POINT_OUTSIDE_DOMAIN = 4,
  NDS_STATUS_UNKNOWN_PROBLEM = 5,
  NDS_STATUS_SINGULAR_SYSTEM = 6,
  NDS_STATUS_NO_CONVERGENCE = 7,
  NDS_STATUS_IO = 8,
  NDS_STATUS_PANIC = 9,
} NdsStatus;

// Triangulation handle.
typedef struct NdsMesh NdsMesh;

// Spline solution of a built-in problem on a mesh.
typedef struct NdsSolution NdsSolution;

// Discretization and solver settings.
typedef struct NdsSolveOptions {
  uint32_t degree;
  uint32_t dual_degree;
  // Degree of the coefficient interpolant.
  uint32_t k2;
  // 0 = direct, 1 = iterative.
  uint32_t method;
  double tol;
  uint32_t max_it;
  double rho;
  double rank_tol;
} NdsSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until
// the next failing call on the same thread.
const char *nds_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *nds_version(void);

struct NdsSolveOptions nds_solve_options_default(void);

// Uniform `nx x ny` triangulation of a rectangle, two triangles per cell.
//
// # Safety
// `out` must be a valid pointer.
enum NdsStatus nds_mesh_rectangle(double x0,
                                  double y0,
                                  double x1,
                                  double y1,
                                  uint32_t nx,
                                  uint32_t ny,
                                  struct NdsMesh **out);

// Mesh from `nv` vertices (`xy` holds x0, y0, x1, y1, ...) and `nt`
// triangles given as zero-based vertex triples.
//
// # Safety
// `xy` must point to `2 * nv` doubles, `tri` to `3 * nt` integers.
enum NdsStatus nds_mesh_new(const double *xy,
                            size_t nv,
                            const uint32_t *tri,
                            size_t nt,
                            struct NdsMesh **out);

// Level-`level` mesh of a built-in problem.
//
// # Safety
// `problem` must be a NUL-terminated string, `out` a valid pointer.
enum NdsStatus nds_problem_mesh(const char *problem, uint32_t level, struct NdsMesh **out);

// New mesh obtained by `times` uniform refinements of `mesh`.
//
// # Safety
// `mesh` must be a live handle, `out` a valid pointer.
enum NdsStatus nds_mesh_refine(const struct NdsMesh *mesh, uint32_t times, struct NdsMesh **out);

// # Safety
// `mesh` must be a live handle; the out pointers may be null.
enum NdsStatus nds_mesh_counts(const struct NdsMesh *mesh,
                               size_t *vertices,
                               size_t *triangles,
                               size_t *edges);

// Mesh size (longest edge) and shape parameter.
//
// # Safety
// `mesh` must be a live handle; the out pointers may be null.
enum NdsStatus nds_mesh_size(const struct NdsMesh *mesh, double *h, double *shape);

// Containing triangle and barycentric coordinates of `(x, y)`.
//
// # Safety
// `mesh` must be a live handle, `triangle` valid, `bary` null or three
// doubles.
enum NdsStatus nds_mesh_locate(const struct NdsMesh *mesh,
                               double x,
                               double y,
                               size_t *triangle,
                               double *bary);

// # Safety
// `mesh` must be null or a handle not yet freed.
void nds_mesh_free(struct NdsMesh *mesh);

// Solves a built-in problem on `mesh`. `options` may be null for the
// defaults.
//
// # Safety
// `problem` must be a NUL-terminated string, `mesh` a live handle,
// `options` null or valid, `out` a valid pointer.
enum NdsStatus nds_solve_problem(const char *problem,
                                 const struct NdsMesh *mesh,
                                 const struct NdsSolveOptions *options,
                                 struct NdsSolution **out);

// Evaluates the solution at `n` points.
//
// # Safety
// `solution` must be a live handle; `x`, `y` and `values` must hold `n`
// doubles.
enum NdsStatus nds_solution_eval(const struct NdsSolution *solution,
                                 const double *x,
                                 const double *y,
                                 size_t n,
                                 double *values);

// RMSE of value, gradient and Hessian on a `grid_n x grid_n` lattice,
// written to `errors[0..3]`.
//
// # Safety
// `solution` must be a live handle, `errors` three doubles.
enum NdsStatus nds_solution_errors(const struct NdsSolution *solution,
                                   uint32_t grid_n,
                                   double *errors);

// Constraint and relative KKT residuals of the solve.
//
// # Safety
// `solution` must be a live handle; the out pointers may be null.
enum NdsStatus nds_solution_residuals(const struct NdsSolution *solution,
                                      double *constraint,
                                      double *kkt);

// # Safety
// `solution` must be null or a handle not yet freed.
void nds_solution_free(struct NdsSolution *solution);

// Convergence study over levels `1..=levels`, rendered as a text
// (`csv == 0`) or CSV table. The string is released with
// [`nds_string_free`]. Failed levels are reported in the table and make
// the call return [`NdsStatus::NoConvergence`] or the matching error.
//
// # Safety
// `problem` must be a NUL-terminated string, `options` null or valid,
// `out` a valid pointer.
enum NdsStatus nds_study_run(const char *problem,
                             const struct NdsSolveOptions *options,
                             uint32_t levels,
                             uint32_t grid_n,
                             int32_t csv,
                             char **out);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void nds_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NDSPLINE_H */
