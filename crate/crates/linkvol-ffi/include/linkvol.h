#ifndef LINKVOL_H
#define LINKVOL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LvStatus {
  LV_STATUS_OK = 0,
  LV_STATUS_NULL_POINTER = 1,
  LV_STATUS_INVALID_ARGUMENT = 2,
  LV_STATUS_DIAGRAM = 3,
  LV_STATUS_REPRESENTATION = 4,
  LV_STATUS_COLORING = 5,
  LV_STATUS_POTENTIAL = 6,
  LV_STATUS_SOLVER = 7,
  LV_STATUS_NUMERICS = 8,
  LV_STATUS_PANIC = 9,
} LvStatus;

typedef struct LvDiagram LvDiagram;

typedef struct LvRepresentation LvRepresentation;

typedef struct LvSolution LvSolution;

typedef struct LvSolutionList LvSolutionList;

typedef struct LvComplex {
  double re;
  double im;
} LvComplex;

// Dehn filling data for one component. `filled = false` means the
// component is left complete and the other fields are ignored. When
// `has_uv` is false, `(u, v)` is derived from `m` and `l`.
typedef struct LvFilling {
  bool filled;
  int64_t r;
  int64_t s;
  struct LvComplex l;
  bool has_uv;
  int64_t u;
  int64_t v;
} LvFilling;

typedef struct LvVolume {
  // `W0`, congruent to `i(vol + i cs)` modulo π².
  struct LvComplex w0;
  double vol;
  // In `[0, π²)`.
  double cs;
  double residual_max;
} LvVolume;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into this library from the same thread.
const char *lv_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *lv_version(void);

// Parse a PD code (`X[a,b,c,d] ...`) or diagram JSON.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum LvStatus lv_diagram_parse(const char *text, struct LvDiagram **out);

// # Safety
// `d` must come from [`lv_diagram_parse`] and not be freed twice.
void lv_diagram_free(struct LvDiagram *d);

// # Safety
// `d` must be a live diagram handle or null (returns 0).
size_t lv_diagram_region_count(const struct LvDiagram *d);

// # Safety
// `d` must be a live diagram handle or null (returns 0).
size_t lv_diagram_component_count(const struct LvDiagram *d);

// # Safety
// `d` must be a live diagram handle or null (returns 0).
size_t lv_diagram_crossing_count(const struct LvDiagram *d);

// Number of Wirtinger generators (over-arcs).
//
// # Safety
// `d` must be a live diagram handle or null (returns 0).
size_t lv_diagram_generator_count(const struct LvDiagram *d);

// Complete a representation from `count` generator images. Generator
// `generators[k]` (0-based) maps to the 2×2 matrix stored row-major in
// `matrices[4k..4k+4]`.
//
// # Safety
// `generators` must hold `count` entries and `matrices` `4 * count`.
enum LvStatus lv_representation_complete(const struct LvDiagram *d,
                                         const size_t *generators,
                                         const struct LvComplex *matrices,
                                         size_t count,
                                         struct LvRepresentation **out);

// # Safety
// `r` must come from [`lv_representation_complete`] and not be freed twice.
void lv_representation_free(struct LvRepresentation *r);

// Row-major image of generator `g`.
//
// # Safety
// Handles must be live; `out` must hold 4 values.
enum LvStatus lv_representation_generator(const struct LvRepresentation *r,
                                          size_t g,
                                          struct LvComplex *out);

// Meridian eigenvalue `m_i` of component `i`.
//
// # Safety
// Handles must be live and `out` writable.
enum LvStatus lv_representation_meridian(const struct LvDiagram *d,
                                         const struct LvRepresentation *r,
                                         size_t component,
                                         struct LvComplex *out);

// Longitude eigenvalue `l_i` matching [`lv_representation_meridian`].
//
// # Safety
// Handles must be live and `out` writable.
enum LvStatus lv_representation_longitude(const struct LvDiagram *d,
                                          const struct LvRepresentation *r,
                                          size_t component,
                                          struct LvComplex *out);

// Solution point from a region coloring: `seed_v` (2 entries) is placed in
// `seed_region` and `w` (2 entries) is the auxiliary vector.
//
// # Safety
// Handles must be live; `seed_v` and `w` must hold 2 values each.
enum LvStatus lv_solution_from_coloring(const struct LvDiagram *d,
                                        const struct LvRepresentation *r,
                                        size_t seed_region,
                                        const struct LvComplex *seed_v,
                                        const struct LvComplex *w,
                                        struct LvSolution **out);

// Solution point from explicit coordinates.
//
// # Safety
// `w` must hold `n_w` values and `m` `n_m` values.
enum LvStatus lv_solution_new(const struct LvDiagram *d,
                              const struct LvComplex *w,
                              size_t n_w,
                              const struct LvComplex *m,
                              size_t n_m,
                              struct LvSolution **out);

// # Safety
// `s` must come from this library and not be freed twice.
void lv_solution_free(struct LvSolution *s);

// Copy the region values into `out` (capacity `cap`); returns the number
// of regions, which may exceed `cap`.
//
// # Safety
// `out` must hold `cap` values (may be null when `cap` is 0).
size_t lv_solution_regions(const struct LvSolution *s, struct LvComplex *out, size_t cap);

// Copy the meridian values into `out`; same contract as
// [`lv_solution_regions`].
//
// # Safety
// `out` must hold `cap` values (may be null when `cap` is 0).
size_t lv_solution_meridians(const struct LvSolution *s, struct LvComplex *out, size_t cap);

// `W0`, volume and Chern-Simons invariant of a solution with one
// [`LvFilling`] per component.
//
// # Safety
// Handles must be live; `fills` must hold `n_fills` entries.
enum LvStatus lv_volume(const struct LvDiagram *d,
                        const struct LvSolution *s,
                        const struct LvFilling *fills,
                        size_t n_fills,
                        struct LvVolume *out);

// Newton from `seeds` random starts at fixed meridian values; distinct
// solutions sorted by volume, evaluated without filling.
//
// # Safety
// `m` must hold one value per component.
enum LvStatus lv_multi_start(const struct LvDiagram *d,
                             const struct LvComplex *m,
                             size_t n_m,
                             size_t seeds,
                             uint64_t rng_seed,
                             struct LvSolutionList **out);

// # Safety
// `l` must be a live list handle or null (returns 0).
size_t lv_solution_list_len(const struct LvSolutionList *l);

// Unfilled volume data of entry `i`.
//
// # Safety
// `l` must be live and `out` writable.
enum LvStatus lv_solution_list_volume(const struct LvSolutionList *l,
                                      size_t i,
                                      struct LvVolume *out);

// Copy of entry `i` as an owned solution handle.
//
// # Safety
// `l` must be live and `out` writable.
enum LvStatus lv_solution_list_get(const struct LvSolutionList *l,
                                   size_t i,
                                   struct LvSolution **out);

// # Safety
// `l` must come from [`lv_multi_start`] and not be freed twice.
void lv_solution_list_free(struct LvSolutionList *l);

// Principal-branch dilogarithm.
//
// # Safety
// `out` must be writable.
enum LvStatus lv_dilog(struct LvComplex z, struct LvComplex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINKVOL_H */
