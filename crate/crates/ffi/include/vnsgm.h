#ifndef VNSGM_H
#define VNSGM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define VNS_HOPS_INFINITE UINT32_MAX

/**
 * Result of every fallible call.
 */
typedef enum VnsStatus {
  VNS_STATUS_OK = 0,
  VNS_STATUS_NULL_POINTER = 1,
  VNS_STATUS_INVALID_UTF8 = 2,
  VNS_STATUS_PARSE = 3,
  VNS_STATUS_UNKNOWN_LABEL = 4,
  VNS_STATUS_INVALID_ARGUMENT = 5,
  VNS_STATUS_IO = 6,
  /**
   * A `nominate` call found no seed within `h` hops; the handle is still
   * produced and holds an empty list.
   */
  VNS_STATUS_NO_LOCAL_SEEDS = 7,
  /**
   * The requested item is not present (for example an absent truth).
   */
  VNS_STATUS_NOT_FOUND = 8,
  VNS_STATUS_PANIC = 99,
} VnsStatus;

typedef struct VnsGraph VnsGraph;

typedef struct VnsNomination VnsNomination;

typedef struct VnsSeedMap VnsSeedMap;

/**
 * Parameters of [`vns_nominate`]. `h` or `ell` equal to [`VNS_HOPS_INFINITE`]
 * means unbounded.
 */
typedef struct VnsConfig {
  uint32_t h;
  uint32_t ell;
  size_t restarts;
  double gamma;
  double eps;
  size_t max_iter;
  uint64_t rng_seed;
} VnsConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next `vns_*` call on the same thread.
 */
const char *vns_last_error(void);

/**
 * Library version as a static string.
 */
const char *vns_version(void);

/**
 * Default nomination parameters (h = ℓ = 2, 100 restarts, γ = 0.1).
 */
struct VnsConfig vns_config_default(void);

/**
 * Parses an edge list held in memory.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum VnsStatus vns_graph_parse(const char *text, struct VnsGraph **out);

/**
 * Reads an edge list file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum VnsStatus vns_graph_load(const char *path, struct VnsGraph **out);

/**
 * # Safety
 * `g` must be null or a pointer from `vns_graph_parse`/`vns_graph_load`.
 */
void vns_graph_free(struct VnsGraph *g);

/**
 * Vertex count, 0 for null.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t vns_graph_vertex_count(const struct VnsGraph *g);

/**
 * Edge count, 0 for null.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t vns_graph_edge_count(const struct VnsGraph *g);

/**
 * An empty seed map.
 */
struct VnsSeedMap *vns_seeds_new(void);

/**
 * Adds one seed pair. Repeating a label on either side is an error.
 *
 * # Safety
 * `seeds` must be a live seed map; `a` and `b` NUL-terminated strings.
 */
enum VnsStatus vns_seeds_add(struct VnsSeedMap *seeds, const char *a, const char *b);

/**
 * # Safety
 * `seeds` must be a live seed map or null.
 */
size_t vns_seeds_len(const struct VnsSeedMap *seeds);

/**
 * # Safety
 * `seeds` must be null or a pointer from `vns_seeds_new`.
 */
void vns_seeds_free(struct VnsSeedMap *seeds);

/**
 * Ranks `g2`'s vertices as counterparts of `voi`. On `Ok` or
 * `NoLocalSeeds` a handle is written to `out`.
 *
 * # Safety
 * All handles must be live, `voi` NUL-terminated, `cfg` and `out` valid.
 */
enum VnsStatus vns_nominate(const struct VnsGraph *g,
                            const struct VnsGraph *g2,
                            const struct VnsSeedMap *seeds,
                            const char *voi,
                            const struct VnsConfig *cfg,
                            struct VnsNomination **out);

/**
 * Number of ranked candidates (0 after a stop).
 *
 * # Safety
 * `n` must be null or a live nomination handle.
 */
size_t vns_nomination_len(const struct VnsNomination *n);

/**
 * Candidate at 0-based position `i`. The label stays valid while the
 * nomination handle is alive.
 *
 * # Safety
 * `n` must be a live handle; `label` and `score` writable pointers.
 */
enum VnsStatus vns_nomination_get(const struct VnsNomination *n,
                                  size_t i,
                                  const char **label,
                                  double *score);

/**
 * Normalized rank of `truth` in the list. `NotFound` when it is not a
 * candidate or the nomination stopped.
 *
 * # Safety
 * `n` must be a live handle, `truth` NUL-terminated, `tau` writable.
 */
enum VnsStatus vns_nomination_tau(const struct VnsNomination *n, const char *truth, double *tau);

/**
 * The full nomination as JSON; free with [`vns_string_free`].
 *
 * # Safety
 * `n` must be a live handle and `out` writable.
 */
enum VnsStatus vns_nomination_json(const struct VnsNomination *n, char **out);

/**
 * # Safety
 * `n` must be null or a pointer from `vns_nominate`.
 */
void vns_nomination_free(struct VnsNomination *n);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void vns_string_free(char *s);

/**
 * Maximum-weight assignment of a row-major `k × k` matrix. Writes the
 * column of each row to `perm` (length `k`) and the total to `objective`.
 *
 * # Safety
 * `m` must point to `k * k` doubles, `perm` to `k` writable `size_t`s.
 */
enum VnsStatus vns_max_assignment(const double *m, size_t k, size_t *perm, double *objective);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VNSGM_H */
