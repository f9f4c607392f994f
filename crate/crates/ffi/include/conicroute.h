#ifndef CONICROUTE_H
#define CONICROUTE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ConicStatus {
  CONIC_STATUS_OK = 0,
  CONIC_STATUS_NULL_POINTER = 1,
  CONIC_STATUS_INVALID_UTF8 = 2,
  CONIC_STATUS_PARSE_ERROR = 3,
  CONIC_STATUS_VALIDATION_ERROR = 4,
  CONIC_STATUS_UNKNOWN_LABEL = 5,
  CONIC_STATUS_UNKNOWN_NODE = 6,
  CONIC_STATUS_NOT_A_SOURCE = 7,
  CONIC_STATUS_UNREACHABLE = 8,
  CONIC_STATUS_INVALID_ARGUMENT = 9,
  CONIC_STATUS_BUFFER_TOO_SMALL = 10,
  CONIC_STATUS_PANIC = 11,
} ConicStatus;

/**
 * Opaque graph handle. Immutable once created, so one handle may be used
 * from several threads at once.
 */
typedef struct ConicGraphHandle ConicGraphHandle;

typedef struct ConicRoute {
  uint32_t destination;
  uint64_t distance;
} ConicRoute;

typedef struct ConicInventedEdge {
  uint32_t source;
  uint32_t from;
  uint32_t to;
  uint64_t weight;
  uint64_t min_weight;
  uint64_t max_weight;
} ConicInventedEdge;

typedef struct ConicFitness {
  uint64_t invented_weight;
  uint64_t hidden_weight;
  uint64_t absolute_error;
  /**
   * Relative error as a reduced fraction.
   */
  uint64_t relative_error_numer;
  uint64_t relative_error_denom;
  bool fit;
} ConicFitness;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *conic_last_error_message(void);

/**
 * Parses a build-matrix CSV and stores a new handle in `*out`.
 *
 * # Safety
 * `csv` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ConicStatus conic_graph_from_csv(const char *csv, struct ConicGraphHandle **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `graph` must come from `conic_graph_from_csv` and not be freed twice.
 */
void conic_graph_free(struct ConicGraphHandle *graph);

/**
 * # Safety
 * `graph` must be a live handle or NULL.
 */
size_t conic_graph_node_count(const struct ConicGraphHandle *graph);

/**
 * # Safety
 * `graph` must be a live handle or NULL.
 */
size_t conic_graph_edge_count(const struct ConicGraphHandle *graph);

/**
 * Label of node `id`, or NULL. Owned by the handle.
 *
 * # Safety
 * `graph` must be a live handle or NULL.
 */
const char *conic_graph_node_label(const struct ConicGraphHandle *graph, uint32_t id);

/**
 * # Safety
 * `graph` must be a live handle, `label` a NUL-terminated string and
 * `out_id` a valid pointer.
 */
enum ConicStatus conic_graph_node_id(const struct ConicGraphHandle *graph,
                                     const char *label,
                                     uint32_t *out_id);

/**
 * Shortest distance between two nodes over original edges.
 *
 * # Safety
 * `graph` must be a live handle and `out_distance` a valid pointer.
 */
enum ConicStatus conic_shortest_distance(const struct ConicGraphHandle *graph,
                                         uint32_t from,
                                         uint32_t to,
                                         uint64_t *out_distance);

/**
 * Nearest destination from the source called `source_label`. With
 * `use_invented` the search may traverse invented edges.
 *
 * # Safety
 * `graph` must be a live handle, `source_label` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum ConicStatus conic_nearest_destination(const struct ConicGraphHandle *graph,
                                           const char *source_label,
                                           bool use_invented,
                                           struct ConicRoute *out);

/**
 * Invents edges for source `source`. `allowable == 0` disables the weight
 * cap. `*out_len` always receives the number of invented edges; if it
 * exceeds `capacity` nothing is written and `CONIC_STATUS_BUFFER_TOO_SMALL`
 * is returned. `out` may be NULL when `capacity` is 0.
 *
 * # Safety
 * `graph` must be a live handle, `out` must point to `capacity` writable
 * elements and `out_len` must be valid.
 */
enum ConicStatus conic_invent_for_source(const struct ConicGraphHandle *graph,
                                         uint32_t source,
                                         uint64_t allowable,
                                         struct ConicInventedEdge *out,
                                         size_t capacity,
                                         size_t *out_len);

/**
 * `|w1 - w2|` for positive weights.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum ConicStatus conic_absolute_edge_difference(uint64_t w1, uint64_t w2, uint64_t *out);

/**
 * Scores an invented weight against a hidden path weight with tolerance
 * `tolerance_numer / tolerance_denom`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum ConicStatus conic_fitness(uint64_t invented_weight,
                               uint64_t hidden_weight,
                               uint64_t tolerance_numer,
                               uint64_t tolerance_denom,
                               struct ConicFitness *out);

/**
 * Contracts every node in id order and reports the number of shortcuts.
 *
 * # Safety
 * `graph` must be a live handle and `out_count` a valid pointer.
 */
enum ConicStatus conic_shortcut_count(const struct ConicGraphHandle *graph, size_t *out_count);

/**
 * DOT rendering of the graph, optionally with invented edges. Free the
 * string with `conic_string_free`.
 *
 * # Safety
 * `graph` must be a live handle and `out` a valid pointer.
 */
enum ConicStatus conic_export_dot(const struct ConicGraphHandle *graph,
                                  bool with_invented,
                                  char **out);

/**
 * Frees a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void conic_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONICROUTE_H */
