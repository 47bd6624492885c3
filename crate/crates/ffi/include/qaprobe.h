/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef QAPROBE_H
#define QAPROBE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Values 2 to 5 match the CLI exit codes.
 */
typedef enum QpStatus {
  QP_STATUS_OK = 0,
  QP_STATUS_NULL_POINTER = 1,
  QP_STATUS_INVALID_ARGUMENT = 2,
  QP_STATUS_INPUT_ERROR = 3,
  QP_STATUS_TIMEOUT = 4,
  QP_STATUS_INTEGRITY = 5,
  QP_STATUS_PANIC = 6,
} QpStatus;

typedef enum QpModelKind {
  QP_MODEL_KIND_DECISION_TREE = 0,
  QP_MODEL_KIND_GRADIENT_BOOST = 1,
} QpModelKind;

/**
 * Opaque embedding handle.
 */
typedef struct QpEmbedding QpEmbedding;

/**
 * Opaque graph handle.
 */
typedef struct QpGraph QpGraph;

/**
 * Opaque handle for a trained decision tree or boosted regressor.
 */
typedef struct QpModel QpModel;

/**
 * Outcome of annealing one instance.
 */
typedef struct QpSolveResult {
  size_t best_clique_size;
  size_t exact_clique_size;
  size_t reads_with_valid_clique;
  double chain_strength;
  double min_energy;
  double broken_chain_rate;
} QpSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next qaprobe call on the same thread.
 */
const char *qp_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qp_version(void);

size_t qp_num_features(void);

/**
 * Canonical name of feature `index`, or NULL when out of range. Static storage.
 */
const char *qp_feature_name(size_t index);

/**
 * Builds a graph from `num_edges` vertex pairs stored flat in `edges`.
 *
 * # Safety
 * `edges` must point to `2 * num_edges` readable values (or be NULL when
 * `num_edges` is 0); `out` must be writable.
 */
enum QpStatus qp_graph_new(size_t n, const size_t *edges, size_t num_edges, struct QpGraph **out);

/**
 * Samples `G(n, p)` without isolated vertices.
 *
 * # Safety
 * `out` must be writable.
 */
enum QpStatus qp_graph_sample(size_t n, double p, uint64_t seed, struct QpGraph **out);

/**
 * # Safety
 * `g` must be a live handle or NULL.
 */
size_t qp_graph_num_vertices(const struct QpGraph *g);

/**
 * # Safety
 * `g` must be a live handle or NULL.
 */
size_t qp_graph_num_edges(const struct QpGraph *g);

/**
 * # Safety
 * `g` must come from a `qp_graph_*` constructor and not be used afterwards.
 */
void qp_graph_free(struct QpGraph *g);

/**
 * Exact maximum clique size; fails with `Timeout` past `deadline_secs`.
 *
 * # Safety
 * `g` must be a live handle and `out` writable.
 */
enum QpStatus qp_max_clique_size(const struct QpGraph *g, double deadline_secs, size_t *out);

/**
 * Staircase clique embedding on the `m × m` Chimera grid (`4m` chains).
 *
 * # Safety
 * `out` must be writable.
 */
enum QpStatus qp_embedding_staircase(size_t m, struct QpEmbedding **out);

/**
 * Loads and validates an embedding file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum QpStatus qp_embedding_load(const char *path, struct QpEmbedding **out);

/**
 * Number of chains, the largest embeddable clique.
 *
 * # Safety
 * `e` must be a live handle or NULL.
 */
size_t qp_embedding_capacity(const struct QpEmbedding *e);

/**
 * # Safety
 * `e` must come from a `qp_embedding_*` constructor and not be used afterwards.
 */
void qp_embedding_free(struct QpEmbedding *e);

/**
 * Builds the clique QUBO, embeds it with UTC chain strength, anneals with the
 * reference simulated annealer and compares with the exact maximum clique.
 * Uses the largest valid clique over reads and a 60 s exact-solver deadline.
 *
 * # Safety
 * `g` and `emb` must be live handles and `out` writable.
 */
enum QpStatus qp_solve(const struct QpGraph *g,
                       const struct QpEmbedding *emb,
                       size_t num_reads,
                       double annealing_time,
                       double prefactor,
                       uint64_t seed,
                       struct QpSolveResult *out);

/**
 * Writes the 46 features of one instance, in canonical order, to `out`.
 *
 * # Safety
 * `g` and `emb` must be live handles; `out` must have room for
 * `qp_num_features()` values.
 */
enum QpStatus qp_extract_features(const struct QpGraph *g,
                                  const struct QpEmbedding *emb,
                                  double annealing_time,
                                  double prefactor,
                                  double *out);

/**
 * Loads a model document written by `qaprobe train`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum QpStatus qp_model_load(const char *path, struct QpModel **out);

/**
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum QpStatus qp_model_kind(const struct QpModel *m, enum QpModelKind *out);

/**
 * Predicts from a full canonical feature vector. Classifiers write 1.0
 * (solvable) or 0.0 to `value` and the leaf confidence to `confidence`;
 * regressors write the raw clique-size prediction and leave `confidence`
 * untouched. `confidence` may be NULL.
 *
 * # Safety
 * `m` must be a live handle; `features` must hold `qp_num_features()`
 * values; `value` must be writable.
 */
enum QpStatus qp_model_predict(const struct QpModel *m,
                               const double *features,
                               double *value,
                               double *confidence);

/**
 * # Safety
 * `m` must come from [`qp_model_load`] and not be used afterwards.
 */
void qp_model_free(struct QpModel *m);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QAPROBE_H */
