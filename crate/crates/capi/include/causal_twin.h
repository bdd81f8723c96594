/* C interface for the causal-twin library. */

#ifndef CAUSAL_TWIN_H
#define CAUSAL_TWIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CtStatus {
  /**
   * Success.
   */
  CT_OK = 0,
  /**
   * The inputs parse but violate a model invariant.
   */
  CT_DOMAIN_ERROR = 1,
  /**
   * The inputs could not be parsed.
   */
  CT_PARSE_ERROR = 2,
  /**
   * A required pointer argument was NULL.
   */
  CT_NULL_POINTER = 3,
  /**
   * An input string was not valid UTF-8.
   */
  CT_UTF8_ERROR = 4,
  /**
   * An output buffer had the wrong length.
   */
  CT_BAD_LENGTH = 5,
} CtStatus;

/**
 * Opaque validated graph handle.
 */
typedef struct CtGraph CtGraph;

/**
 * Opaque twin-model handle.
 */
typedef struct CtTwin CtTwin;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread. Never NULL; empty when no
 * failure has been recorded. The pointer stays valid until the next failing
 * call on the same thread.
 */
const char *ct_last_error(void);

/**
 * Crate version as a static string; do not free.
 */
const char *ct_version(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by a `ct_*` function and not freed before.
 */
void ct_string_free(char *s);

/**
 * Parse and validate a graph from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum CtStatus ct_graph_from_json(const char *json, struct CtGraph **out);

/**
 * # Safety
 * `g` must be NULL or a live graph handle; it is invalid afterwards.
 */
void ct_graph_free(struct CtGraph *g);

/**
 * Number of nodes; 0 for NULL.
 *
 * # Safety
 * `g` must be NULL or a live graph handle.
 */
size_t ct_graph_node_count(const struct CtGraph *g);

/**
 * Cardinality of a named node.
 *
 * # Safety
 * Pointer arguments must be valid; `name` NUL-terminated.
 */
enum CtStatus ct_graph_cardinality(const struct CtGraph *g, const char *name, uint32_t *out);

/**
 * Build the twin model for do(target = value).
 *
 * # Safety
 * Pointer arguments must be valid; `target` NUL-terminated.
 */
enum CtStatus ct_twin_build(const struct CtGraph *g,
                            const char *target,
                            uint32_t value,
                            struct CtTwin **out);

/**
 * # Safety
 * `tw` must be NULL or a live twin handle; it is invalid afterwards.
 */
void ct_twin_free(struct CtTwin *tw);

/**
 * Graphviz DOT text for a twin model.
 *
 * # Safety
 * Pointer arguments must be valid.
 */
enum CtStatus ct_twin_to_dot(const struct CtTwin *tw, char **out);

/**
 * JSON rendering of a twin model.
 *
 * # Safety
 * Pointer arguments must be valid.
 */
enum CtStatus ct_twin_to_json(const struct CtTwin *tw, char **out);

/**
 * Evaluate rules 1-3 for P(y | do(t), z [, w]).
 *
 * `y_csv`, `z_csv`, `w_csv` are comma-separated node lists; `z_csv` and
 * `w_csv` may be NULL or empty. Writes three flags into `out_rules`:
 * 1 applies, 0 does not, -1 not evaluated (rule 1 without a W set).
 *
 * # Safety
 * `out_rules` must point to at least 3 writable ints.
 */
enum CtStatus ct_rules_apply(const struct CtGraph *g,
                             const char *y_csv,
                             const char *target,
                             const char *z_csv,
                             const char *w_csv,
                             int *out_rules);

/**
 * Ground-truth interventional marginal P(y | do(target=value)) from a CPT
 * JSON map. `out_probs` must hold exactly `cardinality(y)` doubles.
 *
 * # Safety
 * Pointer arguments must be valid; strings NUL-terminated.
 */
enum CtStatus ct_interventional_marginal(const struct CtGraph *g,
                                         const char *cpts_json,
                                         const char *target,
                                         uint32_t value,
                                         const char *y,
                                         double *out_probs,
                                         size_t out_len);

/**
 * Exact Bayesian posterior predictive P(y* | data, do(target=value)) for a
 * fully observed graph. `data_csv` is the dataset text (header row of
 * variable names); `priors_json` may be NULL for a flat prior with one
 * pseudo-count per cell. `out_probs` must hold `cardinality(y)` doubles.
 *
 * # Safety
 * Pointer arguments must be valid; strings NUL-terminated.
 */
enum CtStatus ct_posterior_predictive(const struct CtGraph *g,
                                      const char *data_csv,
                                      const char *priors_json,
                                      const char *target,
                                      uint32_t value,
                                      const char *y,
                                      double *out_probs,
                                      size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAUSAL_TWIN_H */
