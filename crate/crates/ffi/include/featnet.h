#ifndef FEATNET_H
#define FEATNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FeatnetStatus {
  FEATNET_STATUS_OK = 0,
  FEATNET_STATUS_NULL_ARGUMENT = 1,
  FEATNET_STATUS_INVALID_UTF8 = 2,
  FEATNET_STATUS_PARSE_ERROR = 3,
  FEATNET_STATUS_UNSATISFIABLE = 4,
  FEATNET_STATUS_FLATTEN_ERROR = 5,
  FEATNET_STATUS_INVALID_CONFIGURATION = 6,
  FEATNET_STATUS_COMPILE_ERROR = 7,
  FEATNET_STATUS_UNKNOWN_DATASET = 8,
  FEATNET_STATUS_PANIC = 9,
} FeatnetStatus;

typedef struct FeatnetConfig FeatnetConfig;

typedef struct FeatnetGraph FeatnetGraph;

/**
 * A feature model together with its flattened CNF.
 */
typedef struct FeatnetModel FeatnetModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next featnet call on the same thread.
 */
const char *featnet_last_error(void);

/**
 * # Safety
 * `s` must come from a featnet function and not have been freed.
 */
void featnet_string_free(char *s);

/**
 * Parses a feature model from DSL text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum FeatnetStatus featnet_model_parse(const char *text, struct FeatnetModel **out);

/**
 * Generates the block/cell model. `profile` may be NULL.
 *
 * # Safety
 * `profile` is NULL or a NUL-terminated string; `out` must be writable.
 */
enum FeatnetStatus featnet_model_dnn(uint32_t max_blocks,
                                     uint32_t max_cells,
                                     const char *profile,
                                     struct FeatnetModel **out);

/**
 * # Safety
 * `m` is NULL or a live model handle.
 */
void featnet_model_free(struct FeatnetModel *m);

/**
 * Number of CNF variables and clauses of the flattened model.
 *
 * # Safety
 * `m` is a live model handle; the out pointers are writable.
 */
enum FeatnetStatus featnet_model_cnf_size(const struct FeatnetModel *m,
                                          size_t *num_vars,
                                          size_t *num_clauses);

/**
 * Draws one random valid configuration.
 *
 * # Safety
 * `m` is a live model handle; `out` is writable.
 */
enum FeatnetStatus featnet_model_sample(const struct FeatnetModel *m,
                                        uint64_t seed,
                                        struct FeatnetConfig **out);

/**
 * Checks a configuration against the model. `*valid` is set only on success.
 *
 * # Safety
 * `m` and `c` are live handles; `valid` is writable.
 */
enum FeatnetStatus featnet_config_check(const struct FeatnetModel *m,
                                        const struct FeatnetConfig *c,
                                        bool *valid);

/**
 * Parses `.fncfg` text.
 *
 * # Safety
 * `text` is a NUL-terminated string; `out` is writable.
 */
enum FeatnetStatus featnet_config_parse(const char *text, struct FeatnetConfig **out);

/**
 * Canonical `.fncfg` text; free with [`featnet_string_free`].
 *
 * # Safety
 * `c` is a live handle; `out` is writable.
 */
enum FeatnetStatus featnet_config_to_text(const struct FeatnetConfig *c, char **out);

/**
 * # Safety
 * `c` is NULL or a live configuration handle.
 */
void featnet_config_free(struct FeatnetConfig *c);

/**
 * Compiles a configuration for `dataset` (`"mnist"` or `"cifar10"`).
 * On `FEATNET_STATUS_COMPILE_ERROR` the message starts with the error kind.
 *
 * # Safety
 * `c` is a live handle; `dataset` is a NUL-terminated string; `out` is writable.
 */
enum FeatnetStatus featnet_compile(const struct FeatnetConfig *c,
                                   const char *dataset,
                                   struct FeatnetGraph **out);

/**
 * # Safety
 * `g` is a live graph handle; the out pointers are writable.
 */
enum FeatnetStatus featnet_graph_stats(const struct FeatnetGraph *g,
                                       size_t *num_nodes,
                                       uint64_t *total_size);

/**
 * Canonical IR JSON; free with [`featnet_string_free`].
 *
 * # Safety
 * `g` is a live handle; `out` is writable.
 */
enum FeatnetStatus featnet_graph_ir(const struct FeatnetGraph *g, char **out);

/**
 * Graphviz DOT text; free with [`featnet_string_free`].
 *
 * # Safety
 * `g` is a live handle; `out` is writable.
 */
enum FeatnetStatus featnet_graph_dot(const struct FeatnetGraph *g, char **out);

/**
 * # Safety
 * `g` is NULL or a live graph handle.
 */
void featnet_graph_free(struct FeatnetGraph *g);

/**
 * Accuracy (fraction) per million weights; NaN when `size` is 0.
 */
double featnet_efficiency(double accuracy, uint64_t size);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FEATNET_H */
