#ifndef DWE_H
#define DWE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DweStatus {
  DWE_STATUS_OK = 0,
  DWE_STATUS_NULL_ARGUMENT,
  DWE_STATUS_INVALID_UTF8,
  DWE_STATUS_IO,
  DWE_STATUS_FORMAT,
  DWE_STATUS_CONFIG,
  DWE_STATUS_DIMENSION,
  DWE_STATUS_STALE_ARTIFACT,
  DWE_STATUS_UNKNOWN_WORD,
  DWE_STATUS_ZERO_VECTOR,
  DWE_STATUS_EMPTY,
  DWE_STATUS_LOCKED,
  DWE_STATUS_BUFFER_TOO_SMALL,
  DWE_STATUS_PANIC,
} DweStatus;

/**
 * Word vectors loaded from a text embedding file.
 */
typedef struct DweEmbeddings DweEmbeddings;

/**
 * A configured pipeline bound to its workdir.
 */
typedef struct DwePipeline DwePipeline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *dwe_last_error(void);

/**
 * Loads a text embedding file (`count dim` header, then `word v1 ... vd`).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DweStatus dwe_embeddings_load(const char *path, struct DweEmbeddings **out);

/**
 * # Safety
 * `e` must come from this library and not be used afterwards; null is a no-op.
 */
void dwe_embeddings_free(struct DweEmbeddings *e);

/**
 * Number of words; 0 for a null handle.
 *
 * # Safety
 * `e` must be null or a live handle.
 */
uintptr_t dwe_embeddings_len(const struct DweEmbeddings *e);

/**
 * Vector dimension; 0 for a null handle.
 *
 * # Safety
 * `e` must be null or a live handle.
 */
uintptr_t dwe_embeddings_dim(const struct DweEmbeddings *e);

/**
 * Word of row `id`, owned by the handle; null when out of range.
 *
 * # Safety
 * `e` must be null or a live handle.
 */
const char *dwe_embeddings_word(const struct DweEmbeddings *e, uintptr_t id);

/**
 * Copies the vector of `word` into `out`, which holds `out_len` doubles.
 *
 * # Safety
 * `e` must be a live handle, `word` NUL-terminated, `out` valid for
 * `out_len` writes.
 */
enum DweStatus dwe_embeddings_lookup(const struct DweEmbeddings *e,
                                     const char *word,
                                     double *out,
                                     uintptr_t out_len);

/**
 * Up to `k` cosine neighbors of `word`: row ids into `ids`, similarities
 * into `sims` (both hold `k` entries); the count goes to `n_out`.
 *
 * # Safety
 * `e` must be a live handle, `word` NUL-terminated, `ids` and `sims` valid
 * for `k` writes and `n_out` valid.
 */
enum DweStatus dwe_embeddings_nearest(const struct DweEmbeddings *e,
                                      const char *word,
                                      uintptr_t k,
                                      uintptr_t *ids,
                                      double *sims,
                                      uintptr_t *n_out);

/**
 * Opens a pipeline from a TOML run config.
 *
 * # Safety
 * `config_path` must be NUL-terminated and `out` a valid pointer.
 */
enum DweStatus dwe_pipeline_open(const char *config_path, struct DwePipeline **out);

/**
 * # Safety
 * `p` must come from this library and not be used afterwards; null is a no-op.
 */
void dwe_pipeline_free(struct DwePipeline *p);

/**
 * Runs one stage (`vocab`, `pairs`, `cooc`, `ppmi`, `extend`, `svd`,
 * `train`, `eval` or `report`); seeded stages use `seed`.
 *
 * # Safety
 * `p` must be a live handle and `stage` NUL-terminated.
 */
enum DweStatus dwe_pipeline_run_stage(const struct DwePipeline *p,
                                      const char *stage,
                                      uint64_t seed);

/**
 * Runs every stage for every configured seed; nonzero `force` recomputes
 * artifacts that already verify.
 *
 * # Safety
 * `p` must be a live handle.
 */
enum DweStatus dwe_pipeline_run_all(const struct DwePipeline *p, int force);

/**
 * Test accuracy of the evaluated run at `seed`.
 *
 * # Safety
 * `p` must be a live handle and `out` valid.
 */
enum DweStatus dwe_pipeline_accuracy(const struct DwePipeline *p, uint64_t seed, double *out);

/**
 * Embeddings produced by the `svd` stage at `seed`.
 *
 * # Safety
 * `p` must be a live handle and `out` valid.
 */
enum DweStatus dwe_pipeline_embeddings(const struct DwePipeline *p,
                                       uint64_t seed,
                                       struct DweEmbeddings **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DWE_H */
