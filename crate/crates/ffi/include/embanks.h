#ifndef EMBANKS_H
#define EMBANKS_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of fallible calls.
 */
typedef enum EmbanksStatus {
  EMBANKS_STATUS_OK = 0,
  EMBANKS_STATUS_NULL_ARGUMENT = 1,
  EMBANKS_STATUS_INVALID_UTF8 = 2,
  EMBANKS_STATUS_IO = 3,
  EMBANKS_STATUS_CORRUPT_STORE = 4,
  EMBANKS_STATUS_NO_ANSWER = 5,
  EMBANKS_STATUS_INVALID_CONFIG = 6,
  EMBANKS_STATUS_INVALID_INPUT = 7,
  EMBANKS_STATUS_OUT_OF_RANGE = 8,
  EMBANKS_STATUS_PANIC = 9,
} EmbanksStatus;

typedef struct EmbanksResult EmbanksResult;

typedef struct EmbanksStore EmbanksStore;

/**
 * Query settings. Obtain defaults from [`embanks_query_config_default`].
 */
typedef struct EmbanksQueryConfig {
  uint32_t k;
  uint32_t phase1_limit;
  double gamma;
  uint64_t memory_budget_bytes;
  /**
   * 0 backward, 1 bidirectional.
   */
  uint32_t phase1_algorithm;
  uint32_t phase2_algorithm;
  double lambda;
  double mu;
  /**
   * 0 means no limit.
   */
  uint32_t candidate_budget;
  uint64_t seed;
} EmbanksQueryConfig;

typedef struct EmbanksAnswer {
  double score;
  double node_score;
  double edge_score;
  uint32_t root;
  uint32_t node_count;
  uint32_t edge_count;
} EmbanksAnswer;

typedef struct EmbanksStats {
  uint64_t nodes_touched;
  uint64_t nodes_explored;
  uint64_t elapsed_micros;
  uint64_t clusters_read;
  uint64_t expanded_clusters;
  uint64_t refetch_events;
} EmbanksStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *embanks_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *embanks_last_error(void);

/**
 * Opens the store in directory `dir`.
 *
 * # Safety
 * `dir` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EmbanksStatus embanks_store_open(const char *dir, struct EmbanksStore **out);

/**
 * # Safety
 * `store` must come from [`embanks_store_open`] and not be used afterwards.
 */
void embanks_store_free(struct EmbanksStore *store);

/**
 * Number of clusters, or 0 for a null handle.
 *
 * # Safety
 * `store` must be null or a live store handle.
 */
uint64_t embanks_store_cluster_count(const struct EmbanksStore *store);

/**
 * Node count of the stored graph, or 0 for a null handle.
 *
 * # Safety
 * `store` must be null or a live store handle.
 */
uint64_t embanks_store_node_count(const struct EmbanksStore *store);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum EmbanksStatus embanks_query_config_default(struct EmbanksQueryConfig *out);

/**
 * Runs a two-phase query for whitespace-separated `keywords`. A null
 * `config` uses the defaults.
 *
 * # Safety
 * `store` must be a live store handle, `keywords` a NUL-terminated string,
 * `config` null or valid, and `out` a valid pointer.
 */
enum EmbanksStatus embanks_query(const struct EmbanksStore *store,
                                 const char *keywords,
                                 const struct EmbanksQueryConfig *config,
                                 struct EmbanksResult **out);

/**
 * # Safety
 * `result` must come from [`embanks_query`] and not be used afterwards.
 */
void embanks_result_free(struct EmbanksResult *result);

/**
 * Number of answers, or 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
uint64_t embanks_result_len(const struct EmbanksResult *result);

/**
 * # Safety
 * `result` must be a live result handle and `out` a valid pointer.
 */
enum EmbanksStatus embanks_result_answer(const struct EmbanksResult *result,
                                         uint64_t index,
                                         struct EmbanksAnswer *out);

/**
 * Copies up to `capacity` node ids of answer `index` into `buf` and returns
 * the answer's total node count (0 on a bad handle or index).
 *
 * # Safety
 * `result` must be a live result handle; `buf` must hold `capacity` ids or
 * be null when `capacity` is 0.
 */
uint64_t embanks_result_nodes(const struct EmbanksResult *result,
                              uint64_t index,
                              uint32_t *buf,
                              uint64_t capacity);

/**
 * # Safety
 * `result` must be a live result handle and `out` a valid pointer.
 */
enum EmbanksStatus embanks_result_stats(const struct EmbanksResult *result,
                                        struct EmbanksStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EMBANKS_H */
