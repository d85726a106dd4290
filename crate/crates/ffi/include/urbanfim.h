#ifndef URBANFIM_H
#define URBANFIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UfStatus {
  UF_STATUS_OK = 0,
  UF_STATUS_NULL_POINTER = 1,
  UF_STATUS_INVALID_UTF8 = 2,
  UF_STATUS_CONFIG_ERROR = 3,
  UF_STATUS_DATA_ERROR = 4,
  UF_STATUS_STAGE_ERROR = 5,
  UF_STATUS_OUT_OF_RANGE = 6,
  UF_STATUS_PANIC = 7,
} UfStatus;

// An encoded transaction database ready for mining.
typedef struct UfDatabase UfDatabase;

// A Ward dendrogram.
typedef struct UfDendrogram UfDendrogram;

// Frequent itemsets in canonical order.
typedef struct UfItemsets UfItemsets;

// A land-use layer.
typedef struct UfLayer UfLayer;

// Neighborhood transactions of one layer.
typedef struct UfTransactionSet UfTransactionSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *uf_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *uf_version(void);

// Loads a GeoJSON land-use layer.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be writable.
enum UfStatus uf_layer_load(const char *path,
                            const char *code_attribute,
                            const char *city_name,
                            struct UfLayer **out);

// # Safety
// `layer` must be a live handle or NULL.
size_t uf_layer_feature_count(const struct UfLayer *layer);

// # Safety
// `layer` must come from `uf_layer_load` and not be used afterwards.
void uf_layer_free(struct UfLayer *layer);

// One transaction per polygon: its own code plus every code within
// `buffer_distance` meters.
//
// # Safety
// `layer` must be a live handle; `out` must be writable.
enum UfStatus uf_transactions_extract(const struct UfLayer *layer,
                                      double buffer_distance,
                                      struct UfTransactionSet **out);

// # Safety
// `ts` must be a live handle or NULL.
size_t uf_transactions_count(const struct UfTransactionSet *ts);

// Writes the space-separated transactions file.
//
// # Safety
// `ts` must be a live handle; `path` NUL-terminated.
enum UfStatus uf_transactions_write(const struct UfTransactionSet *ts, const char *path);

// # Safety
// `ts` must come from `uf_transactions_extract` and not be used afterwards.
void uf_transactions_free(struct UfTransactionSet *ts);

// # Safety
// `ts` must be a live handle; `out` must be writable.
enum UfStatus uf_database_from_transactions(const struct UfTransactionSet *ts,
                                            struct UfDatabase **out);

// Reads a space-separated transactions file.
//
// # Safety
// `path` NUL-terminated; `out` must be writable.
enum UfStatus uf_database_read(const char *path, struct UfDatabase **out);

// # Safety
// `db` must be a live handle or NULL.
size_t uf_database_transaction_count(const struct UfDatabase *db);

// # Safety
// `db` must come from a `uf_database_*` constructor and not be used afterwards.
void uf_database_free(struct UfDatabase *db);

// Mines with a relative minimum support in (0, 1].
//
// # Safety
// `db` must be a live handle; `out` must be writable.
enum UfStatus uf_itemsets_mine(const struct UfDatabase *db, double minsup, struct UfItemsets **out);

// Mines with an absolute minimum support (transaction count).
//
// # Safety
// `db` must be a live handle; `out` must be writable.
enum UfStatus uf_itemsets_mine_absolute(const struct UfDatabase *db,
                                        uint64_t minsup,
                                        struct UfItemsets **out);

// # Safety
// `its` must be a live handle or NULL.
size_t uf_itemsets_count(const struct UfItemsets *its);

// Space-separated items of itemset `index`; owned by the handle.
//
// # Safety
// `its` must be a live handle or NULL.
const char *uf_itemsets_key(const struct UfItemsets *its, size_t index);

// # Safety
// `its` must be a live handle; the out pointers writable or NULL.
enum UfStatus uf_itemsets_support(const struct UfItemsets *its,
                                  size_t index,
                                  uint64_t *support,
                                  double *relative_support);

// # Safety
// `its` must be a live handle; `path` NUL-terminated.
enum UfStatus uf_itemsets_write_csv(const struct UfItemsets *its, const char *path);

// # Safety
// `its` must come from `uf_itemsets_mine*` and not be used afterwards.
void uf_itemsets_free(struct UfItemsets *its);

// Ward linkage of `n` points given as separate coordinate arrays. Leaves
// are named by their index.
//
// # Safety
// `xs` and `ys` must point to `n` doubles; `out` must be writable.
enum UfStatus uf_dendrogram_ward(const double *xs,
                                 const double *ys,
                                 size_t n,
                                 struct UfDendrogram **out);

// # Safety
// `d` must be a live handle or NULL.
size_t uf_dendrogram_merge_count(const struct UfDendrogram *d);

// Merge `index`: joined node ids, height (ESS increase) and new cluster size.
//
// # Safety
// `d` must be a live handle; the out pointers writable or NULL.
enum UfStatus uf_dendrogram_merge(const struct UfDendrogram *d,
                                  size_t index,
                                  size_t *left,
                                  size_t *right,
                                  double *height,
                                  size_t *size);

// Cluster label of every leaf for a cut into `k` clusters.
//
// # Safety
// `d` must be a live handle; `labels` must hold `len` entries.
enum UfStatus uf_dendrogram_cut_k(const struct UfDendrogram *d,
                                  size_t k,
                                  size_t *labels,
                                  size_t len);

// Cluster label of every leaf after removing merges above `height`.
//
// # Safety
// `d` must be a live handle; `labels` must hold `len` entries.
enum UfStatus uf_dendrogram_cut_distance(const struct UfDendrogram *d,
                                         double height,
                                         size_t *labels,
                                         size_t len);

// # Safety
// `d` must come from `uf_dendrogram_ward` and not be used afterwards.
void uf_dendrogram_free(struct UfDendrogram *d);

// Runs the full pipeline from a JSON config file.
//
// # Safety
// `config_path` must be NUL-terminated.
enum UfStatus uf_pipeline_run(const char *config_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* URBANFIM_H */
