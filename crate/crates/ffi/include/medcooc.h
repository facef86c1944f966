/* Every function returns an MccStatus. After a failure, mcc_last_error()
 * describes it until the next call on the same thread. Strings written to
 * out_json belong to the caller: release them with mcc_string_free. Release
 * handles with mcc_explorer_free. JSON bodies match the HTTP API. */

#ifndef MEDCOOC_H
#define MEDCOOC_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MccStatus {
  MCC_STATUS_OK = 0,
  MCC_STATUS_NULL_ARGUMENT = 1,
  MCC_STATUS_INVALID_UTF8 = 2,
  // A request parameter was rejected.
  MCC_STATUS_INVALID_ARGUMENT = 3,
  // Unknown concept, or no evidence for the requested edge.
  MCC_STATUS_NOT_FOUND = 4,
  // A file could not be read or written.
  MCC_STATUS_IO = 5,
  // Dictionary, corpus config or index contents are invalid.
  MCC_STATUS_INVALID_DATA = 6,
  // A Rust panic was caught at the boundary.
  MCC_STATUS_INTERNAL = 7,
} MccStatus;

// Opaque handle to a loaded index.
typedef struct MccExplorer MccExplorer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Opens an index directory built by `medcooc build`.
//
// # Safety
// `index_dir` is a NUL-terminated string; `out` is valid for one pointer
// write. On failure `*out` is set to null.
enum MccStatus mcc_explorer_open(const char *index_dir, struct MccExplorer **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `handle` is null or came from [`mcc_explorer_open`] and is not used again.
void mcc_explorer_free(struct MccExplorer *handle);

// Spelling suggestions for `query`; `k` of 0 is rejected.
//
// # Safety
// String arguments are NUL-terminated; `out_json` is valid for one pointer
// write.
enum MccStatus mcc_suggest(const struct MccExplorer *handle,
                           const char *query,
                           uint32_t k,
                           char **out_json);

// Result tree for a concept. Null `semantic_type` applies the disease
// filter, `"any"` disables it; null `mode` means hierarchical.
//
// # Safety
// String arguments are NUL-terminated; `out_json` is valid for one pointer
// write.
enum MccStatus mcc_graph(const struct MccExplorer *handle,
                         const char *concept_id,
                         const char *semantic_type,
                         const char *mode,
                         char **out_json);

// Publications supporting the edge between two concepts.
//
// # Safety
// String arguments are NUL-terminated; `out_json` is valid for one pointer
// write.
enum MccStatus mcc_edge_publications(const struct MccExplorer *handle,
                                     const char *concept_a,
                                     const char *concept_b,
                                     char **out_json);

// Index metadata and build statistics.
//
// # Safety
// String arguments are NUL-terminated; `out_json` is valid for one pointer
// write.
enum MccStatus mcc_health(const struct MccExplorer *handle, char **out_json);

// Builds an index directory from a dictionary and a corpus. Null
// `weights_path` applies the default weights.
//
// # Safety
// String arguments are NUL-terminated; `out_json` is valid for one pointer
// write.
enum MccStatus mcc_build_index(const char *dictionary_path,
                               const char *corpus_path,
                               const char *weights_path,
                               const char *out_dir);

// Releases a string returned through `out_json`. Null is ignored.
//
// # Safety
// `s` is null or came from this library and is not used again.
void mcc_string_free(char *s);

// Message for the last failed call on this thread; empty after a success.
// Valid until the next call on the same thread.
const char *mcc_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEDCOOC_H */
