#ifndef MODWIN_H
#define MODWIN_H

/* Generated by cbindgen from modwin-ffi; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes for every entry point.
typedef enum ModwinStatus {
  MODWIN_STATUS_OK = 0,
  // A null pointer or non-UTF-8 string was passed in.
  MODWIN_STATUS_INVALID_ARGUMENT = 1,
  // The document parsed but violated a model invariant.
  MODWIN_STATUS_VALIDATION = 2,
  // An engine cap was exceeded (state space too large).
  MODWIN_STATUS_CAP_EXCEEDED = 3,
  // Library panic; a bug, not a usage error.
  MODWIN_STATUS_INTERNAL = 4,
} ModwinStatus;

// Opaque population handle.
typedef struct ModwinPopulation ModwinPopulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parse a population document. On success `*out` owns a new handle.
//
// # Safety
// `json` must be a valid NUL-terminated string; `out` must be a valid
// pointer; `err_out` may be null.
enum ModwinStatus modwin_population_parse(const char *json,
                                          struct ModwinPopulation **out,
                                          char **err_out);

// Release a handle returned by `modwin_population_parse`.
//
// # Safety
// `pop` must be a pointer from `modwin_population_parse` or null; it must
// not be used afterwards.
void modwin_population_free(struct ModwinPopulation *pop);

// Number of users in the population; 0 for a null handle.
//
// # Safety
// `pop` must be a live handle or null.
size_t modwin_population_len(const struct ModwinPopulation *pop);

// Release a string returned by any call here.
//
// # Safety
// `s` must come from this library and not be freed twice.
void modwin_string_free(char *s);

// Largest compatible community as JSON {method, size, members}.
//
// # Safety
// `pop` must be a live handle; `out_json` valid; `err_out` may be null.
enum ModwinStatus modwin_lcc_exact(const struct ModwinPopulation *pop,
                                   char **out_json,
                                   char **err_out);

// Fair-limit analysis under a window given as JSON (`[lo, hi]` with null
// for unbounded ends, or `"empty"`). Returns the report as JSON.
//
// # Safety
// `pop` must be a live handle; `window_json`, `out_json` valid; `err_out`
// may be null.
enum ModwinStatus modwin_fair_limit(const struct ModwinPopulation *pop,
                                    const char *window_json,
                                    char **out_json,
                                    char **err_out);

// Simulate a seeded random schedule under a window and return the trace as
// CSV (`t,phase,actor,action,size`).
//
// # Safety
// `pop` must be a live handle; `window_json`, `out_csv` valid; `err_out`
// may be null.
enum ModwinStatus modwin_simulate_csv(const struct ModwinPopulation *pop,
                                      const char *window_json,
                                      uint64_t seed,
                                      uint64_t horizon,
                                      char **out_csv,
                                      char **err_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MODWIN_H */
