#ifndef PBV_H
#define PBV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PbvStatus {
  PBV_STATUS_OK = 0,
  PBV_STATUS_NULL_POINTER = 1,
  PBV_STATUS_INVALID_INPUT = 2,
  PBV_STATUS_CAPACITY = 3,
  PBV_STATUS_INVALID_UTF8 = 4,
  PBV_STATUS_BUFFER_TOO_SMALL = 5,
  PBV_STATUS_PANIC = 6,
} PbvStatus;

typedef enum PbvOraclePath {
  PBV_ORACLE_PATH_GATE = 0,
  PBV_ORACLE_PATH_FAST = 1,
} PbvOraclePath;

// Opaque handle on a simulated circuit's final state.
typedef struct PbvCircuit PbvCircuit;

// Opaque key set handle.
typedef struct PbvKeySet PbvKeySet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` as a
// NUL-terminated string, truncating if needed. Returns the full message
// length in bytes, excluding the terminator.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t pbv_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *pbv_version(void);

// Parses comma-separated MSB-first keys such as `"011,101"`.
//
// # Safety
// `list` must be a NUL-terminated string; `out` must be writable.
enum PbvStatus pbv_keyset_parse(const char *list, struct PbvKeySet **out);

// # Safety
// `keys` must be null or a handle from `pbv_keyset_parse` not yet freed.
void pbv_keyset_free(struct PbvKeySet *keys);

// Number of keys, zero for a null handle.
//
// # Safety
// `keys` must be null or a live handle.
size_t pbv_keyset_len(const struct PbvKeySet *keys);

// Key width in bits, zero for a null handle.
//
// # Safety
// `keys` must be null or a live handle.
size_t pbv_keyset_width(const struct PbvKeySet *keys);

// Simulates the full circuit for `keys`.
//
// # Safety
// `keys` must be a live handle; `out` must be writable.
enum PbvStatus pbv_circuit_run(const struct PbvKeySet *keys,
                               enum PbvOraclePath path,
                               struct PbvCircuit **out);

// # Safety
// `circuit` must be null or a handle from `pbv_circuit_run` not yet freed.
void pbv_circuit_free(struct PbvCircuit *circuit);

// Total register width (data, target and control qubits).
//
// # Safety
// `circuit` must be null or a live handle.
size_t pbv_circuit_num_qubits(const struct PbvCircuit *circuit);

// Writes the `2^n` data-register outcome probabilities into `probs`.
//
// # Safety
// `circuit` must be a live handle; `probs` must hold `len` doubles.
enum PbvStatus pbv_circuit_distribution(const struct PbvCircuit *circuit,
                                        double *probs,
                                        size_t len);

// Measures the data register `shots` times with a ChaCha8 stream seeded by
// `seed`, writing per-outcome counts into the `2^n` entries of `counts`.
//
// # Safety
// `circuit` must be a live handle; `counts` must hold `len` integers.
enum PbvStatus pbv_circuit_sample(const struct PbvCircuit *circuit,
                                  uint64_t shots,
                                  uint64_t seed,
                                  uint64_t *counts,
                                  size_t len);

// Probability that `m` uniform draws reveal all `k` keys.
//
// # Safety
// `out` must be writable.
enum PbvStatus pbv_prob_all_keys(uint64_t k, uint64_t m, double *out);

// Ordered-assignment guessing probability `R / prod C(k, r_q)` for `keys`.
//
// # Safety
// `keys` must be a live handle; `out` must be writable.
enum PbvStatus pbv_classical_guess_exact(const struct PbvKeySet *keys, double *out);

// `min(k! / prod C(k, r_q), 1)` for a profile given least-significant bit
// first (`counts[q] = r_q`).
//
// # Safety
// `counts` must hold `n` values; `out` must be writable.
enum PbvStatus pbv_classical_guess_bound(const size_t *counts, size_t n, size_t k, double *out);

// Counts key multisets consistent with a profile (least-significant bit
// first). `work_bound` of zero selects the library default.
//
// # Safety
// `counts` must hold `n` values; the two outputs must be writable.
enum PbvStatus pbv_count_consistent(const size_t *counts,
                                    size_t n,
                                    size_t k,
                                    uint64_t work_bound,
                                    size_t *multiset_count,
                                    size_t *distinct_keyset_count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PBV_H */
