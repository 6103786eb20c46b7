#ifndef PUBCHAIN_H
#define PUBCHAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PcStatus {
  PC_STATUS_OK = 0,
  PC_STATUS_NULL_POINTER = 1,
  /**
   * Not UTF-8, not a number in range, or otherwise malformed.
   */
  PC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Unknown account, paper or review.
   */
  PC_STATUS_NOT_FOUND = 3,
  /**
   * A ledger validation rule refused the action.
   */
  PC_STATUS_REJECTED = 4,
  PC_STATUS_INSUFFICIENT_BALANCE = 5,
  /**
   * Bad parameter or sweep specification text.
   */
  PC_STATUS_CONFIG = 6,
  /**
   * The value does not fit the output type.
   */
  PC_STATUS_OVERFLOW = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  PC_STATUS_INTERNAL = 8,
} PcStatus;

/**
 * Opaque ledger handle.
 */
typedef struct PcLedger PcLedger;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call on the same thread.
 */
const char *pc_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pc_string_free(char *s);

/**
 * Creates a ledger. `params` is a flat `key = value` text or NULL for the
 * defaults.
 *
 * # Safety
 * `params` must be NULL or a NUL-terminated string; `out` must be writable.
 */
enum PcStatus pc_ledger_new(const char *params, struct PcLedger **out);

/**
 * Destroys a ledger. NULL is ignored.
 *
 * # Safety
 * `l` must come from [`pc_ledger_new`] and not have been freed.
 */
void pc_ledger_free(struct PcLedger *l);

/**
 * Switches to the public phase from the next sealed block.
 *
 * # Safety
 * `l` must be a live handle.
 */
enum PcStatus pc_enter_public_phase(struct PcLedger *l);

/**
 * Registers `identity` and writes the new address to `out_address`.
 *
 * # Safety
 * `l` must be a live handle, `identity` NUL-terminated, `out_address` writable.
 */
enum PcStatus pc_register(struct PcLedger *l, const char *identity, char **out_address);

/**
 * Submits a paper whose content is `content[..content_len]`. `citations`
 * holds `citation_count` paper ids. Writes the paper id to `out_id`.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; strings NUL-terminated.
 */
enum PcStatus pc_post_paper(struct PcLedger *l,
                            const char *author,
                            const char *title,
                            const uint8_t *content,
                            size_t content_len,
                            const char *const *citations,
                            size_t citation_count,
                            char **out_id);

/**
 * Submits a review with score `z` and comment bytes; writes the review id.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; strings NUL-terminated.
 */
enum PcStatus pc_submit_review(struct PcLedger *l,
                               const char *reviewer,
                               const char *paper,
                               double z,
                               const uint8_t *comment,
                               size_t comment_len,
                               char **out_id);

/**
 * Records a reader's score of a review.
 *
 * # Safety
 * `l` must be a live handle; strings NUL-terminated.
 */
enum PcStatus pc_submit_reader_score(struct PcLedger *l,
                                     const char *reader,
                                     const char *review,
                                     double value);

/**
 * Seals pending transactions; writes the new block height.
 *
 * # Safety
 * `l` must be a live handle; `miner` NUL-terminated; `out_height` writable.
 */
enum PcStatus pc_seal_block(struct PcLedger *l, const char *miner, uint64_t *out_height);

/**
 * Sealed balance of `address` in subunits.
 *
 * # Safety
 * `l` must be a live handle; `address` NUL-terminated; `out` writable.
 */
enum PcStatus pc_balance(struct PcLedger *l, const char *address, uint64_t *out);

/**
 * Reviewer bonus pool balance in subunits.
 *
 * # Safety
 * `l` must be a live handle; `out` writable.
 */
enum PcStatus pc_pool_balance(struct PcLedger *l, uint64_t *out);

/**
 * Current review score of a paper.
 *
 * # Safety
 * `l` must be a live handle; `paper` NUL-terminated; `out` writable.
 */
enum PcStatus pc_paper_score(struct PcLedger *l, const char *paper, double *out);

/**
 * Writes whether balances, pool and burned tokens add up to everything minted.
 *
 * # Safety
 * `l` must be a live handle; `out` writable.
 */
enum PcStatus pc_conservation_holds(struct PcLedger *l, bool *out);

/**
 * Hex SHA-256 of the full ledger state.
 *
 * # Safety
 * `l` must be a live handle; `out` writable.
 */
enum PcStatus pc_state_digest(struct PcLedger *l, char **out);

/**
 * Mean of `values[..len]` after dropping `floor(trim · len)` from each end.
 *
 * # Safety
 * `values` must point to `len` doubles; `out` writable.
 */
enum PcStatus pc_trimmed_mean(const double *values, size_t len, double trim, double *out);

/**
 * Runs a sweep from spec text and writes the CSV.
 *
 * # Safety
 * `spec` must be NUL-terminated; `out_csv` writable.
 */
enum PcStatus pc_sweep_csv(const char *spec, char **out_csv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PUBCHAIN_H */
