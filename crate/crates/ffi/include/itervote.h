/* C API for the itervote iterative voting simulator. */

#ifndef ITERVOTE_H
#define ITERVOTE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum IvStatus {
  IV_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  IV_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  IV_STATUS_INVALID_UTF8 = 2,
  /**
   * Profile text could not be parsed.
   */
  IV_STATUS_PARSE_ERROR = 3,
  /**
   * A rule name, move name, or parameter was rejected.
   */
  IV_STATUS_INVALID_ARGUMENT = 4,
  /**
   * Rejection sampling gave up before finding a Condorcet winner.
   */
  IV_STATUS_SAMPLING_FAILED = 5,
  /**
   * An internal invariant failed.
   */
  IV_STATUS_INTERNAL = 6,
} IvStatus;

/**
 * Opaque handle to an immutable profile.
 */
typedef struct IvProfile IvProfile;

/**
 * Summary of one iterative election run.
 */
typedef struct IvIterationSummary {
  /**
   * True when no agent had an improving move left; false when the step
   * cap cut the run off.
   */
  bool converged;
  /**
   * Winning candidate id in the final profile.
   */
  uint32_t winner;
  /**
   * Number of manipulation steps applied.
   */
  uint64_t steps;
} IvIterationSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Most recent error message on this thread, or null when the last call
 * succeeded. Free with `iv_string_free`.
 */
char *iv_last_error(void);

/**
 * Frees a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must have been returned by an itervote function and not freed yet.
 */
void iv_string_free(char *s);

/**
 * Parses one profile from its text format (`m n` header, then one ballot
 * line per voter). On success stores a new handle in `out`.
 *
 * # Safety
 * `text` must point to a NUL-terminated string and `out` to writable
 * storage for one pointer.
 */
enum IvStatus iv_profile_parse(const char *text, struct IvProfile **out);

/**
 * Generates a seeded impartial-culture profile; with `require_cw` set it
 * rejection-samples until the profile has a Condorcet winner.
 *
 * # Safety
 * `out` must point to writable storage for one pointer.
 */
enum IvStatus iv_profile_generate(uint32_t m,
                                  uint32_t n,
                                  uint64_t seed,
                                  bool require_cw,
                                  struct IvProfile **out);

/**
 * Releases a profile handle. Null is a no-op.
 *
 * # Safety
 * `profile` must have come from this library and not be freed twice.
 */
void iv_profile_free(struct IvProfile *profile);

/**
 * Number of candidates, or 0 for a null handle.
 *
 * # Safety
 * `profile` must be a live handle from this library (or null).
 */
uint32_t iv_profile_num_candidates(const struct IvProfile *profile);

/**
 * Number of voters, or 0 for a null handle.
 *
 * # Safety
 * `profile` must be a live handle from this library (or null).
 */
uint32_t iv_profile_num_voters(const struct IvProfile *profile);

/**
 * Serializes the profile to its text format. Free the string with
 * `iv_string_free`.
 *
 * # Safety
 * `profile` must be a live handle and `out` writable storage for one
 * pointer.
 */
enum IvStatus iv_profile_to_text(const struct IvProfile *profile, char **out);

/**
 * Finds the Condorcet winner: writes its candidate id, or -1 when the
 * profile has none.
 *
 * # Safety
 * `profile` must be a live handle and `out` writable storage for one i32.
 */
enum IvStatus iv_condorcet_winner(const struct IvProfile *profile, int32_t *out);

/**
 * Runs the named rule (`plurality`, `veto`, `approval2`, `approval3`,
 * `borda`, `copeland`, `maximin`, `stv`) with the identity tie-break and
 * writes the winner's candidate id.
 *
 * # Safety
 * `profile` must be a live handle, `rule` a NUL-terminated string, and
 * `out` writable storage for one u32.
 */
enum IvStatus iv_election_winner(const struct IvProfile *profile, const char *rule, uint32_t *out);

/**
 * Runs the iterative election for the named rule and move restriction
 * (`best`, `pragmatist<k>`, `m1`, `m2`) with the identity tie-break.
 * `step_cap` of 0 means the default `10 * n * m`.
 *
 * # Safety
 * `profile` must be a live handle, `rule` and `restriction` NUL-terminated
 * strings, and `out` writable storage for one `IvIterationSummary`.
 */
enum IvStatus iv_iterate(const struct IvProfile *profile,
                         const char *rule,
                         const char *restriction,
                         uint64_t step_cap,
                         struct IvIterationSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ITERVOTE_H */
