#ifndef FREQBEAM_H
#define FREQBEAM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FreqbeamStatus {
  FREQBEAM_STATUS_OK = 0,
  FREQBEAM_STATUS_NULL_POINTER = 1,
  FREQBEAM_STATUS_INVALID_UTF8 = 2,
  /*
   The input failed parsing or validation.
   */
  FREQBEAM_STATUS_INVALID_INPUT = 3,
  /*
   The input was valid but evaluation failed.
   */
  FREQBEAM_STATUS_RUNTIME_ERROR = 4,
  /*
   A Rust panic was caught at the boundary.
   */
  FREQBEAM_STATUS_PANIC = 5,
} FreqbeamStatus;

/*
 A parsed and validated circuit document.
 */
typedef struct FreqbeamDocument FreqbeamDocument;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or NULL. The pointer stays
 valid until the next freqbeam call on the same thread.
 */
const char *freqbeam_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *freqbeam_version(void);

/*
 Frees a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from a freqbeam function and must not be freed twice.
 */
void freqbeam_string_free(char *s);

/*
 Parses and validates a JSON circuit document.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum FreqbeamStatus freqbeam_document_parse(const char *json, struct FreqbeamDocument **out);

/*
 Releases a document. NULL is ignored.

 # Safety
 `doc` must come from [`freqbeam_document_parse`] and must not be freed twice.
 */
void freqbeam_document_free(struct FreqbeamDocument *doc);

/*
 Runs a document and returns the result document as JSON.

 # Safety
 `doc` must be a live handle; `out_json` must be writable.
 */
enum FreqbeamStatus freqbeam_document_run(const struct FreqbeamDocument *doc, char **out_json);

/*
 Simulator-versus-permanent comparison for a herald-free document, plus
 `random` Haar-random unitaries drawn from `seed`. Returns a JSON report.

 # Safety
 `doc` must be a live handle; `out_json` must be writable.
 */
enum FreqbeamStatus freqbeam_document_oracle(const struct FreqbeamDocument *doc,
                                             size_t random,
                                             uint64_t seed,
                                             char **out_json);

/*
 Probability of one photon per output direction when two sources of
 different frequency meet on a frequency beam splitter at angle `theta`.

 # Safety
 `out` must be writable.
 */
enum FreqbeamStatus freqbeam_hom_coincidence(double theta, double *out);

/*
 Which-way distinguishability after the frequency beam splitter.

 # Safety
 `out` must be writable.
 */
enum FreqbeamStatus freqbeam_erasure_distinguishability(double theta, double *out);

/*
 Polarization concurrence of the rectified biexciton pair.

 # Safety
 `out` must be writable.
 */
enum FreqbeamStatus freqbeam_biexciton_concurrence(double theta, double phase, double *out);

/*
 Heralded success probability of the two-shifter rectifier with ideal
 detectors.

 # Safety
 `out` must be writable.
 */
enum FreqbeamStatus freqbeam_fbs_prime_success(double shift_efficiency,
                                               double absorption,
                                               double *out);

/*
 AOM coupling constant (1/m) for a built-in material at acoustic
 intensity `intensity` (W/m²) and optical angular frequency `omega` (rad/s).

 # Safety
 `material` must be a NUL-terminated string; `out` must be writable.
 */
enum FreqbeamStatus freqbeam_device_eta(const char *material,
                                        double intensity,
                                        double omega,
                                        double *out);

/*
 Interaction constant `R` (s) for a built-in material.

 # Safety
 `material` must be a NUL-terminated string; `out` must be writable.
 */
enum FreqbeamStatus freqbeam_device_interaction_r(const char *material,
                                                  double intensity,
                                                  double length,
                                                  double *out);

/*
 Exact and first-order ratio of the shifted fraction at `omega + delta`
 to that at `omega` (angular frequencies, rad/s).

 # Safety
 `exact` and `first_order` must be writable.
 */
enum FreqbeamStatus freqbeam_bandwidth_ratio(double omega,
                                             double delta,
                                             double r,
                                             double *exact,
                                             double *first_order);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FREQBEAM_H */
