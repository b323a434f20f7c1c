/* PulseStack C API. SPDX-License-Identifier: Apache-2.0 */

#ifndef PULSESTACK_H
#define PULSESTACK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Job lifecycle states, matching the driver's transition relation.
typedef enum PsJobStatus {
  PS_JOB_QUEUED = 0,
  PS_JOB_RUNNING = 1,
  PS_JOB_DONE = 2,
  PS_JOB_FAILED = 3,
  PS_JOB_CANCELLED = 4,
} PsJobStatus;

// Status codes returned by every API function.
typedef enum PsStatus {
  PS_OK = 0,
  PS_ERR_NULL_POINTER = 1,
  PS_ERR_UTF8 = 2,
  PS_ERR_STALE_HANDLE = 3,
  PS_ERR_UNKNOWN_DEVICE = 4,
  PS_ERR_NOT_SUPPORTED = 5,
  PS_ERR_INVALID_SCOPE = 6,
  PS_ERR_FORMAT_UNSUPPORTED = 7,
  PS_ERR_PAYLOAD_INVALID = 8,
  PS_ERR_INVALID_ARGUMENT = 9,
  PS_ERR_MISSING_CALIBRATION = 10,
  PS_ERR_JOB_FAILED = 11,
  PS_ERR_JOB_CANCELLED = 12,
  PS_ERR_IO = 13,
  PS_ERR_COMPILE = 14,
  PS_ERR_INTERNAL = 15,
} PsStatus;

// Opaque driver handle.
typedef struct PsDriver PsDriver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// A copy of the most recent error message on this thread, or NULL when
// no error has occurred. Free with `ps_string_free`.
char *ps_last_error(void);

// Release a string returned by this library.
//
// # Safety
// `s` must be a pointer previously returned by this library, or NULL.
void ps_string_free(char *s);

// Create a driver from the `PULSESTACK_DEVICES` environment variable
// (empty driver when unset).
//
// # Safety
// `out_driver` must be a valid pointer.
enum PsStatus ps_driver_new_from_env(struct PsDriver **out_driver);

// Create a driver from an array of descriptor file paths.
//
// # Safety
// `paths` must point to `num_paths` valid C strings; `out_driver` must
// be a valid pointer.
enum PsStatus ps_driver_new_from_files(const char *const *paths,
                                       size_t num_paths,
                                       struct PsDriver **out_driver);

// Destroy a driver, joining its device workers.
//
// # Safety
// `driver` must be a pointer from a `ps_driver_new_*` call, or NULL.
void ps_driver_free(struct PsDriver *driver);

// Open a session.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_session_open(struct PsDriver *driver, uint64_t *out_session);

// Close a session, cancelling its queued jobs.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_session_close(struct PsDriver *driver, uint64_t session);

// Number of devices visible to a session.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_device_count(struct PsDriver *driver, uint64_t session, size_t *out_count);

// Device handle and name at `index` in registration order.
//
// # Safety
// Pointers must be valid; free `out_name` with `ps_string_free`.
enum PsStatus ps_device_at(struct PsDriver *driver,
                           uint64_t session,
                           size_t index,
                           uint64_t *out_device,
                           char **out_name);

// Look a device up by name.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_device_find(struct PsDriver *driver, const char *name, uint64_t *out_device);

// Query one property. `scope` follows the CLI grammar (`device`,
// `site:N`, `port:ID`, `operation:NAME`); `key` is the snake_case
// property name; the value is rendered as text.
//
// # Safety
// Pointers must be valid; free `out_value` with `ps_string_free`.
enum PsStatus ps_query(struct PsDriver *driver,
                       uint64_t device,
                       const char *scope,
                       const char *key,
                       char **out_value);

// Default calibration for a gate on specific sites, as JSON.
//
// # Safety
// Pointers must be valid; free `out_json` with `ps_string_free`.
enum PsStatus ps_default_calibration_get(struct PsDriver *driver,
                                         uint64_t device,
                                         const char *gate,
                                         const uint32_t *sites,
                                         size_t num_sites,
                                         char **out_json);

// Install a default calibration from its JSON form; replaces an existing
// entry with the same gate and site selector.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_default_calibration_set(struct PsDriver *driver,
                                         uint64_t device,
                                         const char *entry_json);

// Submit a payload. `format` is the format tag, e.g. `pqir_pulse`.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_job_submit(struct PsDriver *driver,
                            uint64_t session,
                            uint64_t device,
                            const char *format,
                            const char *payload,
                            uint64_t shots,
                            uint64_t seed,
                            uint64_t *out_job);

// Current lifecycle state of a job.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_job_status(struct PsDriver *driver, uint64_t job, enum PsJobStatus *out_status);

// Block until the job finishes; on success the histogram is returned as
// `bitstring count` lines sorted by bitstring.
//
// # Safety
// Pointers must be valid; free `out_histogram` with `ps_string_free`.
enum PsStatus ps_job_wait(struct PsDriver *driver, uint64_t job, char **out_histogram);

// Cancel a queued job (no-op for running or finished jobs).
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_job_cancel(struct PsDriver *driver, uint64_t job);

// Compile a circuit (JSON gate list) against a device descriptor (JSON)
// into `.pqir` text. `calibrations_json` may be NULL; `passes` may be
// NULL for the default pipeline; `mode` is `strict` or `pad`.
//
// # Safety
// Pointers must be valid; free `out_pqir` with `ps_string_free`.
enum PsStatus ps_compile(const char *circuit_json,
                         const char *calibrations_json,
                         const char *device_json,
                         const char *passes,
                         const char *mode,
                         char **out_pqir);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PULSESTACK_H */
