/* C ABI for the ecoscope object-discovery library. */

#ifndef ECOSCOPE_H
#define ECOSCOPE_H

/* This file is generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum EcoStatus {
  ECO_STATUS_OK = 0,
  ECO_STATUS_NULL_POINTER = 1,
  ECO_STATUS_INVALID_ARGUMENT = 2,
  ECO_STATUS_IO_ERROR = 3,
  ECO_STATUS_CORRUPT_DATA = 4,
  ECO_STATUS_NOT_FINALIZED = 5,
  ECO_STATUS_INTERNAL_ERROR = 6,
} EcoStatus;

/**
 * Opaque handle around a loaded object memory.
 */
typedef struct EcoMemory EcoMemory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static C string.
 */
const char *eco_version(void);

/**
 * Segments a row-major RGB image and writes one u32 label per pixel into
 * `labels_out` (capacity `height * width`). The number of parts lands in
 * `num_parts_out`.
 *
 * # Safety
 * `pixels` must point to `3 * height * width` readable bytes, `labels_out`
 * to `height * width` writable u32 slots, and `num_parts_out` to a writable
 * u32.
 */
enum EcoStatus eco_segment_image(const uint8_t *pixels,
                                 uint32_t height,
                                 uint32_t width,
                                 double tau,
                                 uint32_t min_size,
                                 uint32_t *labels_out,
                                 uint32_t *num_parts_out);

/**
 * Loads an object memory from a file into a new handle.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string and `out` a writable pointer
 * slot. A non-null result must be released with `eco_memory_free`.
 */
enum EcoStatus eco_memory_load(const char *path, struct EcoMemory **out);

/**
 * Releases a memory handle. Null is accepted.
 *
 * # Safety
 * `memory` must be a handle from `eco_memory_load` that has not been freed.
 */
void eco_memory_free(struct EcoMemory *memory);

/**
 * Number of entries in the memory.
 *
 * # Safety
 * `memory` must be a live handle; `count_out` must be writable.
 */
enum EcoStatus eco_memory_entry_count(const struct EcoMemory *memory, uintptr_t *count_out);

/**
 * Occurrence count of the entry at `index` in stored order.
 *
 * # Safety
 * `memory` must be a live handle; `count_out` must be writable.
 */
enum EcoStatus eco_memory_occurrences(const struct EcoMemory *memory,
                                      uintptr_t index,
                                      uint64_t *count_out);

/**
 * Runs memory-driven discovery on one image. `labels_out` receives one u32
 * per pixel: 0 for background, k+1 for the k-th predicted object. The
 * number of predicted objects lands in `num_objects_out`.
 *
 * # Safety
 * `memory` must be a live handle, `pixels` must point to
 * `3 * height * width` readable bytes, `labels_out` to `height * width`
 * writable u32 slots, and `num_objects_out` to a writable u32.
 */
enum EcoStatus eco_discover_in_image(const struct EcoMemory *memory,
                                     const uint8_t *pixels,
                                     uint32_t height,
                                     uint32_t width,
                                     uint32_t *labels_out,
                                     uint32_t *num_objects_out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ECOSCOPE_H */
