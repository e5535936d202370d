#ifndef SCHWA_H
#define SCHWA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Values accepted wherever a function takes a `script` argument.
 */
typedef enum SchwaScript {
  SCHWA_SCRIPT_DEVANAGARI = 0,
  SCHWA_SCRIPT_GURMUKHI = 1,
} SchwaScript;

typedef enum SchwaStatus {
  SCHWA_STATUS_OK = 0,
  SCHWA_STATUS_NULL_ARGUMENT = 1,
  SCHWA_STATUS_INVALID_UTF8 = 2,
  SCHWA_STATUS_INVALID_SCRIPT = 3,
  SCHWA_STATUS_DECODE_ERROR = 4,
  SCHWA_STATUS_IO_ERROR = 5,
  SCHWA_STATUS_MODEL_ERROR = 6,
  SCHWA_STATUS_NOT_GBDT = 7,
  SCHWA_STATUS_LEXICON_ERROR = 8,
  SCHWA_STATUS_PANIC = 9,
} SchwaStatus;

/**
 * Opaque trained model.
 */
typedef struct SchwaModel SchwaModel;

/**
 * Corpus statistics. `deletion_rate` is NaN when `schwa_count` is 0.
 */
typedef struct SchwaLexiconStats {
  size_t entry_count;
  size_t schwa_count;
  size_t deleted_count;
  size_t weak_count;
  size_t discarded_count;
  size_t rejected_lines;
  double deletion_rate;
} SchwaLexiconStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call into this library on the same
 * thread.
 */
const char *schwa_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void schwa_string_free(char *s);

/**
 * Decodes `text` into orthographic tokens, one whitespace-separated word per
 * output line.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum SchwaStatus schwa_transcribe(const char *text, uint32_t script, char **out);

/**
 * Transcribes `text` with the shipped deletion rules.
 *
 * # Safety
 * As [`schwa_transcribe`].
 */
enum SchwaStatus schwa_baseline_predict(const char *text, uint32_t script, char **out);

/**
 * Loads a model file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum SchwaStatus schwa_model_load(const char *path, struct SchwaModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from [`schwa_model_load`], not yet freed.
 */
void schwa_model_free(struct SchwaModel *model);

/**
 * `"logistic"`, `"mlp"` or `"gbdt"`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be a valid pointer.
 */
enum SchwaStatus schwa_model_kind(const struct SchwaModel *model, char **out);

/**
 * Transcribes `text` with schwa deletion decided by `model`.
 *
 * # Safety
 * `model` must be a live handle; `text` NUL-terminated; `out` valid.
 */
enum SchwaStatus schwa_model_predict(const struct SchwaModel *model,
                                     const char *text,
                                     uint32_t script,
                                     char **out);

/**
 * Renders the trees of a boosted model as if/else rules.
 *
 * # Safety
 * `model` must be a live handle; `out` must be a valid pointer.
 */
enum SchwaStatus schwa_model_dump_trees(const struct SchwaModel *model, char **out);

/**
 * Aligns a lexicon file and summarizes it.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum SchwaStatus schwa_lexicon_stats(const char *path, struct SchwaLexiconStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCHWA_H */
