#ifndef DOMAINBAL_H
#define DOMAINBAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DbStatus {
  DB_STATUS_OK = 0,
  DB_STATUS_NULL_POINTER = 1,
  DB_STATUS_INVALID_UTF8 = 2,
  DB_STATUS_IO = 3,
  DB_STATUS_FORMAT = 4,
  DB_STATUS_INVALID_ARGUMENT = 5,
  DB_STATUS_OUT_OF_RANGE = 6,
  // A missing label, missing DF table or vocabulary mismatch.
  DB_STATUS_PRECONDITION = 7,
  DB_STATUS_NON_FINITE = 8,
  DB_STATUS_PANIC = 9,
} DbStatus;

// DF and αDF tables with corpus names.
typedef struct DbDfTable DbDfTable;

// A trained model together with the vocabulary and tokenizer it was built on.
typedef struct DbModel DbModel;

typedef struct DbRouge {
  double precision;
  double recall;
  double f1;
} DbRouge;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static string.
const char *db_version(void);

// Message for the last failure on this thread, or null. Valid until the next
// library call on the same thread.
const char *db_last_error(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void db_string_free(char *s);

// Tokenizes `raw` and writes the tokens joined by single spaces to `*out`.
//
// # Safety
// `raw` must be a NUL-terminated string and `out` writable.
enum DbStatus db_tokenize(const char *raw, bool lowercase, bool strip_punctuation, char **out);

// Builds DF tables from `n` corpora given as whitespace-separated token
// text. `names` may be null, in which case corpora are named `c0`, `c1`, ...
//
// # Safety
// `corpora` (and `names` when non-null) must point to `n` NUL-terminated
// strings; `out` must be writable.
enum DbStatus db_df_build(const char *const *corpora,
                          const char *const *names,
                          size_t n,
                          double alpha,
                          struct DbDfTable **out);

// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum DbStatus db_df_load(const char *path, struct DbDfTable **out);

// # Safety
// `table` must be a live handle and `path` a NUL-terminated string.
enum DbStatus db_df_write(const struct DbDfTable *table, const char *path);

// Number of corpora covered by `table`, 0 for a null handle.
//
// # Safety
// `table` must be null or a live handle.
size_t db_df_num_corpora(const struct DbDfTable *table);

// DF and αDF of `word` in corpus `corpus`. Unknown words score 0.
//
// # Safety
// `table` must be a live handle, `word` a NUL-terminated string; either
// output may be null.
enum DbStatus db_df_lookup(const struct DbDfTable *table,
                           const char *word,
                           size_t corpus,
                           double *df_out,
                           double *alpha_df_out);

// # Safety
// `table` must be null or a handle not yet freed.
void db_df_free(struct DbDfTable *table);

// Stop-word-stripped ROUGE-1 of two whitespace-tokenized strings, using the
// bundled stop-word list.
//
// # Safety
// Both strings must be NUL-terminated and `out` writable.
enum DbStatus db_rouge1(const char *candidate, const char *reference, struct DbRouge *out);

// Mean αDF of `n` whitespace-tokenized responses against `corpus`, per token
// occurrence or, with `unique`, per distinct word.
//
// # Safety
// `table` must be a live handle, `responses` must point to `n`
// NUL-terminated strings and `out` must be writable.
enum DbStatus db_alpha_df_score(const struct DbDfTable *table,
                                const char *const *responses,
                                size_t n,
                                size_t corpus,
                                bool unique,
                                double *out);

// Loads a checkpoint and the registry it was trained against.
//
// # Safety
// Both paths must be NUL-terminated strings and `out` writable.
enum DbStatus db_model_load(const char *checkpoint, const char *registry, struct DbModel **out);

// Greedy response to `context`. `corpus` selects the corpus embedding for
// labeled models and must be negative for every other method.
//
// # Safety
// `model` must be a live handle, `context` a NUL-terminated string and `out`
// writable.
enum DbStatus db_model_generate(const struct DbModel *model,
                                const char *context,
                                int64_t corpus,
                                size_t max_len,
                                char **out);

// # Safety
// `model` must be null or a handle not yet freed.
void db_model_free(struct DbModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DOMAINBAL_H */
