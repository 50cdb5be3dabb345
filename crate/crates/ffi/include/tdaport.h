#ifndef TDAPORT_H
#define TDAPORT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define TDA_OK 0

/**
 * Null pointer, bad UTF-8 or an inconsistent length argument.
 */
#define TDA_ERR_ARGUMENT 1

#define TDA_ERR_CONFIG 2

#define TDA_ERR_DATA 3

#define TDA_ERR_NUMERICAL 4

#define TDA_ERR_PANIC 5

/**
 * Square matrix with entity labels.
 */
typedef struct TdaMatrix TdaMatrix;

/**
 * Price panel: one index series and its constituents.
 */
typedef struct TdaPanel TdaPanel;

/**
 * Completed backtest.
 */
typedef struct TdaReport TdaReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *tda_last_error(void);

void tda_clear_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tda_version(void);

/**
 * Loads a CSV price file (date column, then one column per entity).
 *
 * # Safety
 * `path` and `index_column` must be NUL-terminated strings; `out_panel`
 * must be writable.
 */
int32_t tda_panel_load_csv(const char *path, const char *index_column, TdaPanel **out_panel);

/**
 * Builds a panel from raw prices. `asset_prices` holds `n_assets` series
 * of `n_periods` prices each, one after another. Entities are named
 * `INDEX` and `A0`, `A1`, ...
 *
 * # Safety
 * The arrays must hold `n_periods` and `n_assets * n_periods` values.
 */
int32_t tda_panel_from_prices(size_t n_periods,
                              size_t n_assets,
                              const double *index_prices,
                              const double *asset_prices,
                              TdaPanel **out_panel);

/**
 * # Safety
 * `panel` must be null or a handle from this library, not yet freed.
 */
void tda_panel_free(TdaPanel *panel);

/**
 * # Safety
 * `panel` must be a live handle; outputs must be writable.
 */
int32_t tda_panel_shape(const TdaPanel *panel, size_t *out_periods, size_t *out_assets);

/**
 * Distance between two series. `kind` is one of `awd`, `abd`, `dwd`,
 * `ald`, `dld`, `wd`, `ld`, `spearman`, `pearson`, `euclid_sq`,
 * `euclidean`; sub-series use the default plan.
 *
 * # Safety
 * `x` and `y` must hold `nx` and `ny` values; `kind` must be a
 * NUL-terminated string; `out_distance` must be writable.
 */
int32_t tda_distance(const double *x,
                     size_t nx,
                     const double *y,
                     size_t ny,
                     const char *kind,
                     double p,
                     size_t embed_dim,
                     size_t delay,
                     double *out_distance);

/**
 * Kernel similarity matrix (index first, then assets) over the whole
 * sample's log returns. `config_text` is `key = value` text as accepted by the
 * command line, or null for defaults.
 *
 * # Safety
 * `panel` must be a live handle; `config_text` null or NUL-terminated;
 * `out_matrix` writable.
 */
int32_t tda_similarity_matrix(const TdaPanel *panel,
                              const char *config_text,
                              TdaMatrix **out_matrix);

/**
 * # Safety
 * `matrix` must be a live handle; `out_n` writable.
 */
int32_t tda_matrix_size(const TdaMatrix *matrix, size_t *out_n);

/**
 * Copies the matrix row-major into `buf`, which must hold `n * n` values.
 *
 * # Safety
 * `matrix` must be a live handle; `buf` must hold `len` values.
 */
int32_t tda_matrix_copy(const TdaMatrix *matrix, double *buf, size_t len);

/**
 * # Safety
 * `matrix` must be null or a live handle.
 */
void tda_matrix_free(TdaMatrix *matrix);

/**
 * Runs the configured strategy over rolling windows.
 *
 * # Safety
 * `panel` must be a live handle; `config_text` null or NUL-terminated;
 * `out_report` writable.
 */
int32_t tda_backtest(const TdaPanel *panel, const char *config_text, TdaReport **out_report);

/**
 * Looks up a report metric (`TE`, `SR`, ...). `out_defined` is set to 0
 * when the metric exists but is undefined for the run; an unknown name is
 * `TDA_ERR_ARGUMENT`.
 *
 * # Safety
 * `report` must be a live handle; `name` NUL-terminated; outputs writable.
 */
int32_t tda_report_metric(const TdaReport *report,
                          const char *name,
                          double *out_value,
                          int32_t *out_defined);

/**
 * Concatenated out-of-sample portfolio returns. With `buf` null only the
 * count is reported through `out_len`.
 *
 * # Safety
 * `report` must be a live handle; `buf` null or holding `len` values;
 * `out_len` writable.
 */
int32_t tda_report_returns(const TdaReport *report, double *buf, size_t len, size_t *out_len);

/**
 * Report as JSON, allocated by the library; release with
 * [`tda_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out_json` writable.
 */
int32_t tda_report_json(const TdaReport *report, char **out_json);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
void tda_report_free(TdaReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void tda_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TDAPORT_H */
