#ifndef AIRCAST_H
#define AIRCAST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AircastSeason {
  AIRCAST_SEASON_LONG_DRY = 0,
  AIRCAST_SEASON_SHORT_RAINY = 1,
  AIRCAST_SEASON_SHORT_DRY = 2,
  AIRCAST_SEASON_LONG_RAINY = 3,
} AircastSeason;

typedef enum AircastStatus {
  AIRCAST_STATUS_OK = 0,
  AIRCAST_STATUS_NULL_POINTER = 1,
  AIRCAST_STATUS_INVALID_ARGUMENT = 2,
  AIRCAST_STATUS_LENGTH_MISMATCH = 3,
  AIRCAST_STATUS_EMPTY = 4,
  AIRCAST_STATUS_NON_STATIONARY = 5,
  AIRCAST_STATUS_FACTORIZATION = 6,
  AIRCAST_STATUS_NO_CONVERGENCE = 7,
  AIRCAST_STATUS_BUFFER_TOO_SMALL = 8,
  AIRCAST_STATUS_IO = 9,
  AIRCAST_STATUS_PARSE = 10,
  AIRCAST_STATUS_PANIC = 11,
} AircastStatus;

// Opaque fitted ARIMA model.
typedef struct AircastArima AircastArima;

// Opaque fitted Gaussian-process model.
typedef struct AircastGp AircastGp;

// Opaque time series.
typedef struct AircastSeries AircastSeries;

typedef struct AircastFiveNumber {
  double min;
  double q1;
  double median;
  double q3;
  double max;
  double iqr;
  uintptr_t count;
} AircastFiveNumber;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. Valid
// until the next aircast call on the same thread.
const char *aircast_last_error_message(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a string returned by an aircast function and not
// yet freed.
void aircast_string_free(char *s);

// Daily series starting at local midnight of `year-month-day`.
//
// # Safety
// `values` must point to `len` readable doubles; `out` must be writable.
enum AircastStatus aircast_series_new_daily(int32_t year,
                                            uint32_t month,
                                            uint32_t day,
                                            const double *values,
                                            uintptr_t len,
                                            struct AircastSeries **out);

// # Safety
// `series` must be null or a live handle.
uintptr_t aircast_series_len(const struct AircastSeries *series);

// Copies the values into `out`. `needed` receives the series length.
//
// # Safety
// `series` must be a live handle; `out` must hold `cap` doubles.
enum AircastStatus aircast_series_values(const struct AircastSeries *series,
                                         double *out,
                                         uintptr_t cap,
                                         uintptr_t *needed);

// # Safety
// `series` must be null or a handle not yet freed.
void aircast_series_free(struct AircastSeries *series);

// Seeded ARMA simulation of `n` daily values starting 2020-01-01.
//
// # Safety
// `beta` and `theta` must hold `p` and `q` doubles; `out` must be writable.
enum AircastStatus aircast_simulate_arma(double alpha,
                                         const double *beta,
                                         uintptr_t p,
                                         const double *theta,
                                         uintptr_t q,
                                         double sigma,
                                         uintptr_t n,
                                         uint64_t seed,
                                         struct AircastSeries **out);

// # Safety
// `series` must be a live handle; `out` must be writable.
enum AircastStatus aircast_arima_fit(const struct AircastSeries *series,
                                     uintptr_t p,
                                     uintptr_t d,
                                     uintptr_t q,
                                     struct AircastArima **out);

// AIC order selection over `p <= p_max`, `d <= d_max`, `q <= q_max`.
//
// # Safety
// `series` must be a live handle; `out` must be writable.
enum AircastStatus aircast_arima_select(const struct AircastSeries *series,
                                        uintptr_t p_max,
                                        uintptr_t d_max,
                                        uintptr_t q_max,
                                        struct AircastArima **out);

// Order as three integers.
//
// # Safety
// `model` must be a live handle; the outputs must be writable.
enum AircastStatus aircast_arima_order(const struct AircastArima *model,
                                       uintptr_t *p,
                                       uintptr_t *d,
                                       uintptr_t *q);

// Intercept, AR then MA coefficients, then the innovation variance:
// `2 + p + q` values.
//
// # Safety
// `model` must be a live handle; `out` must hold `cap` doubles.
enum AircastStatus aircast_arima_parameters(const struct AircastArima *model,
                                            double *out,
                                            uintptr_t cap,
                                            uintptr_t *needed);

// # Safety
// `model` must be a live handle; `out` must be writable.
enum AircastStatus aircast_arima_aic(const struct AircastArima *model, double *out);

// Mean forecasts for `horizon` steps past the end of `history`.
//
// # Safety
// Handles must be live; `out` must hold `horizon` doubles.
enum AircastStatus aircast_arima_forecast(const struct AircastArima *model,
                                          const struct AircastSeries *history,
                                          uintptr_t horizon,
                                          double *out);

// JSON form of the model; release with [`aircast_string_free`].
//
// # Safety
// `model` must be a live handle; `out` must be writable.
enum AircastStatus aircast_arima_to_json(const struct AircastArima *model, char **out);

// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum AircastStatus aircast_arima_from_json(const char *json, struct AircastArima **out);

// # Safety
// `model` must be null or a handle not yet freed.
void aircast_arima_free(struct AircastArima *model);

// Mean and variance of an MA(q) process with mean `mu`.
//
// # Safety
// `theta` must hold `q` doubles; the outputs must be writable.
enum AircastStatus aircast_ma_moments(double mu,
                                      const double *theta,
                                      uintptr_t q,
                                      double sigma,
                                      double *mean,
                                      double *variance);

// # Safety
// `times` and `values` must hold `n` doubles; `out` must be writable.
enum AircastStatus aircast_gp_fit(const double *times,
                                  const double *values,
                                  uintptr_t n,
                                  double amplitude,
                                  double length_scale,
                                  double noise_variance,
                                  struct AircastGp **out);

// Posterior means and (clamped) variances at `m` query times.
//
// # Safety
// `model` must be a live handle; `test_times`, `means` and `variances`
// must each hold `m` doubles.
enum AircastStatus aircast_gp_posterior(const struct AircastGp *model,
                                        const double *test_times,
                                        uintptr_t m,
                                        double *means,
                                        double *variances);

// # Safety
// `model` must be a live handle; `out` must be writable.
enum AircastStatus aircast_gp_log_marginal_likelihood(const struct AircastGp *model, double *out);

// # Safety
// `model` must be null or a handle not yet freed.
void aircast_gp_free(struct AircastGp *model);

// # Safety
// `actual` and `predicted` must hold `n` doubles; `out` must be writable.
enum AircastStatus aircast_rmse(const double *actual,
                                const double *predicted,
                                uintptr_t n,
                                double *out);

// # Safety
// `actual` and `predicted` must hold `n` doubles; `out` must be writable.
enum AircastStatus aircast_mae(const double *actual,
                               const double *predicted,
                               uintptr_t n,
                               double *out);

// # Safety
// `values` must hold `n` doubles; `out` must be writable.
enum AircastStatus aircast_five_number_summary(const double *values,
                                               uintptr_t n,
                                               struct AircastFiveNumber *out);

// # Safety
// `out` must be writable.
enum AircastStatus aircast_season_of(uint32_t month, enum AircastSeason *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AIRCAST_H */
