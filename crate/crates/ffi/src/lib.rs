//! C ABI for the aircast forecasting core.
//!
//! Every fallible function returns an [`AircastStatus`]; on failure a
//! message for the calling thread is available from
//! [`aircast_last_error_message`]. Objects are opaque handles created by
//! `*_new`/`*_fit`/`*_simulate` functions and released with the matching
//! `*_free`. Output arrays are caller-allocated; functions that fill one
//! take its capacity and report the number of values required.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use aircast::arima::{self, ArimaModel, ArimaOrder};
use aircast::evaluation;
use aircast::gp::{self, GpModel, SeKernelParams};
use aircast::trend;
use aircast::{Error, TimeSeries};
use chrono::NaiveDate;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AircastStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    Empty = 4,
    NonStationary = 5,
    Factorization = 6,
    NoConvergence = 7,
    BufferTooSmall = 8,
    Io = 9,
    Parse = 10,
    Panic = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AircastStatus {
    match e {
        Error::LengthMismatch { .. } | Error::Length(_) | Error::Dimension(_) | Error::Seed { .. } => {
            AircastStatus::LengthMismatch
        }
        Error::EmptySeries(_) | Error::EmptyInput(_) | Error::TooShort(_) => AircastStatus::Empty,
        Error::NonStationary(_) => AircastStatus::NonStationary,
        Error::Factorization { .. } | Error::NoValidFit => AircastStatus::Factorization,
        Error::OptimizerFailure { .. } | Error::NoConvergedModel | Error::Divergence { .. } => {
            AircastStatus::NoConvergence
        }
        Error::Io(_) => AircastStatus::Io,
        Error::Json(_) | Error::Schema(_) => AircastStatus::Parse,
        Error::Adapter { source, .. } => status_of(source),
        _ => AircastStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic for the calling thread.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AircastStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AircastStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AircastStatus::Panic
        }
    }
}

struct Fail(AircastStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(AircastStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or point to `n` readable values.
unsafe fn input<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

/// # Safety
/// `out` must be null or point to `cap` writable values; `needed` must be
/// null or writable.
unsafe fn output(values: &[f64], out: *mut f64, cap: usize, needed: *mut usize) -> Result<(), Fail> {
    if !needed.is_null() {
        *needed = values.len();
    }
    if values.len() > cap {
        return Err(Fail(
            AircastStatus::BufferTooSmall,
            format!("{} values do not fit in a buffer of {cap}", values.len()),
        ));
    }
    if !values.is_empty() {
        if out.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    }
    Ok(())
}

/// # Safety
/// `out` must be null or writable.
unsafe fn store<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

/// Message for the most recent failure on this thread, or null. Valid
/// until the next aircast call on the same thread.
#[no_mangle]
pub extern "C" fn aircast_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by an aircast function and not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn aircast_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- series -------------------------------------------------------------

/// Opaque time series.
pub struct AircastSeries {
    inner: TimeSeries,
}

/// Daily series starting at local midnight of `year-month-day`.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_series_new_daily(
    year: i32,
    month: u32,
    day: u32,
    values: *const f64,
    len: usize,
    out: *mut *mut AircastSeries,
) -> AircastStatus {
    guard(|| {
        let date = NaiveDate::from_ymd_opt(year, month, day)
            .ok_or_else(|| Fail(AircastStatus::InvalidArgument, format!("invalid date {year}-{month}-{day}")))?;
        let v = input(values, len, "values")?;
        let s = TimeSeries::daily_from_values(date, v)?;
        store(out, Box::into_raw(Box::new(AircastSeries { inner: s })))
    })
}

/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aircast_series_len(series: *const AircastSeries) -> usize {
    series.as_ref().map_or(0, |s| s.inner.len())
}

/// Copies the values into `out`. `needed` receives the series length.
///
/// # Safety
/// `series` must be a live handle; `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn aircast_series_values(
    series: *const AircastSeries,
    out: *mut f64,
    cap: usize,
    needed: *mut usize,
) -> AircastStatus {
    guard(|| {
        let s = series.as_ref().ok_or_else(|| null("series"))?;
        output(&s.inner.values(), out, cap, needed)
    })
}

/// # Safety
/// `series` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aircast_series_free(series: *mut AircastSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Seeded ARMA simulation of `n` daily values starting 2020-01-01.
///
/// # Safety
/// `beta` and `theta` must hold `p` and `q` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_simulate_arma(
    alpha: f64,
    beta: *const f64,
    p: usize,
    theta: *const f64,
    q: usize,
    sigma: f64,
    n: usize,
    seed: u64,
    out: *mut *mut AircastSeries,
) -> AircastStatus {
    guard(|| {
        let s = arima::simulate_arma(alpha, input(beta, p, "beta")?, input(theta, q, "theta")?, sigma, n, seed)?;
        store(out, Box::into_raw(Box::new(AircastSeries { inner: s })))
    })
}

// ---- ARIMA --------------------------------------------------------------

/// Opaque fitted ARIMA model.
pub struct AircastArima {
    inner: ArimaModel,
}

fn boxed_arima(m: ArimaModel) -> *mut AircastArima {
    Box::into_raw(Box::new(AircastArima { inner: m }))
}

/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_arima_fit(
    series: *const AircastSeries,
    p: usize,
    d: usize,
    q: usize,
    out: *mut *mut AircastArima,
) -> AircastStatus {
    guard(|| {
        let s = series.as_ref().ok_or_else(|| null("series"))?;
        let m = arima::fit_arima(&s.inner, ArimaOrder::new(p, d, q)?)?;
        store(out, boxed_arima(m))
    })
}

/// AIC order selection over `p <= p_max`, `d <= d_max`, `q <= q_max`.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_arima_select(
    series: *const AircastSeries,
    p_max: usize,
    d_max: usize,
    q_max: usize,
    out: *mut *mut AircastArima,
) -> AircastStatus {
    guard(|| {
        let s = series.as_ref().ok_or_else(|| null("series"))?;
        let (_, m) = arima::select_order(&s.inner, p_max, d_max, q_max)?;
        store(out, boxed_arima(m))
    })
}

/// Order as three integers.
///
/// # Safety
/// `model` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_arima_order(
    model: *const AircastArima,
    p: *mut usize,
    d: *mut usize,
    q: *mut usize,
) -> AircastStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        store(p, m.inner.order.p)?;
        store(d, m.inner.order.d)?;
        store(q, m.inner.order.q)
    })
}

/// Intercept, AR then MA coefficients, then the innovation variance:
/// `2 + p + q` values.
///
/// # Safety
/// `model` must be a live handle; `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn aircast_arima_parameters(
    model: *const AircastArima,
    out: *mut f64,
    cap: usize,
    needed: *mut usize,
) -> AircastStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.inner;
        let mut v = vec![m.alpha];
        v.extend(&m.beta);
        v.extend(&m.theta);
        v.push(m.sigma2);
        output(&v, out, cap, needed)
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_arima_aic(model: *const AircastArima, out: *mut f64) -> AircastStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        store(out, m.inner.aic())
    })
}

/// Mean forecasts for `horizon` steps past the end of `history`.
///
/// # Safety
/// Handles must be live; `out` must hold `horizon` doubles.
#[no_mangle]
pub unsafe extern "C" fn aircast_arima_forecast(
    model: *const AircastArima,
    history: *const AircastSeries,
    horizon: usize,
    out: *mut f64,
) -> AircastStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let h = history.as_ref().ok_or_else(|| null("history"))?;
        let f = arima::forecast(&m.inner, &h.inner, horizon)?;
        output(&f, out, horizon, ptr::null_mut())
    })
}

/// JSON form of the model; release with [`aircast_string_free`].
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_arima_to_json(model: *const AircastArima, out: *mut *mut c_char) -> AircastStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let json = CString::new(m.inner.to_json()?).map_err(|e| Fail(AircastStatus::Parse, e.to_string()))?;
        store(out, json.into_raw())
    })
}

/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_arima_from_json(json: *const c_char, out: *mut *mut AircastArima) -> AircastStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(AircastStatus::Parse, e.to_string()))?;
        store(out, boxed_arima(ArimaModel::from_json(text)?))
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aircast_arima_free(model: *mut AircastArima) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Mean and variance of an MA(q) process with mean `mu`.
///
/// # Safety
/// `theta` must hold `q` doubles; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_ma_moments(
    mu: f64,
    theta: *const f64,
    q: usize,
    sigma: f64,
    mean: *mut f64,
    variance: *mut f64,
) -> AircastStatus {
    guard(|| {
        let (m, v) = arima::ma_unconditional_moments(mu, input(theta, q, "theta")?, sigma);
        store(mean, m)?;
        store(variance, v)
    })
}

// ---- Gaussian process ---------------------------------------------------

/// Opaque fitted Gaussian-process model.
pub struct AircastGp {
    inner: GpModel,
}

/// # Safety
/// `times` and `values` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_gp_fit(
    times: *const f64,
    values: *const f64,
    n: usize,
    amplitude: f64,
    length_scale: f64,
    noise_variance: f64,
    out: *mut *mut AircastGp,
) -> AircastStatus {
    guard(|| {
        let params = SeKernelParams::new(amplitude, length_scale)?;
        let m = gp::fit_gp(input(times, n, "times")?, input(values, n, "values")?, params, noise_variance)?;
        store(out, Box::into_raw(Box::new(AircastGp { inner: m })))
    })
}

/// Posterior means and (clamped) variances at `m` query times.
///
/// # Safety
/// `model` must be a live handle; `test_times`, `means` and `variances`
/// must each hold `m` doubles.
#[no_mangle]
pub unsafe extern "C" fn aircast_gp_posterior(
    model: *const AircastGp,
    test_times: *const f64,
    m: usize,
    means: *mut f64,
    variances: *mut f64,
) -> AircastStatus {
    guard(|| {
        let g = model.as_ref().ok_or_else(|| null("model"))?;
        let post = g.inner.posterior(input(test_times, m, "test_times")?);
        output(&post.means, means, m, ptr::null_mut())?;
        output(&post.variances, variances, m, ptr::null_mut())
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_gp_log_marginal_likelihood(model: *const AircastGp, out: *mut f64) -> AircastStatus {
    guard(|| {
        let g = model.as_ref().ok_or_else(|| null("model"))?;
        store(out, g.inner.log_marginal_likelihood())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aircast_gp_free(model: *mut AircastGp) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

// ---- statistics ---------------------------------------------------------

/// # Safety
/// `actual` and `predicted` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_rmse(actual: *const f64, predicted: *const f64, n: usize, out: *mut f64) -> AircastStatus {
    guard(|| store(out, evaluation::rmse(input(actual, n, "actual")?, input(predicted, n, "predicted")?)?))
}

/// # Safety
/// `actual` and `predicted` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_mae(actual: *const f64, predicted: *const f64, n: usize, out: *mut f64) -> AircastStatus {
    guard(|| store(out, evaluation::mae(input(actual, n, "actual")?, input(predicted, n, "predicted")?)?))
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AircastFiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub iqr: f64,
    pub count: usize,
}

/// # Safety
/// `values` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_five_number_summary(
    values: *const f64,
    n: usize,
    out: *mut AircastFiveNumber,
) -> AircastStatus {
    guard(|| {
        let s = trend::five_number_summary(input(values, n, "values")?)?;
        store(
            out,
            AircastFiveNumber { min: s.min, q1: s.q1, median: s.median, q3: s.q3, max: s.max, iqr: s.iqr, count: s.count },
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AircastSeason {
    LongDry = 0,
    ShortRainy = 1,
    ShortDry = 2,
    LongRainy = 3,
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aircast_season_of(month: u32, out: *mut AircastSeason) -> AircastStatus {
    guard(|| {
        let s = match trend::season_of(month)? {
            trend::Season::LongDry => AircastSeason::LongDry,
            trend::Season::ShortRainy => AircastSeason::ShortRainy,
            trend::Season::ShortDry => AircastSeason::ShortDry,
            trend::Season::LongRainy => AircastSeason::LongRainy,
        };
        store(out, s)
    })
}
