//! Exact Gaussian-process regression on time indices.
//!
//! The kernel is `k(x, x') = amplitude · exp(-(x - x')² / length_scale²)`:
//! the amplitude multiplies directly (it is not squared) and there is no
//! factor ½ in the exponent. Observations carry Gaussian noise of variance
//! `noise_variance`, which enters both the posterior mean and covariance.
//! Targets are centered on their training mean before fitting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::timeseries::TimeSeries;

/// Largest training set accepted by [`fit_gp`].
pub const MAX_TRAIN_POINTS: usize = 2000;

/// Jitter starts at `JITTER_START · amplitude` and grows ×10 per retry.
pub const JITTER_START: f64 = 1e-10;
pub const JITTER_MAX: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeKernelParams {
    pub amplitude: f64,
    pub length_scale: f64,
}

impl SeKernelParams {
    pub fn new(amplitude: f64, length_scale: f64) -> Result<Self> {
        let p = SeKernelParams { amplitude, length_scale };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.amplitude) || !ok(self.length_scale) {
            return Err(Error::InvalidArgument(format!(
                "kernel parameters must be positive and finite: {self:?}"
            )));
        }
        Ok(())
    }
}

pub fn se_kernel(x: f64, x2: f64, params: &SeKernelParams) -> f64 {
    let d = x - x2;
    params.amplitude * (-(d * d) / (params.length_scale * params.length_scale)).exp()
}

/// `K[i][j] = k(xs[i], xs[j])`, filled from the upper triangle so the
/// result is exactly symmetric.
pub fn gram_matrix(xs: &[f64], params: &SeKernelParams) -> Matrix {
    let n = xs.len();
    let mut k = Matrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = se_kernel(xs[i], xs[j], params);
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    k
}

/// A fitted GP: training data plus the cached Cholesky factor of
/// `K + (noise_variance + jitter) I`.
#[derive(Debug, Clone)]
pub struct GpModel {
    params: SeKernelParams,
    noise_variance: f64,
    jitter: f64,
    train_inputs: Vec<f64>,
    train_values: Vec<f64>,
    centered: Vec<f64>,
    offset: f64,
    factor: Cholesky,
    weights: Vec<f64>,
}

impl PartialEq for GpModel {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.noise_variance == other.noise_variance
            && self.train_inputs == other.train_inputs
            && self.train_values == other.train_values
    }
}

/// Checks training data and returns the targets centered on their mean,
/// with that mean.
fn centered_targets(times: &[f64], values: &[f64]) -> Result<(Vec<f64>, f64)> {
    if times.len() != values.len() {
        return Err(Error::LengthMismatch { left: times.len(), right: values.len() });
    }
    if times.is_empty() {
        return Err(Error::EmptyInput("no training points".into()));
    }
    if times.len() > MAX_TRAIN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "{} training points exceed the exact-GP cap of {MAX_TRAIN_POINTS}",
            times.len()
        )));
    }
    if times.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite training data".into()));
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("training times must be distinct".into()));
    }
    let offset = values.iter().sum::<f64>() / values.len() as f64;
    Ok((values.iter().map(|v| v - offset).collect(), offset))
}

pub fn fit_gp(
    times: &[f64],
    values: &[f64],
    params: SeKernelParams,
    noise_variance: f64,
) -> Result<GpModel> {
    params.validate()?;
    if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
        return Err(Error::InvalidArgument(format!("noise variance {noise_variance} must be >= 0")));
    }
    let (centered, offset) = centered_targets(times, values)?;
    let base = gram_matrix(times, &params);

    let mut jitter = JITTER_START * params.amplitude;
    let limit = JITTER_MAX * params.amplitude * (1.0 + 1e-9);
    loop {
        let mut a = base.clone();
        a.add_diagonal(noise_variance + jitter);
        if let Some(factor) = Cholesky::factor(&a) {
            let weights = factor.solve(&centered);
            return Ok(GpModel {
                params,
                noise_variance,
                jitter,
                train_inputs: times.to_vec(),
                train_values: values.to_vec(),
                centered,
                offset,
                factor,
                weights,
            });
        }
        if jitter * 10.0 > limit {
            return Err(Error::Factorization { jitter });
        }
        jitter *= 10.0;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl GpModel {
    pub fn params(&self) -> SeKernelParams {
        self.params
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.train_inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_inputs.is_empty()
    }

    pub fn train_inputs(&self) -> &[f64] {
        &self.train_inputs
    }

    pub fn train_values(&self) -> &[f64] {
        &self.train_values
    }

    /// Lower Cholesky factor of `K + (noise_variance + jitter) I`.
    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }

    fn kernel_vector(&self, t: f64) -> Vec<f64> {
        self.train_inputs.iter().map(|&x| se_kernel(x, t, &self.params)).collect()
    }

    /// Posterior mean and latent-function variance, before clamping.
    pub fn posterior_unclamped(&self, test_times: &[f64]) -> Posterior {
        let mut means = Vec::with_capacity(test_times.len());
        let mut variances = Vec::with_capacity(test_times.len());
        for &t in test_times {
            let k = self.kernel_vector(t);
            let mean: f64 = k.iter().zip(&self.weights).map(|(a, b)| a * b).sum();
            let v = self.factor.solve_lower(&k);
            let var = self.params.amplitude - v.iter().map(|x| x * x).sum::<f64>();
            means.push(mean + self.offset);
            variances.push(var);
        }
        Posterior { means, variances }
    }

    /// Posterior at `test_times`; variances are clamped at zero.
    pub fn posterior(&self, test_times: &[f64]) -> Posterior {
        let mut p = self.posterior_unclamped(test_times);
        p.variances.iter_mut().for_each(|v| *v = v.max(0.0));
        p
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.len() as f64;
        let quad: f64 = self.centered.iter().zip(&self.weights).map(|(a, b)| a * b).sum();
        -0.5 * quad - 0.5 * self.factor.log_det() - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }

    /// The same hyperparameters conditioned on one more observation.
    /// The target offset stays fixed at the original training mean.
    pub fn condition_on(&self, t: f64, y: f64) -> Result<GpModel> {
        if self.len() >= MAX_TRAIN_POINTS {
            return Err(Error::InvalidArgument(format!(
                "conditioning beyond the exact-GP cap of {MAX_TRAIN_POINTS}"
            )));
        }
        if self.train_inputs.contains(&t) || !t.is_finite() || !y.is_finite() {
            return Err(Error::InvalidArgument(format!("cannot condition on ({t}, {y})")));
        }
        let k = self.kernel_vector(t);
        let diag = self.params.amplitude + self.noise_variance + self.jitter;
        let factor = self
            .factor
            .append(&k, diag)
            .ok_or(Error::Factorization { jitter: self.jitter })?;
        let mut m = self.clone();
        m.train_inputs.push(t);
        m.train_values.push(y);
        m.centered.push(y - self.offset);
        m.weights = factor.solve(&m.centered);
        m.factor = factor;
        Ok(m)
    }

    pub fn summary(&self) -> GpSummary {
        GpSummary {
            amplitude: self.params.amplitude,
            length_scale: self.params.length_scale,
            noise_variance: self.noise_variance,
            jitter: self.jitter,
            n: self.len(),
            offset: self.offset,
            log_marginal_likelihood: self.log_marginal_likelihood(),
        }
    }
}

/// Serialized form: the data and hyperparameters; the factorization is
/// recomputed on load.
#[derive(Serialize, Deserialize)]
struct GpModelData {
    params: SeKernelParams,
    noise_variance: f64,
    train_inputs: Vec<f64>,
    train_values: Vec<f64>,
}

impl Serialize for GpModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GpModelData {
            params: self.params,
            noise_variance: self.noise_variance,
            train_inputs: self.train_inputs.clone(),
            train_values: self.train_values.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GpModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let data = GpModelData::deserialize(d)?;
        fit_gp(&data.train_inputs, &data.train_values, data.params, data.noise_variance)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpSummary {
    pub amplitude: f64,
    pub length_scale: f64,
    pub noise_variance: f64,
    pub jitter: f64,
    pub n: usize,
    pub offset: f64,
    pub log_marginal_likelihood: f64,
}

/// Quadratic form and log determinant of `K₁ + (ratio + jitter) I`, the
/// unit-amplitude covariance. Scaling by the amplitude gives every cell
/// that shares a length scale and noise-to-amplitude ratio.
fn unit_terms(times: &[f64], centered: &[f64], length_scale: f64, ratio: f64) -> Option<(f64, f64)> {
    let base = gram_matrix(times, &SeKernelParams { amplitude: 1.0, length_scale });
    let mut jitter = JITTER_START;
    while jitter <= JITTER_MAX * (1.0 + 1e-9) {
        let mut a = base.clone();
        a.add_diagonal(ratio + jitter);
        if let Some(f) = Cholesky::factor(&a) {
            let w = f.solve(centered);
            let quad: f64 = centered.iter().zip(&w).map(|(x, y)| x * y).sum();
            return Some((quad, f.log_det()));
        }
        jitter *= 10.0;
    }
    None
}

/// Length scale and noise/amplitude ratio, by bit pattern.
type CellKey = (u64, u64);

/// Grid search maximizing the log marginal likelihood. Ties go to the
/// larger length scale, then the smaller amplitude, then the smaller noise.
pub fn fit_hyperparameters(
    times: &[f64],
    values: &[f64],
    noise_grid: &[f64],
    amplitude_grid: &[f64],
    length_scale_grid: &[f64],
) -> Result<(SeKernelParams, f64)> {
    let positive = |g: &[f64]| !g.is_empty() && g.iter().all(|&v| v > 0.0 && v.is_finite());
    if !positive(noise_grid) || !positive(amplitude_grid) || !positive(length_scale_grid) {
        return Err(Error::InvalidArgument("hyperparameter grids must be non-empty and positive".into()));
    }
    let (centered, _) = centered_targets(times, values)?;
    let centered = &centered;
    let n = times.len() as f64;

    let cells: Vec<(f64, f64, f64)> = amplitude_grid
        .iter()
        .flat_map(|&a| {
            length_scale_grid
                .iter()
                .flat_map(move |&l| noise_grid.iter().map(move |&s| (a, l, s)))
        })
        .collect();
    let mut keys: Vec<(u64, u64)> = cells.iter().map(|&(a, l, s)| (l.to_bits(), (s / a).to_bits())).collect();
    keys.sort_unstable();
    keys.dedup();
    let terms: Vec<(CellKey, Option<(f64, f64)>)> = keys
        .into_par_iter()
        .map(|k| (k, unit_terms(times, centered, f64::from_bits(k.0), f64::from_bits(k.1))))
        .collect();
    let lookup = |l: f64, r: f64| {
        let key = (l.to_bits(), r.to_bits());
        terms.binary_search_by(|t| t.0.cmp(&key)).ok().and_then(|i| terms[i].1)
    };

    let two_pi = (2.0 * std::f64::consts::PI).ln();
    cells
        .into_iter()
        .filter_map(|(a, l, s)| {
            let (quad, log_det) = lookup(l, s / a)?;
            let lml = -0.5 * quad / a - 0.5 * (n * a.ln() + log_det) - 0.5 * n * two_pi;
            lml.is_finite().then_some((a, l, s, lml))
        })
        .max_by(|x, y| {
            x.3.total_cmp(&y.3)
                .then(x.1.total_cmp(&y.1))
                .then(y.0.total_cmp(&x.0))
                .then(y.2.total_cmp(&x.2))
        })
        .map(|(a, l, s, _)| (SeKernelParams { amplitude: a, length_scale: l }, s))
        .ok_or(Error::NoValidFit)
}

/// Hyperparameter grids for [`forecast_gp`]. Amplitude and noise entries
/// are multiples of the training-target variance; length scales are in
/// series steps (days for daily data).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpFitOptions {
    pub amplitude_factors: Vec<f64>,
    pub length_scales: Vec<f64>,
    pub noise_factors: Vec<f64>,
}

impl Default for GpFitOptions {
    fn default() -> Self {
        GpFitOptions {
            amplitude_factors: vec![0.5, 1.0, 2.0],
            length_scales: vec![3.0, 7.0, 14.0, 30.0, 60.0],
            noise_factors: vec![0.05, 0.1, 0.25, 0.5],
        }
    }
}

impl GpFitOptions {
    /// Absolute grids for training targets `values`. A constant series
    /// uses a unit variance.
    pub fn grids(&self, values: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let var = if var > 0.0 && var.is_finite() { var } else { 1.0 };
        (
            self.noise_factors.iter().map(|f| f * var).collect(),
            self.amplitude_factors.iter().map(|f| f * var).collect(),
            self.length_scales.clone(),
        )
    }
}

/// Observation instants as step indices from the first observation
/// (days for daily data; raw data is measured in days).
pub fn time_indices(series: &TimeSeries) -> Vec<f64> {
    let step = series.granularity().step_seconds().unwrap_or(86_400) as f64;
    let Some(first) = series.first() else { return Vec::new() };
    series
        .observations()
        .iter()
        .map(|o| (o.at.epoch_seconds() - first.at.epoch_seconds()) as f64 / step)
        .collect()
}

/// Fits hyperparameters and the GP to the whole series.
pub fn fit_series(series: &TimeSeries, opts: &GpFitOptions) -> Result<GpModel> {
    if series.len() < 10 {
        return Err(Error::TooShort(format!("{} observations; the GP needs 10", series.len())));
    }
    let times = time_indices(series);
    let values = series.values();
    let (noise, amp, ls) = opts.grids(&values);
    let (params, noise_variance) = fit_hyperparameters(&times, &values, &noise, &amp, &ls)?;
    fit_gp(&times, &values, params, noise_variance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpForecast {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub summary: GpSummary,
}

/// Posterior at the `horizon` step indices following the series.
pub fn forecast_gp(series: &TimeSeries, horizon: usize, opts: &GpFitOptions) -> Result<GpForecast> {
    let model = fit_series(series, opts)?;
    let last = *time_indices(series).last().expect("length checked");
    let test: Vec<f64> = (1..=horizon).map(|h| last + h as f64).collect();
    let post = model.posterior(&test);
    Ok(GpForecast { means: post.means, variances: post.variances, summary: model.summary() })
}
