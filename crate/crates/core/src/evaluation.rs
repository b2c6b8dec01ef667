//! Rolling one-step holdout evaluation and the per-station model table.
//!
//! Each model is fitted once on the training segment. Holdout points are
//! then predicted one at a time from all true values before them, with
//! parameters frozen.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::ann::{self, ActivationKind, MlpForecaster, TrainConfig};
use crate::arima::{self, ArimaModel, ArimaOrder};
use crate::error::{Error, Result};
use crate::gp::{self, GpFitOptions, GpModel};
use crate::timeseries::{split_holdout, Instant, SplitSpec, TimeSeries};

fn check_pair(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch { left: actual.len(), right: predicted.len() });
    }
    if actual.is_empty() {
        return Err(Error::EmptyInput("no values to score".into()));
    }
    Ok(())
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let ss: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p) * (a - p)).sum();
    Ok((ss / actual.len() as f64).sqrt())
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let s: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p).abs()).sum();
    Ok(s / actual.len() as f64)
}

/// Fit once, then predict the value following any history.
pub trait ForecastAdapter: Send {
    fn name(&self) -> &str;
    fn fit(&mut self, train: &TimeSeries) -> Result<()>;
    /// Prediction for the step right after the end of `history`.
    fn predict_one(&mut self, history: &TimeSeries) -> Result<f64>;
}

fn not_fitted(name: &str) -> Error {
    Error::InvalidArgument(format!("{name} adapter used before fit"))
}

/// Repeats the last observed value.
#[derive(Debug, Clone, Default)]
pub struct NaiveAdapter;

impl ForecastAdapter for NaiveAdapter {
    fn name(&self) -> &str {
        "NAIVE"
    }

    fn fit(&mut self, _train: &TimeSeries) -> Result<()> {
        Ok(())
    }

    fn predict_one(&mut self, history: &TimeSeries) -> Result<f64> {
        history
            .last()
            .map(|o| o.value)
            .ok_or_else(|| Error::EmptySeries("no history".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArimaSettings {
    /// Fixed order; `None` selects by AIC over the grid below.
    pub order: Option<ArimaOrder>,
    pub p_max: usize,
    pub d_max: usize,
    pub q_max: usize,
}

impl Default for ArimaSettings {
    fn default() -> Self {
        ArimaSettings { order: None, p_max: 5, d_max: 1, q_max: 5 }
    }
}

#[derive(Debug, Clone)]
pub struct ArimaAdapter {
    pub settings: ArimaSettings,
    pub model: Option<ArimaModel>,
}

impl ArimaAdapter {
    pub fn new(settings: ArimaSettings) -> Self {
        ArimaAdapter { settings, model: None }
    }
}

impl ForecastAdapter for ArimaAdapter {
    fn name(&self) -> &str {
        "ARIMA"
    }

    fn fit(&mut self, train: &TimeSeries) -> Result<()> {
        let s = self.settings;
        let model = match s.order {
            Some(order) => arima::fit_arima(train, order)?,
            None => arima::select_order(train, s.p_max, s.d_max, s.q_max)?.1,
        };
        self.model = Some(model);
        Ok(())
    }

    fn predict_one(&mut self, history: &TimeSeries) -> Result<f64> {
        let model = self.model.as_ref().ok_or_else(|| not_fitted("ARIMA"))?;
        Ok(arima::forecast(model, history, 1)?[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnSettings {
    pub window: usize,
    pub hidden: Vec<usize>,
    pub activation: ActivationKind,
    pub train: TrainConfig,
}

impl Default for AnnSettings {
    fn default() -> Self {
        AnnSettings {
            window: 7,
            hidden: vec![16],
            activation: ActivationKind::Tanh,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnnAdapter {
    pub settings: AnnSettings,
    pub net: Option<MlpForecaster>,
}

impl AnnAdapter {
    pub fn new(settings: AnnSettings) -> Self {
        AnnAdapter { settings, net: None }
    }
}

impl ForecastAdapter for AnnAdapter {
    fn name(&self) -> &str {
        "ANN"
    }

    fn fit(&mut self, train: &TimeSeries) -> Result<()> {
        let s = &self.settings;
        let (net, _) = ann::train(train, s.window, &s.hidden, s.activation, &s.train)?;
        self.net = Some(net);
        Ok(())
    }

    fn predict_one(&mut self, history: &TimeSeries) -> Result<f64> {
        let net = self.net.as_ref().ok_or_else(|| not_fitted("ANN"))?;
        let values = history.values();
        Ok(ann::forecast_recursive_values(net, &values[values.len().saturating_sub(net.window)..], 1)?[0])
    }
}

/// GP on time indices. After fitting, hyperparameters and the target
/// offset are frozen; new observations are absorbed by extending the
/// Cholesky factor one row at a time.
#[derive(Debug, Clone)]
pub struct GpAdapter {
    pub options: GpFitOptions,
    fitted: Option<GpModel>,
    conditioned: Option<GpModel>,
    origin: Option<Instant>,
    step: f64,
}

impl GpAdapter {
    pub fn new(options: GpFitOptions) -> Self {
        GpAdapter { options, fitted: None, conditioned: None, origin: None, step: 86_400.0 }
    }

    pub fn model(&self) -> Option<&GpModel> {
        self.fitted.as_ref()
    }

    fn index(&self, at: Instant) -> f64 {
        let origin = self.origin.expect("fitted");
        (at.epoch_seconds() - origin.epoch_seconds()) as f64 / self.step
    }

    /// A model conditioned on exactly `history`.
    fn conditioned_on(&mut self, history: &TimeSeries) -> Result<GpModel> {
        let base = self.fitted.as_ref().ok_or_else(|| not_fitted("GPR"))?;
        let times: Vec<f64> = history.observations().iter().map(|o| self.index(o.at)).collect();
        let values = history.values();
        let extends = |m: &GpModel| {
            m.len() <= times.len()
                && m.train_inputs() == &times[..m.len()]
                && m.train_values() == &values[..m.len()]
        };
        let mut model = match &self.conditioned {
            Some(c) if extends(c) => c.clone(),
            _ if extends(base) => base.clone(),
            _ => gp::fit_gp(&times, &values, base.params(), base.noise_variance())?,
        };
        for i in model.len()..times.len() {
            model = model.condition_on(times[i], values[i])?;
        }
        Ok(model)
    }
}

impl ForecastAdapter for GpAdapter {
    fn name(&self) -> &str {
        "GPR"
    }

    fn fit(&mut self, train: &TimeSeries) -> Result<()> {
        let model = gp::fit_series(train, &self.options)?;
        self.origin = train.first().map(|o| o.at);
        self.step = train.granularity().step_seconds().unwrap_or(86_400) as f64;
        self.fitted = Some(model);
        self.conditioned = None;
        Ok(())
    }

    fn predict_one(&mut self, history: &TimeSeries) -> Result<f64> {
        let model = self.conditioned_on(history)?;
        let next = history
            .instant_after_end(1)
            .ok_or_else(|| Error::EmptySeries("no history".into()))?;
        let mean = model.posterior(&[self.index(next)]).means[0];
        self.conditioned = Some(model);
        Ok(mean)
    }
}

/// Predicts every test point from `train` plus the true test values
/// before it. The adapter must already be fitted on `train`.
pub fn rolling_one_step(
    adapter: &mut dyn ForecastAdapter,
    train: &TimeSeries,
    test: &TimeSeries,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let name = adapter.name().to_string();
    let mut history = train.clone();
    let mut predictions = Vec::with_capacity(test.len());
    for (index, obs) in test.observations().iter().enumerate() {
        let wrap = |e: Error| Error::Adapter { model: name.clone(), index, source: Box::new(e) };
        let p = adapter.predict_one(&history).map_err(wrap)?;
        predictions.push(p);
        history.push(*obs).map_err(wrap)?;
    }
    Ok((predictions, test.values()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Naive,
    Arima,
    Ann,
    Gp,
}

impl ModelKind {
    /// Table column suffix.
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Naive => "NAIVE",
            ModelKind::Arima => "ARIMA",
            ModelKind::Ann => "ANN",
            ModelKind::Gp => "GPR",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            ModelKind::Naive => "naive",
            ModelKind::Arima => "arima",
            ModelKind::Ann => "ann",
            ModelKind::Gp => "gp",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "naive" => Ok(ModelKind::Naive),
            "arima" => Ok(ModelKind::Arima),
            "ann" | "mlp" => Ok(ModelKind::Ann),
            "gp" | "gpr" => Ok(ModelKind::Gp),
            other => Err(Error::InvalidArgument(format!("unknown model '{other}'"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.slug())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelSettings {
    pub arima: ArimaSettings,
    pub ann: AnnSettings,
    pub gp: GpFitOptions,
}

impl ModelSettings {
    pub fn adapter(&self, kind: ModelKind) -> Box<dyn ForecastAdapter> {
        match kind {
            ModelKind::Naive => Box::new(NaiveAdapter),
            ModelKind::Arima => Box::new(ArimaAdapter::new(self.arima)),
            ModelKind::Ann => Box::new(AnnAdapter::new(self.ann.clone())),
            ModelKind::Gp => Box::new(GpAdapter::new(self.gp.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub rmse: f64,
    pub mae: f64,
    pub predictions: Vec<f64>,
    pub actuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub model: ModelKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub score: Option<ModelScore>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub station: String,
    pub split: SplitSpec,
    pub protocol: String,
    pub train_len: usize,
    pub test_instants: Vec<Instant>,
    pub models: Vec<ModelOutcome>,
}

impl EvalReport {
    pub fn outcome(&self, kind: ModelKind) -> Option<&ModelOutcome> {
        self.models.iter().find(|m| m.model == kind)
    }

    pub fn score(&self, kind: ModelKind) -> Option<&ModelScore> {
        self.outcome(kind).and_then(|m| m.score.as_ref())
    }
}

pub const PROTOCOL: &str = "rolling one-step-ahead on the trailing holdout; parameters fitted once on the training segment and frozen";

fn run_model(adapter: &mut dyn ForecastAdapter, train: &TimeSeries, test: &TimeSeries) -> Result<ModelScore> {
    adapter.fit(train)?;
    let (predictions, actuals) = rolling_one_step(adapter, train, test)?;
    Ok(ModelScore {
        rmse: rmse(&actuals, &predictions)?,
        mae: mae(&actuals, &predictions)?,
        predictions,
        actuals,
    })
}

/// Scores each model on the same split. A failing model is recorded in
/// the report and does not stop the others.
pub fn compare_models(
    station: &str,
    series: &TimeSeries,
    split: SplitSpec,
    models: &[ModelKind],
    settings: &ModelSettings,
) -> Result<EvalReport> {
    if models.is_empty() {
        return Err(Error::InvalidArgument("no models selected".into()));
    }
    let (train, test) = split_holdout(series, split)?;
    let outcomes = models
        .iter()
        .map(|&kind| {
            let mut adapter = settings.adapter(kind);
            match run_model(adapter.as_mut(), &train, &test) {
                Ok(score) => ModelOutcome { model: kind, score: Some(score), error: None },
                Err(e) => ModelOutcome { model: kind, score: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(EvalReport {
        station: station.to_string(),
        split,
        protocol: PROTOCOL.to_string(),
        train_len: train.len(),
        test_instants: test.instants(),
        models: outcomes,
    })
}

/// One row per report: `station`, then `RMSE_<model>` for each model,
/// then `MAE_<model>`. Failed models leave empty cells.
pub fn write_table_csv<W: Write>(out: W, reports: &[EvalReport], models: &[ModelKind]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec!["station".to_string()];
    header.extend(models.iter().map(|m| format!("RMSE_{}", m.label())));
    header.extend(models.iter().map(|m| format!("MAE_{}", m.label())));
    w.write_record(&header).map_err(csv_err)?;
    for r in reports {
        let mut row = vec![r.station.clone()];
        let cell = |m: ModelKind, f: fn(&ModelScore) -> f64| r.score(m).map(|s| f(s).to_string()).unwrap_or_default();
        row.extend(models.iter().map(|&m| cell(m, |s| s.rmse)));
        row.extend(models.iter().map(|&m| cell(m, |s| s.mae)));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Schema(format!("{other:?}")),
    }
}

/// A published comparison row, kept for reference next to generated tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub station: &'static str,
    /// ARIMA, ANN, GPR.
    pub rmse: [f64; 3],
    pub mae: [f64; 3],
}

/// Reported Gitega figures from the original study's data, which is not
/// public. Useful for comparing table shape, not as a target.
pub const REFERENCE_GITEGA: ReferenceRow = ReferenceRow {
    station: "Gitega",
    rmse: [2.537, 2.746, 20.162],
    mae: [1.241, 1.694, 11.960],
};

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn daily(values: &[f64]) -> TimeSeries {
        TimeSeries::daily_from_values(NaiveDate::from_ymd_opt(2021, 3, 1).unwrap(), values).unwrap()
    }

    #[test]
    fn metric_examples() {
        assert_eq!(rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!((rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 5.0]).unwrap() - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((mae(&[1.0, 2.0, 3.0], &[1.0, 2.0, 5.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(rmse(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(mae(&[], &[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn naive_rolling() {
        let s = daily(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let (train, test) = (s.slice(0, 4), s.slice(4, 7));
        let (p, a) = rolling_one_step(&mut NaiveAdapter, &train, &test).unwrap();
        assert_eq!(p, vec![4.0, 5.0, 6.0]);
        assert_eq!(a, vec![5.0, 6.0, 7.0]);
    }

    #[test]
    fn naive_on_constant() {
        let r = compare_models("x", &daily(&[3.5; 30]), SplitSpec::default(), &[ModelKind::Naive], &ModelSettings::default())
            .unwrap();
        let s = r.score(ModelKind::Naive).unwrap();
        assert_eq!((s.rmse, s.mae), (0.0, 0.0));
    }

    struct Failing;
    impl ForecastAdapter for Failing {
        fn name(&self) -> &str {
            "FAIL"
        }
        fn fit(&mut self, _: &TimeSeries) -> Result<()> {
            Ok(())
        }
        fn predict_one(&mut self, h: &TimeSeries) -> Result<f64> {
            if h.len() > 12 {
                Err(Error::InvalidArgument("boom".into()))
            } else {
                Ok(0.0)
            }
        }
    }

    #[test]
    fn adapter_error_carries_index() {
        let s = daily(&[1.0; 20]);
        let err = rolling_one_step(&mut Failing, &s.slice(0, 10), &s.slice(10, 20)).unwrap_err();
        assert!(matches!(err, Error::Adapter { index: 3, .. }), "{err:?}");
    }

    #[test]
    fn failed_model_is_recorded() {
        // too short for the ANN window after a 10-point training set
        let settings = ModelSettings { ann: AnnSettings { window: 12, ..Default::default() }, ..Default::default() };
        let r = compare_models("x", &daily(&[1.0, 2.0, 3.0, 2.0, 1.0, 2.0, 3.0, 2.0, 1.0, 2.0, 3.0, 2.0]), SplitSpec::Count(2), &[ModelKind::Naive, ModelKind::Ann], &settings)
            .unwrap();
        assert!(r.score(ModelKind::Naive).is_some());
        assert!(r.outcome(ModelKind::Ann).unwrap().error.is_some());
        let mut buf = Vec::new();
        write_table_csv(&mut buf, &[r], &[ModelKind::Naive, ModelKind::Ann]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "station,RMSE_NAIVE,RMSE_ANN,MAE_NAIVE,MAE_ANN");
        assert!(lines[1].starts_with("x,") && lines[1].ends_with(','));
    }

    #[test]
    fn gp_adapter_matches_refit_with_frozen_params() {
        let values: Vec<f64> = (0..40).map(|i| 20.0 + 3.0 * (i as f64 * 0.4).sin()).collect();
        let s = daily(&values);
        let (train, test) = (s.slice(0, 30), s.slice(30, 40));
        let mut a = GpAdapter::new(GpFitOptions::default());
        a.fit(&train).unwrap();
        let (preds, _) = rolling_one_step(&mut a, &train, &test).unwrap();
        let base = a.model().unwrap().clone();
        for (i, p) in preds.iter().enumerate() {
            // fresh conditioning from the base model, no cache
            let mut m = base.clone();
            for j in 0..i {
                m = m.condition_on((30 + j) as f64, values[30 + j]).unwrap();
            }
            let want = m.posterior(&[(30 + i) as f64]).means[0];
            assert!((p - want).abs() < 1e-9);
        }
    }

    #[test]
    fn model_kind_parsing() {
        assert_eq!("GPR".parse::<ModelKind>().unwrap(), ModelKind::Gp);
        assert_eq!("arima".parse::<ModelKind>().unwrap(), ModelKind::Arima);
        assert!("svm".parse::<ModelKind>().is_err());
    }

    #[test]
    fn report_json_round_trip() {
        let r = compare_models("Gitega", &daily(&[1.0, 2.0, 1.5, 3.0, 2.5, 2.0, 1.0, 2.0, 3.0, 1.0, 2.0, 2.2, 1.1]), SplitSpec::Count(3), &[ModelKind::Naive], &ModelSettings::default())
            .unwrap();
        let back: EvalReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn reference_row_shape() {
        assert_eq!(REFERENCE_GITEGA.station, "Gitega");
        for i in 0..3 {
            assert!(REFERENCE_GITEGA.rmse[i] >= REFERENCE_GITEGA.mae[i]);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rmse_at_least_mae(pairs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..60)) {
                let (a, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
                let r = rmse(&a, &p).unwrap();
                let m = mae(&a, &p).unwrap();
                prop_assert!(r >= 0.0 && m >= 0.0);
                prop_assert!(r >= m * (1.0 - 1e-12));
            }

            #[test]
            fn permutation_invariant(pairs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..30)) {
                let (a, p): (Vec<f64>, Vec<f64>) = pairs.iter().cloned().unzip();
                let (ra, rp): (Vec<f64>, Vec<f64>) = pairs.into_iter().rev().unzip();
                prop_assert!((rmse(&a, &p).unwrap() - rmse(&ra, &rp).unwrap()).abs() < 1e-9);
            }

            #[test]
            fn naive_never_leaks(
                values in proptest::collection::vec(0.0f64..100.0, 15..30),
                junk in proptest::collection::vec(-1e6f64..1e6, 30),
                cut in 0usize..5,
            ) {
                let s = daily(&values);
                let (train, test) = (s.slice(0, 10), s.slice(10, values.len()));
                let (p1, _) = rolling_one_step(&mut NaiveAdapter, &train, &test).unwrap();
                let mut mutated = values.clone();
                for i in (10 + cut + 1)..values.len() {
                    mutated[i] = junk[i].abs();
                }
                let s2 = daily(&mutated);
                let (p2, _) = rolling_one_step(&mut NaiveAdapter, &train, &s2.slice(10, values.len())).unwrap();
                prop_assert_eq!(&p1[..=cut.min(p1.len() - 1)], &p2[..=cut.min(p2.len() - 1)]);
            }
        }
    }
}
