//! The `aircast` command line.
//!
//! Stages share state only through files under the output directory:
//!
//! ```text
//! simulated.csv                      simulate
//! ingest_report.json, series/        ingest
//! trend/                             trend
//! forecast/, models/                 forecast
//! evaluation/table.csv, report.json  evaluate
//! ```
//!
//! Exit codes: 0 success, 1 I/O, 2 invalid input or arguments, 3 empty
//! data, 4 no model produced a result.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ann;
use crate::arima::{self, ArimaOrder};
use crate::error::{Error, Result};
use crate::evaluation::{self, ModelKind, ModelSettings};
use crate::gp;
use crate::ingest::{self, ColumnMapping, IngestReport, Pollutant, RawReading, Station, STATION_ROSTER};
use crate::timeseries::{
    interpolate_gaps, resample_mean, split_holdout, Granularity, Instant, Observation, SplitSpec, TimeSeries,
};
use crate::trend::{self, FiveNumberSummary, WEEKDAY_NAMES};

/// Minimum share of hours present for a day to get a daily mean.
pub const DAILY_COVERAGE: f64 = 0.75;
/// Longest run of missing hourly / daily values filled by interpolation.
pub const HOURLY_MAX_GAP: usize = 6;
pub const DAILY_MAX_GAP: usize = 3;

#[derive(Debug, Parser)]
#[command(name = "aircast", version, about = "PM2.5 trend analysis and forecaster comparison")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse sensor CSVs into cleaned hourly and daily series per station.
    Ingest,
    /// Boxplot, calendar, seasonal and exceedance tables per station.
    Trend,
    /// Fit models on the training split and forecast past its end.
    Forecast,
    /// Rolling one-step holdout comparison of the selected models.
    Evaluate,
    /// Write a synthetic multi-station CSV in the canonical schema.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Input CSV files (`.gz` accepted); comma separated or repeated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub input: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "AIRCAST_OUT", default_value = "aircast-out")]
    pub out: PathBuf,
    /// Restrict to these stations (case-insensitive).
    #[arg(long, global = true, value_delimiter = ',')]
    pub station: Vec<String>,
    #[arg(long, global = true, default_value = "PM25")]
    pub pollutant: Pollutant,
    /// Series used by forecast and evaluate: hourly or daily.
    #[arg(long, global = true, default_value = "daily")]
    pub granularity: Granularity,
    /// Models: arima, ann, gp, naive.
    #[arg(long, global = true, value_delimiter = ',', default_value = "arima,ann,gp")]
    pub models: Vec<ModelKind>,
    /// Trailing holdout: a fraction such as 0.2 or a count such as 30.
    #[arg(long, global = true, default_value = "0.2")]
    pub holdout: SplitSpec,
    #[arg(long, global = true, default_value_t = 7)]
    pub horizon: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = trend::WHO_24H_GUIDELINE)]
    pub who_threshold: f64,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Worker threads for per-station work; defaults to available parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Fixed ARIMA order `p,d,q` instead of AIC selection.
    #[arg(long, global = true, value_parser = parse_order)]
    pub arima_order: Option<ArimaOrder>,
}

fn parse_order(s: &str) -> std::result::Result<ArimaOrder, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [p, d, q] = parts.as_slice() else {
        return Err(format!("expected p,d,q, got '{s}'"));
    };
    let n = |v: &str| v.parse::<usize>().map_err(|e| format!("{v}: {e}"));
    ArimaOrder::new(n(p)?, n(d)?, n(q)?).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// AR coefficients applied to every station, overriding the built-in profiles.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Option<Vec<f64>>,
    /// MA coefficients applied to every station.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// Innovation standard deviation applied to every station.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Mean daily level applied to every station, µg/m³.
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long, default_value_t = 730)]
    pub days: usize,
    /// Amplitude of the zero-mean diurnal cycle added to hourly values.
    #[arg(long, default_value_t = 4.0)]
    pub diurnal: f64,
    #[arg(long, default_value = "2020-01-01")]
    pub start: NaiveDate,
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 1,
        Error::EmptySeries(_) | Error::EmptyInput(_) => 3,
        Error::NoConvergedModel | Error::NoValidFit => 4,
        Error::Adapter { source, .. } => exit_code(source),
        _ => 2,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("aircast: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.run.jobs {
        if j == 0 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Ingest => cmd_ingest(&cli.run),
        Command::Trend => cmd_trend(&cli.run),
        Command::Forecast => cmd_forecast(&cli.run),
        Command::Evaluate => cmd_evaluate(&cli.run),
        Command::Simulate(s) => cmd_simulate(&cli.run, s),
    })
}

/// Seed for one station/model pair, fanned out from the run seed.
pub fn derive_seed(seed: u64, station: &str, purpose: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(station.to_lowercase().as_bytes());
    h.update([0]);
    h.update(purpose.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("32-byte digest"))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn station_filter(run: &RunArgs) -> Result<Option<BTreeSet<Station>>> {
    if run.station.is_empty() {
        return Ok(None);
    }
    run.station.iter().map(Station::new).collect::<Result<_>>().map(Some)
}

// ---- series files -------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub station: String,
    pub slug: String,
    pub pollutant: Pollutant,
    pub hourly: String,
    pub daily: String,
    pub hourly_len: usize,
    pub daily_len: usize,
}

fn write_series(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "timestamp,value")?;
    for o in series.observations() {
        writeln!(w, "{},{}", o.at, o.value)?;
    }
    w.flush()?;
    Ok(())
}

fn read_series(path: &Path, granularity: Granularity) -> Result<TimeSeries> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Schema(format!("{}: {other:?}", path.display())),
    })?;
    let mut obs = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        let bad = || Error::Schema(format!("{}: bad row {}", path.display(), i + 2));
        let at = rec.get(0).and_then(Instant::parse_rfc3339).ok_or_else(bad)?;
        let value: f64 = rec.get(1).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        obs.push(Observation::new(at, value));
    }
    TimeSeries::new(granularity, obs)
}

fn load_index(run: &RunArgs) -> Result<Vec<SeriesEntry>> {
    let entries: Vec<SeriesEntry> = read_json(&run.out.join("series").join("index.json"))?;
    let entries: Vec<SeriesEntry> = entries.into_iter().filter(|e| e.pollutant == run.pollutant).collect();
    let selected = match station_filter(run)? {
        None => entries,
        Some(f) => entries
            .into_iter()
            .filter(|e| Station::new(e.station.as_str()).is_ok_and(|s| f.contains(&s)))
            .collect(),
    };
    if selected.is_empty() {
        return Err(Error::EmptySeries("no ingested series match the station and pollutant filters".into()));
    }
    Ok(selected)
}

fn load_series(run: &RunArgs, entry: &SeriesEntry, granularity: Granularity) -> Result<TimeSeries> {
    let file = match granularity {
        Granularity::Hourly => &entry.hourly,
        Granularity::Daily => &entry.daily,
        Granularity::Raw => {
            return Err(Error::Granularity("models need hourly or daily series".into()));
        }
    };
    let s = read_series(&run.out.join("series").join(file), granularity)?;
    if s.is_empty() {
        return Err(Error::EmptySeries(format!("{} has no {granularity:?} observations", entry.station)));
    }
    Ok(s)
}

// ---- ingest -------------------------------------------------------------

/// Cleans one station's readings into gap-filled hourly and daily series.
pub fn clean_station(readings: &[RawReading], station: &Station, pollutant: Pollutant) -> Result<(TimeSeries, TimeSeries)> {
    let raw = ingest::build_station_series(readings, station, pollutant)?;
    let hourly = interpolate_gaps(&resample_mean(&raw, Granularity::Hourly, 0.0)?, HOURLY_MAX_GAP)?;
    // a station too sparse for any full day still keeps its hourly record
    let daily = match resample_mean(&hourly, Granularity::Daily, DAILY_COVERAGE) {
        Ok(d) => interpolate_gaps(&d, DAILY_MAX_GAP)?,
        Err(Error::EmptySeries(_)) => TimeSeries::new(Granularity::Daily, Vec::new())?,
        Err(e) => return Err(e),
    };
    Ok((hourly, daily))
}

fn cmd_ingest(run: &RunArgs) -> Result<()> {
    if run.input.is_empty() {
        return Err(Error::InvalidArgument("ingest needs at least one --input".into()));
    }
    let mut readings = Vec::new();
    let mut report = IngestReport::default();
    for path in &run.input {
        let (r, rep) = ingest::parse_readings(ingest::open_input(path)?, &ColumnMapping::default())?;
        readings.extend(r);
        report.merge(rep);
    }
    fs::create_dir_all(&run.out)?;
    write_json(&run.out.join("ingest_report.json"), &report)?;
    if report.rows_accepted == 0 {
        return Err(Error::EmptyInput("no rows accepted".into()));
    }

    let filter = station_filter(run)?;
    let stations: BTreeSet<Station> = readings
        .iter()
        .filter(|r| r.pollutant == run.pollutant)
        .map(|r| r.station.clone())
        .filter(|s| filter.as_ref().is_none_or(|f| f.contains(s)))
        .collect();
    if stations.is_empty() {
        return Err(Error::EmptySeries(format!("no {} readings for the selected stations", run.pollutant)));
    }
    let stations: Vec<Station> = stations.into_iter().collect();
    let cleaned: Vec<(TimeSeries, TimeSeries)> = stations
        .par_iter()
        .map(|s| clean_station(&readings, s, run.pollutant))
        .collect::<Result<_>>()?;

    let dir = run.out.join("series");
    let mut index = Vec::new();
    for (station, (hourly, daily)) in stations.iter().zip(&cleaned) {
        let slug = station.slug();
        let entry = SeriesEntry {
            station: station.name().to_string(),
            hourly: format!("{slug}_hourly.csv"),
            daily: format!("{slug}_daily.csv"),
            slug,
            pollutant: run.pollutant,
            hourly_len: hourly.len(),
            daily_len: daily.len(),
        };
        write_series(&dir.join(&entry.hourly), hourly)?;
        write_series(&dir.join(&entry.daily), daily)?;
        index.push(entry);
    }
    write_json(&dir.join("index.json"), &index)?;
    eprintln!(
        "aircast: ingested {} of {} rows, {} stations",
        report.rows_accepted,
        report.rows_read,
        index.len()
    );
    Ok(())
}

// ---- trend --------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationTrend {
    pub station: String,
    pub median_hourly: f64,
    pub mean_daily: f64,
    pub peak_hour: Option<usize>,
    pub peak_weekday: Option<String>,
    pub exceedance_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub who_threshold: f64,
    /// Highest median hourly concentration first.
    pub ranking: Vec<StationTrend>,
}

fn peak(profile: &[Option<FiveNumberSummary>]) -> Option<usize> {
    profile
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|s| (i, s.median)))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
}

fn trend_station(run: &RunArgs, entry: &SeriesEntry) -> Result<StationTrend> {
    let hourly = load_series(run, entry, Granularity::Hourly)?;
    let daily = load_series(run, entry, Granularity::Daily)?;
    let hours = trend::hour_of_day_profile(&hourly)?;
    let weekdays = trend::day_of_week_profile(&daily)?;
    let calendar = trend::calendar_daily_means(&daily)?;
    let seasons = trend::seasonal_means(&daily)?;
    let exceed = trend::who_exceedance(&calendar, run.who_threshold);

    let dir = run.out.join("trend");
    let path = |name: &str| dir.join(format!("{}_{name}.{}", entry.slug, run.format.ext()));
    match run.format {
        Format::Csv => {
            let mut w = create(&path("hour_of_day"))?;
            trend::write_hour_profile_csv(&mut w, &hours)?;
            w.flush()?;
            let mut w = create(&path("day_of_week"))?;
            trend::write_weekday_profile_csv(&mut w, &weekdays)?;
            w.flush()?;
            let mut w = create(&path("calendar"))?;
            trend::write_calendar_csv(&mut w, &calendar)?;
            w.flush()?;
            let mut w = create(&path("seasonal"))?;
            trend::write_seasonal_csv(&mut w, &seasons)?;
            w.flush()?;
            let mut w = create(&path("who_exceedance"))?;
            trend::write_exceedance_csv(&mut w, &exceed)?;
            w.flush()?;
        }
        Format::Json => {
            write_json(&path("hour_of_day"), &hours)?;
            let named: Vec<(&str, &Option<FiveNumberSummary>)> = WEEKDAY_NAMES.iter().copied().zip(&weekdays).collect();
            write_json(&path("day_of_week"), &named)?;
            write_json(&path("calendar"), &calendar)?;
            write_json(&path("seasonal"), &seasons)?;
            write_json(&path("who_exceedance"), &exceed)?;
        }
    }

    let values = hourly.values();
    let daily_values = daily.values();
    Ok(StationTrend {
        station: entry.station.clone(),
        median_hourly: trend::five_number_summary(&values)?.median,
        mean_daily: daily_values.iter().sum::<f64>() / daily_values.len() as f64,
        peak_hour: peak(&hours),
        peak_weekday: peak(&weekdays).map(|i| WEEKDAY_NAMES[i].to_string()),
        exceedance_fraction: exceed.fraction,
    })
}

fn cmd_trend(run: &RunArgs) -> Result<()> {
    if !run.who_threshold.is_finite() {
        return Err(Error::InvalidArgument("--who-threshold must be finite".into()));
    }
    let entries = load_index(run)?;
    let mut ranking: Vec<StationTrend> =
        entries.par_iter().map(|e| trend_station(run, e)).collect::<Result<_>>()?;
    ranking.sort_by(|a, b| b.median_hourly.total_cmp(&a.median_hourly).then(a.station.cmp(&b.station)));
    write_json(
        &run.out.join("trend").join("summary.json"),
        &TrendSummary { who_threshold: run.who_threshold, ranking },
    )
}

// ---- forecast and evaluate ---------------------------------------------

fn model_settings(run: &RunArgs, station: &str) -> ModelSettings {
    let mut s = ModelSettings::default();
    s.arima.order = run.arima_order;
    s.ann.train.seed = derive_seed(run.seed, station, "ann");
    s
}

fn check_models(run: &RunArgs) -> Result<Vec<ModelKind>> {
    let mut seen = BTreeSet::new();
    let models: Vec<ModelKind> = run.models.iter().copied().filter(|m| seen.insert(*m)).collect();
    if models.is_empty() {
        return Err(Error::InvalidArgument("no models selected".into()));
    }
    Ok(models)
}

#[derive(Debug, Clone, PartialEq)]
struct Track {
    model: ModelKind,
    means: Vec<f64>,
    variances: Option<Vec<f64>>,
    json: String,
}

fn forecast_model(kind: ModelKind, settings: &ModelSettings, train: &TimeSeries, horizon: usize) -> Result<Track> {
    match kind {
        ModelKind::Naive => {
            let last = train.last().ok_or_else(|| Error::EmptySeries("training split".into()))?.value;
            Ok(Track { model: kind, means: vec![last; horizon], variances: None, json: "{}".into() })
        }
        ModelKind::Arima => {
            let a = settings.arima;
            let model = match a.order {
                Some(o) => arima::fit_arima(train, o)?,
                None => arima::select_order(train, a.p_max, a.d_max, a.q_max)?.1,
            };
            let means = arima::forecast(&model, train, horizon)?;
            Ok(Track { model: kind, means, variances: None, json: model.to_json()? })
        }
        ModelKind::Ann => {
            let a = &settings.ann;
            let (net, _) = ann::train(train, a.window, &a.hidden, a.activation, &a.train)?;
            let means = ann::forecast_recursive(&net, train, horizon)?;
            Ok(Track { model: kind, means, variances: None, json: net.to_json()? })
        }
        ModelKind::Gp => {
            let f = gp::forecast_gp(train, horizon, &settings.gp)?;
            Ok(Track {
                model: kind,
                means: f.means,
                variances: Some(f.variances),
                json: serde_json::to_string_pretty(&f.summary)?,
            })
        }
    }
}

#[derive(Debug, Serialize)]
struct ForecastRow {
    timestamp: String,
    actual: Option<f64>,
    model: ModelKind,
    mean: f64,
    variance: Option<f64>,
}

fn forecast_station(run: &RunArgs, entry: &SeriesEntry, models: &[ModelKind]) -> Result<usize> {
    let series = load_series(run, entry, run.granularity)?;
    let (train, test) = split_holdout(&series, run.holdout)?;
    let settings = model_settings(run, &entry.station);
    let mut tracks = Vec::new();
    for &kind in models {
        match forecast_model(kind, &settings, &train, run.horizon) {
            Ok(t) => tracks.push(t),
            Err(e) => eprintln!("aircast: {} {}: {e}", entry.station, kind.label()),
        }
    }
    let instants: Vec<Instant> = (1..=run.horizon)
        .map(|k| train.instant_after_end(k).ok_or_else(|| Error::EmptySeries("training split".into())))
        .collect::<Result<_>>()?;
    let actual = |at: Instant| test.observations().iter().find(|o| o.at == at).map(|o| o.value);

    for t in &tracks {
        let path = run.out.join("models").join(format!("{}_{}.json", entry.slug, t.model.slug()));
        let mut w = create(&path)?;
        w.write_all(t.json.as_bytes())?;
        w.write_all(b"\n")?;
        w.flush()?;
    }
    let path = run.out.join("forecast").join(format!("{}_forecast.{}", entry.slug, run.format.ext()));
    match run.format {
        Format::Csv => {
            let mut w = create(&path)?;
            write!(w, "timestamp,actual")?;
            for t in &tracks {
                write!(w, ",{}", t.model.slug())?;
                if t.variances.is_some() {
                    write!(w, ",{}_variance", t.model.slug())?;
                }
            }
            writeln!(w)?;
            for (k, &at) in instants.iter().enumerate() {
                write!(w, "{at},{}", actual(at).map(|v| v.to_string()).unwrap_or_default())?;
                for t in &tracks {
                    write!(w, ",{}", t.means[k])?;
                    if let Some(v) = &t.variances {
                        write!(w, ",{}", v[k])?;
                    }
                }
                writeln!(w)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<ForecastRow> = tracks
                .iter()
                .flat_map(|t| {
                    instants.iter().enumerate().map(move |(k, &at)| ForecastRow {
                        timestamp: at.to_string(),
                        actual: actual(at),
                        model: t.model,
                        mean: t.means[k],
                        variance: t.variances.as_ref().map(|v| v[k]),
                    })
                })
                .collect();
            write_json(&path, &rows)?;
        }
    }
    Ok(tracks.len())
}

fn cmd_forecast(run: &RunArgs) -> Result<()> {
    if run.horizon == 0 {
        return Err(Error::InvalidArgument("--horizon must be at least 1".into()));
    }
    let models = check_models(run)?;
    let entries = load_index(run)?;
    let fitted: Vec<usize> =
        entries.par_iter().map(|e| forecast_station(run, e, &models)).collect::<Result<_>>()?;
    if fitted.iter().sum::<usize>() == 0 {
        return Err(Error::NoConvergedModel);
    }
    Ok(())
}

fn cmd_evaluate(run: &RunArgs) -> Result<()> {
    let models = check_models(run)?;
    let entries = load_index(run)?;
    let reports: Vec<evaluation::EvalReport> = entries
        .par_iter()
        .map(|e| {
            let series = load_series(run, e, run.granularity)?;
            let report = evaluation::compare_models(&e.station, &series, run.holdout, &models, &model_settings(run, &e.station))?;
            for m in &report.models {
                if let Some(err) = &m.error {
                    eprintln!("aircast: {} {}: {err}", e.station, m.model.label());
                }
            }
            Ok(report)
        })
        .collect::<Result<_>>()?;
    let dir = run.out.join("evaluation");
    let mut w = create(&dir.join("table.csv"))?;
    evaluation::write_table_csv(&mut w, &reports, &models)?;
    w.flush()?;
    write_json(&dir.join("report.json"), &reports)?;
    if reports.iter().all(|r| r.models.iter().all(|m| m.score.is_none())) {
        return Err(Error::NoConvergedModel);
    }
    Ok(())
}

// ---- simulate -----------------------------------------------------------

/// ARMA settings for one simulated station; values are daily means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationProfile {
    pub station: String,
    pub beta: Vec<f64>,
    pub theta: Vec<f64>,
    pub sigma: f64,
    pub level: f64,
}

/// Built-in profiles, one per roster station. Gitega is a plain AR(1)
/// with unit innovation variance.
pub fn default_profiles() -> Vec<StationProfile> {
    let table: [(&[f64], &[f64], f64, f64); 9] = [
        (&[0.7], &[], 1.0, 40.0),
        (&[0.6], &[0.3], 2.0, 35.0),
        (&[0.5, 0.2], &[], 2.5, 45.0),
        (&[0.8], &[], 1.5, 38.0),
        (&[0.4], &[0.4], 3.0, 32.0),
        (&[0.65], &[], 2.0, 42.0),
        (&[0.55], &[0.2], 2.5, 44.0),
        (&[0.75], &[], 1.8, 48.0),
        (&[0.3], &[0.5], 2.2, 36.0),
    ];
    STATION_ROSTER
        .iter()
        .zip(table)
        .map(|(name, (beta, theta, sigma, level))| StationProfile {
            station: name.to_string(),
            beta: beta.to_vec(),
            theta: theta.to_vec(),
            sigma,
            level,
        })
        .collect()
}

/// Hourly readings whose local-day means equal an ARMA path around
/// `level` (the diurnal cycle sums to zero over a day). Negative hours are
/// clipped to zero.
pub fn simulate_station(
    profile: &StationProfile,
    start: NaiveDate,
    days: usize,
    diurnal: f64,
    seed: u64,
) -> Result<Vec<(Instant, f64)>> {
    if !profile.level.is_finite() || !diurnal.is_finite() {
        return Err(Error::InvalidArgument("level and diurnal amplitude must be finite".into()));
    }
    let alpha = profile.level * (1.0 - profile.beta.iter().sum::<f64>());
    let daily = arima::simulate_arma_values(alpha, &profile.beta, &profile.theta, profile.sigma, days, seed)?;
    let mut out = Vec::with_capacity(days * 24);
    for (d, v) in daily.iter().enumerate() {
        let date = start + Duration::days(d as i64);
        for h in 0..24 {
            let cycle = diurnal * (2.0 * std::f64::consts::PI * (h as f64 - 2.0) / 24.0).sin();
            out.push((Instant::local_hour(date, h), (v + cycle).max(0.0)));
        }
    }
    Ok(out)
}

fn cmd_simulate(run: &RunArgs, sim: &SimulateArgs) -> Result<()> {
    let filter = station_filter(run)?;
    let mut profiles: Vec<StationProfile> = default_profiles()
        .into_iter()
        .filter(|p| filter.as_ref().is_none_or(|f| Station::new(p.station.as_str()).is_ok_and(|s| f.contains(&s))))
        .collect();
    if profiles.is_empty() {
        return Err(Error::EmptySeries("no roster station matches --station".into()));
    }
    for p in &mut profiles {
        if let Some(b) = &sim.beta {
            p.beta = b.clone();
        }
        if let Some(t) = &sim.theta {
            p.theta = t.clone();
        }
        if let Some(s) = sim.sigma {
            p.sigma = s;
        }
        if let Some(l) = sim.level {
            p.level = l;
        }
    }
    let tracks: Vec<Vec<(Instant, f64)>> = profiles
        .par_iter()
        .map(|p| simulate_station(p, sim.start, sim.days, sim.diurnal, derive_seed(run.seed, &p.station, "simulate")))
        .collect::<Result<_>>()?;

    fs::create_dir_all(&run.out)?;
    let mut w = create(&run.out.join("simulated.csv"))?;
    writeln!(w, "station,timestamp,pollutant,value")?;
    for (p, track) in profiles.iter().zip(&tracks) {
        for (at, v) in track {
            writeln!(w, "{},{at},{},{v}", p.station, run.pollutant)?;
        }
    }
    w.flush()?;
    write_json(&run.out.join("simulated_profiles.json"), &profiles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_by_station_and_purpose() {
        let a = derive_seed(1, "Gitega", "ann");
        assert_eq!(a, derive_seed(1, "gitega", "ann"));
        assert_ne!(a, derive_seed(1, "Kiyovu", "ann"));
        assert_ne!(a, derive_seed(1, "Gitega", "simulate"));
        assert_ne!(a, derive_seed(2, "Gitega", "ann"));
    }

    #[test]
    fn simulated_daily_means_match_arma_path() {
        let p = &default_profiles()[0];
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let hours = simulate_station(p, start, 20, 4.0, 7).unwrap();
        let alpha = p.level * (1.0 - p.beta[0]);
        let daily = arima::simulate_arma_values(alpha, &p.beta, &p.theta, p.sigma, 20, 7).unwrap();
        for (d, chunk) in hours.chunks(24).enumerate() {
            let mean = chunk.iter().map(|x| x.1).sum::<f64>() / 24.0;
            assert!((mean - daily[d]).abs() < 1e-12);
            assert_eq!(chunk[0].0, Instant::local_midnight(start + Duration::days(d as i64)));
        }
    }

    #[test]
    fn order_flag() {
        assert_eq!(parse_order("1,0,2").unwrap(), ArimaOrder { p: 1, d: 0, q: 2 });
        assert!(parse_order("1,0").is_err());
        assert!(parse_order("11,0,0").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 1);
        assert_eq!(exit_code(&Error::Schema("x".into())), 2);
        assert_eq!(exit_code(&Error::NonStationary(vec![1.1])), 2);
        assert_eq!(exit_code(&Error::EmptyInput("x".into())), 3);
        assert_eq!(exit_code(&Error::NoConvergedModel), 4);
    }
}
