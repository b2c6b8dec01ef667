//! Descriptive statistics for PM2.5 trend analysis: boxplot summaries by
//! hour of day and day of week, calendar daily means, Rwandan seasons and
//! WHO 24-hour guideline exceedance.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::{Granularity, TimeSeries};

/// WHO 24-hour mean PM2.5 guideline, µg/m³.
pub const WHO_24H_GUIDELINE: f64 = 15.0;

/// Mean daily PM2.5 across the Kigali network reported for the study
/// period, µg/m³. Documentation value; the source data is not public.
pub const REPORTED_NETWORK_DAILY_MEAN: f64 = 42.6;

/// Seasonal network means reported for the study period (long dry, short
/// rainy, short dry, long rainy), µg/m³. Documentation values only.
pub const REPORTED_SEASONAL_MEANS: [(Season, f64); 4] = [
    (Season::LongDry, 45.844),
    (Season::ShortRainy, 37.358),
    (Season::ShortDry, 44.155),
    (Season::LongRainy, 35.063),
];

pub const WEEKDAY_NAMES: [&str; 7] =
    ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumberSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub iqr: f64,
    pub count: usize,
}

/// Linear-interpolation quantile at position `(n - 1) * p` of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn five_number_summary(values: &[f64]) -> Result<FiveNumberSummary> {
    if values.is_empty() {
        return Err(Error::EmptyInput("five-number summary of no values".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in summary input".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    Ok(FiveNumberSummary {
        min: sorted[0],
        q1,
        median: quantile_sorted(&sorted, 0.5),
        q3,
        max: sorted[sorted.len() - 1],
        iqr: q3 - q1,
        count: sorted.len(),
    })
}

/// Boxplot with whiskers fenced at `k`·IQR beyond the quartiles. `min` and
/// `max` become the most extreme values inside the fences; the values
/// outside are returned as outliers.
pub fn fenced_summary(values: &[f64], k: f64) -> Result<(FiveNumberSummary, Vec<f64>)> {
    let mut s = five_number_summary(values)?;
    let lo = s.q1 - k * s.iqr;
    let hi = s.q3 + k * s.iqr;
    let (inside, outliers): (Vec<f64>, Vec<f64>) =
        values.iter().partition(|&&v| v >= lo && v <= hi);
    s.min = inside.iter().copied().fold(f64::INFINITY, f64::min);
    s.max = inside.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((s, outliers))
}

fn require(series: &TimeSeries, g: Granularity) -> Result<()> {
    if series.granularity() != g {
        return Err(Error::Granularity(format!(
            "expected {g:?} series, got {:?}",
            series.granularity()
        )));
    }
    Ok(())
}

fn summarize_groups(groups: Vec<Vec<f64>>) -> Vec<Option<FiveNumberSummary>> {
    groups
        .into_iter()
        .map(|g| five_number_summary(&g).ok())
        .collect()
}

/// Summaries for local hours 0-23; `None` where an hour has no data.
pub fn hour_of_day_profile(series: &TimeSeries) -> Result<Vec<Option<FiveNumberSummary>>> {
    require(series, Granularity::Hourly)?;
    if series.is_empty() {
        return Err(Error::EmptySeries("hour-of-day profile".into()));
    }
    let mut groups = vec![Vec::new(); 24];
    for o in series.observations() {
        groups[o.at.local_hour_of_day() as usize].push(o.value);
    }
    Ok(summarize_groups(groups))
}

/// Summaries for Monday..Sunday; `None` where a weekday has no data.
pub fn day_of_week_profile(series: &TimeSeries) -> Result<Vec<Option<FiveNumberSummary>>> {
    require(series, Granularity::Daily)?;
    if series.is_empty() {
        return Err(Error::EmptySeries("day-of-week profile".into()));
    }
    let mut groups = vec![Vec::new(); 7];
    for o in series.observations() {
        groups[o.at.local_date().weekday().num_days_from_monday() as usize].push(o.value);
    }
    Ok(summarize_groups(groups))
}

/// Daily means keyed by local calendar date.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CalendarGrid {
    pub entries: BTreeMap<NaiveDate, f64>,
}

pub fn calendar_daily_means(series: &TimeSeries) -> Result<CalendarGrid> {
    require(series, Granularity::Daily)?;
    let entries = series
        .observations()
        .iter()
        .map(|o| (o.at.local_date(), o.value))
        .collect();
    Ok(CalendarGrid { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Season {
    LongDry,
    ShortRainy,
    ShortDry,
    LongRainy,
}

impl Season {
    pub const ALL: [Season; 4] =
        [Season::LongDry, Season::ShortRainy, Season::ShortDry, Season::LongRainy];

    pub fn label(self) -> &'static str {
        match self {
            Season::LongDry => "long dry (Jun-Aug)",
            Season::ShortRainy => "short rainy (Sep-Nov)",
            Season::ShortDry => "short dry (Dec-Feb)",
            Season::LongRainy => "long rainy (Mar-May)",
        }
    }
}

pub fn season_of(month: u32) -> Result<Season> {
    match month {
        6..=8 => Ok(Season::LongDry),
        9..=11 => Ok(Season::ShortRainy),
        12 | 1 | 2 => Ok(Season::ShortDry),
        3..=5 => Ok(Season::LongRainy),
        _ => Err(Error::Range(format!("month {month} outside 1..=12"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeasonMean {
    pub mean: f64,
    pub count: usize,
}

pub fn seasonal_means(series: &TimeSeries) -> Result<BTreeMap<Season, SeasonMean>> {
    require(series, Granularity::Daily)?;
    if series.is_empty() {
        return Err(Error::EmptySeries("seasonal means".into()));
    }
    let mut acc: BTreeMap<Season, (f64, usize)> = BTreeMap::new();
    for o in series.observations() {
        let season = season_of(o.at.local_date().month())?;
        let e = acc.entry(season).or_insert((0.0, 0));
        e.0 += o.value;
        e.1 += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(s, (sum, n))| (s, SeasonMean { mean: sum / n as f64, count: n }))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceDay {
    pub date: NaiveDate,
    pub value: f64,
    pub exceeds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceReport {
    pub threshold: f64,
    pub days: Vec<ExceedanceDay>,
    /// Share of days strictly above the threshold; absent for an empty grid.
    pub fraction: Option<f64>,
}

pub fn who_exceedance(grid: &CalendarGrid, threshold: f64) -> ExceedanceReport {
    let days: Vec<ExceedanceDay> = grid
        .entries
        .iter()
        .map(|(&date, &value)| ExceedanceDay { date, value, exceeds: value > threshold })
        .collect();
    let fraction = (!days.is_empty())
        .then(|| days.iter().filter(|d| d.exceeds).count() as f64 / days.len() as f64);
    ExceedanceReport { threshold, days, fraction }
}

// ---- plot-data writers -------------------------------------------------

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_profile<W: Write>(
    mut w: W,
    key: &str,
    labels: &[String],
    profile: &[Option<FiveNumberSummary>],
) -> Result<()> {
    writeln!(w, "{key},count,min,q1,median,q3,max,iqr")?;
    for (label, s) in labels.iter().zip(profile) {
        match s {
            Some(s) => writeln!(
                w,
                "{label},{},{},{},{},{},{},{}",
                s.count, s.min, s.q1, s.median, s.q3, s.max, s.iqr
            )?,
            None => writeln!(w, "{label},0,,,,,,")?,
        }
    }
    Ok(())
}

pub fn write_hour_profile_csv<W: Write>(w: W, profile: &[Option<FiveNumberSummary>]) -> Result<()> {
    let labels: Vec<String> = (0..24).map(|h| h.to_string()).collect();
    write_profile(w, "hour", &labels, profile)
}

/// Weeks start on Monday.
pub fn write_weekday_profile_csv<W: Write>(
    w: W,
    profile: &[Option<FiveNumberSummary>],
) -> Result<()> {
    let labels: Vec<String> = WEEKDAY_NAMES.iter().map(|s| s.to_string()).collect();
    write_profile(w, "weekday", &labels, profile)
}

pub fn write_calendar_csv<W: Write>(mut w: W, grid: &CalendarGrid) -> Result<()> {
    writeln!(w, "date,daily_mean")?;
    for (d, v) in &grid.entries {
        writeln!(w, "{},{}", d.format("%Y-%m-%d"), v)?;
    }
    Ok(())
}

pub fn write_seasonal_csv<W: Write>(mut w: W, means: &BTreeMap<Season, SeasonMean>) -> Result<()> {
    writeln!(w, "season,label,mean,count")?;
    for (s, m) in means {
        writeln!(w, "{s:?},{},{},{}", s.label(), m.mean, m.count)?;
    }
    Ok(())
}

pub fn write_exceedance_csv<W: Write>(mut w: W, report: &ExceedanceReport) -> Result<()> {
    writeln!(w, "date,daily_mean,threshold,exceeds")?;
    for d in &report.days {
        writeln!(w, "{},{},{},{}", d.date.format("%Y-%m-%d"), d.value, report.threshold, d.exceeds)?;
    }
    // summary row: empty date, fraction in the value column
    writeln!(w, "fraction,{},{},", opt(report.fraction), report.threshold)?;
    Ok(())
}
