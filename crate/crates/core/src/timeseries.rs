//! Canonical time-series representation and the transformations every
//! other module consumes: resampling to coarser buckets, differencing and
//! its inverse, bounded gap interpolation and holdout splitting.
//!
//! Bucket boundaries are computed in Kigali local time (UTC+2, no DST).

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, FixedOffset, NaiveDate, TimeZone};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offset of Kigali local time from UTC, in seconds.
pub const LOCAL_OFFSET_SECS: i64 = 2 * 3600;

const SECS_PER_HOUR: i64 = 3600;
const SECS_PER_DAY: i64 = 86_400;

/// Seconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Instant(pub i64);

impl Instant {
    pub fn from_epoch_seconds(secs: i64) -> Self {
        Instant(secs)
    }

    pub fn epoch_seconds(self) -> i64 {
        self.0
    }

    /// Midnight local time at the start of `date`.
    pub fn local_midnight(date: NaiveDate) -> Self {
        let utc_midnight = date
            .and_hms_opt(0, 0, 0)
            .expect("midnight is always valid")
            .and_utc()
            .timestamp();
        Instant(utc_midnight - LOCAL_OFFSET_SECS)
    }

    /// Local wall-clock instant `date hour:00`.
    pub fn local_hour(date: NaiveDate, hour: u32) -> Self {
        Instant(Self::local_midnight(date).0 + i64::from(hour) * SECS_PER_HOUR)
    }

    pub fn parse_rfc3339(s: &str) -> Option<Self> {
        let s = s.trim();
        DateTime::parse_from_rfc3339(s)
            .or_else(|_| DateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%:z"))
            .or_else(|_| DateTime::parse_from_str(s, "%Y-%m-%dT%H:%M%:z"))
            .ok()
            .map(|dt| Instant(dt.timestamp()))
    }

    pub fn to_local(self) -> DateTime<FixedOffset> {
        let tz = FixedOffset::east_opt(LOCAL_OFFSET_SECS as i32).expect("valid offset");
        tz.timestamp_opt(self.0, 0)
            .single()
            .expect("instant within chrono range")
    }

    pub fn local_date(self) -> NaiveDate {
        self.to_local().date_naive()
    }

    /// Hour of day (0-23) in local time.
    pub fn local_hour_of_day(self) -> u32 {
        ((self.0 + LOCAL_OFFSET_SECS).rem_euclid(SECS_PER_DAY) / SECS_PER_HOUR) as u32
    }

    fn bucket_start(self, step: i64) -> Instant {
        let local = self.0 + LOCAL_OFFSET_SECS;
        Instant(local.div_euclid(step) * step - LOCAL_OFFSET_SECS)
    }
}

impl fmt::Display for Instant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_local().format("%Y-%m-%dT%H:%M:%S%:z"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Raw,
    Hourly,
    Daily,
}

impl Granularity {
    /// Nominal spacing between observations; `None` for raw data.
    pub fn step_seconds(self) -> Option<i64> {
        match self {
            Granularity::Raw => None,
            Granularity::Hourly => Some(SECS_PER_HOUR),
            Granularity::Daily => Some(SECS_PER_DAY),
        }
    }

    pub fn is_aligned(self, at: Instant) -> bool {
        match self.step_seconds() {
            None => true,
            Some(step) => at.bucket_start(step) == at,
        }
    }
}

impl std::str::FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Granularity::Raw),
            "hourly" | "hour" => Ok(Granularity::Hourly),
            "daily" | "day" => Ok(Granularity::Daily),
            other => Err(Error::InvalidArgument(format!("unknown granularity '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub at: Instant,
    pub value: f64,
}

impl Observation {
    pub fn new(at: Instant, value: f64) -> Self {
        Observation { at, value }
    }
}

/// Timestamp-ordered observations at a declared granularity.
///
/// Construction enforces strictly increasing instants, finite values and
/// bucket alignment for hourly/daily data. Values may be negative: the
/// differenced and simulated series produced downstream are not
/// concentrations. Non-negativity of measured data is enforced at ingest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    granularity: Granularity,
    observations: Vec<Observation>,
}

impl TimeSeries {
    pub fn new(granularity: Granularity, observations: Vec<Observation>) -> Result<Self> {
        for (i, obs) in observations.iter().enumerate() {
            if !obs.value.is_finite() {
                return Err(Error::InvalidSeries(format!("non-finite value at index {i}")));
            }
            if !granularity.is_aligned(obs.at) {
                return Err(Error::InvalidSeries(format!(
                    "instant {} not aligned to {granularity:?} boundary",
                    obs.at
                )));
            }
        }
        if let Some(i) = observations.windows(2).position(|w| w[0].at >= w[1].at) {
            return Err(Error::InvalidSeries(format!(
                "instants not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(TimeSeries { granularity, observations })
    }

    /// Consecutive daily observations starting at local midnight of `start`.
    pub fn daily_from_values(start: NaiveDate, values: &[f64]) -> Result<Self> {
        let t0 = Instant::local_midnight(start).0;
        let obs = values
            .iter()
            .enumerate()
            .map(|(i, &v)| Observation::new(Instant(t0 + i as i64 * SECS_PER_DAY), v))
            .collect();
        TimeSeries::new(Granularity::Daily, obs)
    }

    pub fn empty(granularity: Granularity) -> Self {
        TimeSeries { granularity, observations: Vec::new() }
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.value).collect()
    }

    pub fn instants(&self) -> Vec<Instant> {
        self.observations.iter().map(|o| o.at).collect()
    }

    pub fn first(&self) -> Option<&Observation> {
        self.observations.first()
    }

    pub fn last(&self) -> Option<&Observation> {
        self.observations.last()
    }

    /// Observations `[start, end)` as a new series.
    pub fn slice(&self, start: usize, end: usize) -> TimeSeries {
        TimeSeries {
            granularity: self.granularity,
            observations: self.observations[start..end].to_vec(),
        }
    }

    /// Appends an observation, keeping the series invariants.
    pub fn push(&mut self, obs: Observation) -> Result<()> {
        if !obs.value.is_finite() {
            return Err(Error::InvalidSeries("non-finite value".into()));
        }
        if !self.granularity.is_aligned(obs.at) {
            return Err(Error::InvalidSeries(format!("instant {} not aligned", obs.at)));
        }
        if let Some(last) = self.observations.last() {
            if obs.at <= last.at {
                return Err(Error::InvalidSeries("instant not after series end".into()));
            }
        }
        self.observations.push(obs);
        Ok(())
    }

    /// Same instants, new values.
    pub fn with_values(&self, values: &[f64]) -> Result<TimeSeries> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch { left: self.len(), right: values.len() });
        }
        let obs = self
            .observations
            .iter()
            .zip(values)
            .map(|(o, &v)| Observation::new(o.at, v))
            .collect();
        TimeSeries::new(self.granularity, obs)
    }

    /// The instant `k` steps after the last observation.
    pub fn instant_after_end(&self, k: usize) -> Option<Instant> {
        let step = self.granularity.step_seconds().unwrap_or(SECS_PER_DAY);
        self.last().map(|o| Instant(o.at.0 + k as i64 * step))
    }

    /// Concatenation of `self` and `other`; `other` must start after `self` ends.
    pub fn concat(&self, other: &TimeSeries) -> Result<TimeSeries> {
        let mut obs = self.observations.clone();
        obs.extend_from_slice(&other.observations);
        TimeSeries::new(self.granularity, obs)
    }
}

impl<'de> Deserialize<'de> for TimeSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            granularity: Granularity,
            observations: Vec<Observation>,
        }
        let raw = Raw::deserialize(d)?;
        TimeSeries::new(raw.granularity, raw.observations).map_err(serde::de::Error::custom)
    }
}

/// Bucket means at a coarser granularity.
///
/// A bucket survives when `count / expected >= min_coverage`. From hourly
/// input the expected count is the number of hours in the bucket. From raw
/// input, coverage is measured by distinct occupied hours (a raw-to-hourly
/// bucket with any reading is fully covered).
pub fn resample_mean(
    series: &TimeSeries,
    target: Granularity,
    min_coverage: f64,
) -> Result<TimeSeries> {
    if target <= series.granularity {
        return Err(Error::Granularity(format!(
            "cannot resample {:?} to {target:?}: target must be coarser",
            series.granularity
        )));
    }
    if !(0.0..=1.0).contains(&min_coverage) {
        return Err(Error::InvalidArgument(format!(
            "min_coverage {min_coverage} outside [0, 1]"
        )));
    }
    let step = target.step_seconds().expect("coarser than raw");
    let expected = (step / SECS_PER_HOUR) as f64;

    struct Bucket {
        sum: f64,
        count: usize,
        hours: Vec<i64>,
    }
    let mut buckets: BTreeMap<Instant, Bucket> = BTreeMap::new();
    for obs in &series.observations {
        let b = buckets.entry(obs.at.bucket_start(step)).or_insert(Bucket {
            sum: 0.0,
            count: 0,
            hours: Vec::new(),
        });
        b.sum += obs.value;
        b.count += 1;
        let hour = obs.at.bucket_start(SECS_PER_HOUR).0;
        if b.hours.last() != Some(&hour) {
            b.hours.push(hour);
        }
    }

    let observations: Vec<Observation> = buckets
        .into_iter()
        .filter(|(_, b)| {
            let covered = match series.granularity {
                Granularity::Hourly => b.count as f64,
                _ => b.hours.len() as f64,
            };
            covered / expected >= min_coverage
        })
        .map(|(at, b)| Observation::new(at, b.sum / b.count as f64))
        .collect();
    if observations.is_empty() {
        return Err(Error::EmptySeries("no bucket met the coverage threshold".into()));
    }
    TimeSeries::new(target, observations)
}

/// Applies first differencing `d` times. Each difference carries the
/// instant of its later operand.
pub fn difference(series: &TimeSeries, d: usize) -> Result<TimeSeries> {
    if series.len() <= d {
        return Err(Error::Length(format!(
            "series of length {} cannot be differenced {d} times",
            series.len()
        )));
    }
    let mut obs = series.observations.clone();
    for _ in 0..d {
        obs = obs
            .windows(2)
            .map(|w| Observation::new(w[1].at, w[1].value - w[0].value))
            .collect();
    }
    TimeSeries::new(series.granularity, obs)
}

/// Left inverse of [`difference`]: `seeds` are the last `d` values before
/// the differenced segment, oldest first.
pub fn inverse_difference(diffed: &TimeSeries, seeds: &[f64], d: usize) -> Result<TimeSeries> {
    let values = integrate(&diffed.values(), seeds, d)?;
    diffed.with_values(&values)
}

pub(crate) fn integrate(diffed: &[f64], seeds: &[f64], d: usize) -> Result<Vec<f64>> {
    if seeds.len() != d {
        return Err(Error::Seed { expected: d, got: seeds.len() });
    }
    // anchors[k] = last value of the k-times differenced seed sequence
    let mut anchors = Vec::with_capacity(d);
    let mut level = seeds.to_vec();
    for _ in 0..d {
        anchors.push(*level.last().expect("non-empty while k < d"));
        level = level.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let mut out = diffed.to_vec();
    for anchor in anchors.into_iter().rev() {
        let mut acc = anchor;
        for v in out.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    Ok(out)
}

/// Fills internal gaps of at most `max_gap` missing steps by linear
/// interpolation. Existing observations are never modified and nothing is
/// extrapolated past either end.
pub fn interpolate_gaps(series: &TimeSeries, max_gap: usize) -> Result<TimeSeries> {
    let step = series.granularity.step_seconds().ok_or_else(|| {
        Error::Granularity("gap interpolation needs hourly or daily data".into())
    })?;
    let mut out = Vec::with_capacity(series.len());
    for w in series.observations.windows(2) {
        let (a, b) = (w[0], w[1]);
        out.push(a);
        let missing = ((b.at.0 - a.at.0) / step - 1) as usize;
        if missing >= 1 && missing <= max_gap {
            let span = (missing + 1) as f64;
            for k in 1..=missing {
                let frac = k as f64 / span;
                out.push(Observation::new(
                    Instant(a.at.0 + k as i64 * step),
                    a.value + (b.value - a.value) * frac,
                ));
            }
        }
    }
    if let Some(last) = series.observations.last() {
        out.push(*last);
    }
    TimeSeries::new(series.granularity, out)
}

/// Minimum number of training observations a split must leave.
pub const MIN_TRAIN_LEN: usize = 10;

/// How many trailing observations to hold out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitSpec {
    Fraction(f64),
    Count(usize),
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::Fraction(0.2)
    }
}

impl SplitSpec {
    pub fn test_len(&self, n: usize) -> Result<usize> {
        match *self {
            SplitSpec::Fraction(f) if f > 0.0 && f < 1.0 => Ok((n as f64 * f).round() as usize),
            SplitSpec::Fraction(f) => Err(Error::Split(format!("fraction {f} outside (0, 1)"))),
            SplitSpec::Count(c) => Ok(c),
        }
    }
}

impl std::str::FromStr for SplitSpec {
    type Err = Error;

    /// `0.2` is a fraction, `30` a trailing count.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(c) = s.parse::<usize>() {
            return Ok(SplitSpec::Count(c));
        }
        s.parse::<f64>()
            .map(SplitSpec::Fraction)
            .map_err(|_| Error::InvalidArgument(format!("bad holdout '{s}'")))
    }
}

/// Splits off the trailing test segment; no shuffling.
pub fn split_holdout(series: &TimeSeries, spec: SplitSpec) -> Result<(TimeSeries, TimeSeries)> {
    let n = series.len();
    let test = spec.test_len(n)?;
    if test == 0 || test > n {
        return Err(Error::Split(format!("holdout of {test} from {n} observations")));
    }
    let train = n - test;
    if train < MIN_TRAIN_LEN {
        return Err(Error::Split(format!(
            "train segment of {train} is below the minimum {MIN_TRAIN_LEN}"
        )));
    }
    Ok((series.slice(0, train), series.slice(train, n)))
}
