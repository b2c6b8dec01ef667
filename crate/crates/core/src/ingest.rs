//! Multi-station sensor CSV ingestion.
//!
//! The canonical schema is `station,timestamp,pollutant,value` with
//! ISO-8601 timestamps that carry an explicit UTC offset. Bad rows are
//! rejected individually with a reason; only a missing header column or a
//! failing stream aborts the parse.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::hash::{Hash, Hasher};
use std::io::{BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::{Granularity, Instant, Observation, TimeSeries};

/// The nine monitoring stations of the Kigali deployment.
pub const STATION_ROSTER: [&str; 9] = [
    "Gitega",
    "Rusororo",
    "Gacuriro",
    "Kiyovu",
    "Rebero",
    "Mount Kigali",
    "Kimihurura",
    "Gikondo Mburabuturo",
    "Gikomero",
];

/// Station identifier. Case is preserved for display; equality, ordering
/// and hashing ignore it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Station(String);

impl Station {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        let trimmed = name.trim();
        if trimmed.is_empty() {
            return Err(Error::InvalidArgument("station name is empty".into()));
        }
        Ok(Station(trimmed.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    fn key(&self) -> String {
        self.0.to_lowercase()
    }

    /// Lower-case file-name-safe form, e.g. `mount_kigali`.
    pub fn slug(&self) -> String {
        let mut out = String::with_capacity(self.0.len());
        for c in self.0.chars() {
            if c.is_ascii_alphanumeric() {
                out.push(c.to_ascii_lowercase());
            } else if !out.ends_with('_') {
                out.push('_');
            }
        }
        let out = out.trim_matches('_').to_string();
        if out.is_empty() {
            "station".to_string()
        } else {
            out
        }
    }
}

impl PartialEq for Station {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Station {}

impl Hash for Station {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for Station {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Station {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Station {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pollutant {
    PM25,
    PM10,
    SO2,
    NO2,
    CO,
}

impl std::str::FromStr for Pollutant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_uppercase();
        match norm.as_str() {
            "PM25" => Ok(Pollutant::PM25),
            "PM10" => Ok(Pollutant::PM10),
            "SO2" => Ok(Pollutant::SO2),
            "NO2" => Ok(Pollutant::NO2),
            "CO" => Ok(Pollutant::CO),
            _ => Err(Error::InvalidArgument(format!("unknown pollutant '{s}'"))),
        }
    }
}

impl fmt::Display for Pollutant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pollutant::PM25 => "PM25",
            Pollutant::PM10 => "PM10",
            Pollutant::SO2 => "SO2",
            Pollutant::NO2 => "NO2",
            Pollutant::CO => "CO",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawReading {
    pub station: Station,
    pub at: Instant,
    pub pollutant: Pollutant,
    pub value: f64,
}

/// Header names for each required field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub station: String,
    pub timestamp: String,
    pub pollutant: String,
    pub value: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            station: "station".into(),
            timestamp: "timestamp".into(),
            pollutant: "pollutant".into(),
            value: "value".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_accepted: usize,
    pub rejects: Vec<Reject>,
    pub stations_seen: BTreeSet<String>,
}

impl IngestReport {
    /// Folds another file's report into this one.
    pub fn merge(&mut self, other: IngestReport) {
        self.rows_read += other.rows_read;
        self.rows_accepted += other.rows_accepted;
        self.rejects.extend(other.rejects);
        self.stations_seen.extend(other.stations_seen);
    }
}

// 1970-01-01 .. 2200-01-01 UTC
const MIN_EPOCH: i64 = 0;
const MAX_EPOCH: i64 = 7_258_118_400;

struct ColumnIndex {
    station: usize,
    timestamp: usize,
    pollutant: usize,
    value: usize,
}

fn locate_columns(header: &csv::ByteRecord, mapping: &ColumnMapping) -> Result<ColumnIndex> {
    let names: Vec<String> = header
        .iter()
        .map(|f| String::from_utf8_lossy(f).trim().trim_start_matches('\u{feff}').to_lowercase())
        .collect();
    let find = |want: &str| {
        let want = want.trim().to_lowercase();
        names
            .iter()
            .position(|n| *n == want)
            .ok_or_else(|| Error::Schema(format!("missing required column '{want}'")))
    };
    Ok(ColumnIndex {
        station: find(&mapping.station)?,
        timestamp: find(&mapping.timestamp)?,
        pollutant: find(&mapping.pollutant)?,
        value: find(&mapping.value)?,
    })
}

fn parse_row(record: &csv::ByteRecord, cols: &ColumnIndex) -> std::result::Result<RawReading, String> {
    let field = |i: usize| -> std::result::Result<&str, String> {
        let raw = record.get(i).ok_or_else(|| "missing field".to_string())?;
        std::str::from_utf8(raw).map(str::trim).map_err(|_| "invalid utf-8".to_string())
    };
    let station = Station::new(field(cols.station)?).map_err(|_| "empty station".to_string())?;
    let at = Instant::parse_rfc3339(field(cols.timestamp)?)
        .ok_or_else(|| "unparseable timestamp".to_string())?;
    if !(MIN_EPOCH..MAX_EPOCH).contains(&at.epoch_seconds()) {
        return Err("timestamp out of range".into());
    }
    let pollutant = field(cols.pollutant)?
        .parse::<Pollutant>()
        .map_err(|_| "unknown pollutant".to_string())?;
    let value: f64 = field(cols.value)?
        .parse()
        .map_err(|_| "unparseable value".to_string())?;
    if !value.is_finite() {
        return Err("non-finite value".into());
    }
    if value < 0.0 {
        return Err("negative concentration".into());
    }
    Ok(RawReading { station, at, pollutant, value })
}

/// Parses CSV readings. Rows that fail validation are reported, never fatal.
pub fn parse_readings<R: Read>(
    input: R,
    mapping: &ColumnMapping,
) -> Result<(Vec<RawReading>, IngestReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let header = match reader.byte_headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(csv_to_error(e)),
    };
    let cols = locate_columns(&header, mapping)?;

    let mut readings = Vec::new();
    let mut report = IngestReport::default();
    let mut record = csv::ByteRecord::new();
    loop {
        let line = reader.position().line();
        match reader.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                report.rows_read += 1;
                let line = record.position().map_or(line, |p| p.line());
                match parse_row(&record, &cols) {
                    Ok(r) => {
                        report.stations_seen.insert(r.station.name().to_string());
                        readings.push(r);
                    }
                    Err(reason) => report.rejects.push(Reject { line, reason }),
                }
            }
            Err(e) => {
                if let csv::ErrorKind::Io(_) = e.kind() {
                    return Err(csv_to_error(e));
                }
                report.rows_read += 1;
                report.rejects.push(Reject { line, reason: format!("malformed row: {e}") });
            }
        }
    }
    report.rows_accepted = readings.len();
    Ok((readings, report))
}

fn csv_to_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Schema(format!("unreadable header: {other:?}")),
    }
}

/// Opens `path` for reading, decompressing when the name ends in `.gz`.
pub fn open_input(path: &Path) -> Result<Box<dyn Read>> {
    let file = BufReader::new(File::open(path)?);
    let gz = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("gz"));
    if gz {
        Ok(Box::new(flate2::read::MultiGzDecoder::new(file)))
    } else {
        Ok(Box::new(file))
    }
}

/// One station's readings of one pollutant as a raw series. Readings that
/// share an instant are collapsed to their mean.
pub fn build_station_series(
    readings: &[RawReading],
    station: &Station,
    pollutant: Pollutant,
) -> Result<TimeSeries> {
    let mut by_instant: BTreeMap<Instant, (f64, usize)> = BTreeMap::new();
    for r in readings.iter().filter(|r| r.pollutant == pollutant && &r.station == station) {
        let e = by_instant.entry(r.at).or_insert((0.0, 0));
        e.0 += r.value;
        e.1 += 1;
    }
    if by_instant.is_empty() {
        return Err(Error::EmptySeries(format!("no {pollutant} readings for station {station}")));
    }
    let obs = by_instant
        .into_iter()
        .map(|(at, (sum, n))| Observation::new(at, sum / n as f64))
        .collect();
    TimeSeries::new(Granularity::Raw, obs)
}
