//! Time-series analysis and forecasting for PM2.5 air-quality sensor
//! networks: CSV ingestion, trend statistics, ARIMA / feedforward network /
//! Gaussian-process forecasters and a rolling one-step evaluation harness.

pub mod ann;
pub mod arima;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod gp;
pub mod ingest;
pub mod linalg;
pub mod optim;
pub mod timeseries;
pub mod trend;

pub use error::{Error, Result};
pub use timeseries::{Granularity, Instant, Observation, SplitSpec, TimeSeries};
