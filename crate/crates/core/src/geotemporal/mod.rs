//! Time series, trace ingestion, forecasting and peak-hour detection.

mod forecast;
mod peak;
mod series;
mod traces;

pub use forecast::{
    fit_ses_alpha, mape, perturb_forecast, ses_forecast, ses_smooth, theta_forecast,
    ForecastErrorSpec,
};
pub use peak::{find_expensive_hours, hour_count, is_expensive, HourSet};
pub use series::{TimeSeries, Timestamp};
pub use traces::{
    load_traces, parse_trace, synthesize_shifted_trace, write_trace, write_trace_file, TraceKind,
    TraceSet,
};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("time series period must be positive, got {0} s")]
    NonPositivePeriod(i64),
    #[error("time series is empty")]
    EmptySeries,
    #[error("{path}: line {line}: {reason}")]
    Parse { path: String, line: u64, reason: String },
    #[error("{path}: grid gap, missing timestamp {missing}")]
    GridGap { path: String, missing: Timestamp },
    #[error("grid error: {0}")]
    Grid(String),
    #[error("series not aligned: {0}")]
    Alignment(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("actual value is zero at index {0}; MAPE undefined")]
    ZeroActual(usize),
    #[error("insufficient history: need at least 24 h of prices, got {0} s")]
    InsufficientHistory(i64),
}
