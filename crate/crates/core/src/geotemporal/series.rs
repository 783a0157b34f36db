use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::GeoError;

/// All timestamps are UTC.
pub type Timestamp = DateTime<Utc>;

/// Uniformly spaced samples. Index `i` maps to `start + i * period`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    start: Timestamp,
    period_s: i64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(start: Timestamp, period_s: i64, values: Vec<f64>) -> Result<Self, GeoError> {
        if period_s <= 0 {
            return Err(GeoError::NonPositivePeriod(period_s));
        }
        Ok(Self { start, period_s, values })
    }

    /// Constant series of `len` samples.
    pub fn constant(start: Timestamp, period_s: i64, value: f64, len: usize) -> Result<Self, GeoError> {
        Self::new(start, period_s, vec![value; len])
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn period_s(&self) -> i64 {
        self.period_s
    }

    pub fn period(&self) -> Duration {
        Duration::seconds(self.period_s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamp(&self, i: usize) -> Timestamp {
        self.start + Duration::seconds(self.period_s * i as i64)
    }

    /// First instant after the last sample's interval.
    pub fn end(&self) -> Timestamp {
        self.timestamp(self.values.len())
    }

    /// Span covered by the samples, in seconds.
    pub fn span_s(&self) -> i64 {
        self.period_s * self.values.len() as i64
    }

    pub fn iter(&self) -> impl Iterator<Item = (Timestamp, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.timestamp(i), v))
    }

    /// Exact grid index of `t`, if `t` lies on the grid and inside the series.
    pub fn index_of(&self, t: Timestamp) -> Option<usize> {
        let offset = (t - self.start).num_seconds();
        if offset < 0 || offset % self.period_s != 0 {
            return None;
        }
        let i = (offset / self.period_s) as usize;
        (i < self.values.len()).then_some(i)
    }

    /// Step-hold lookup: the sample whose interval contains `t`.
    pub fn value_at(&self, t: Timestamp) -> Option<f64> {
        let offset = (t - self.start).num_seconds();
        if offset < 0 {
            return None;
        }
        self.values.get((offset / self.period_s) as usize).copied()
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self { start: self.start, period_s: self.period_s, values }
    }

    /// Samples `[from, from + len)` as a new series on the same grid.
    pub fn slice(&self, from: usize, len: usize) -> Self {
        let end = (from + len).min(self.values.len());
        let from = from.min(end);
        Self {
            start: self.timestamp(from),
            period_s: self.period_s,
            values: self.values[from..end].to_vec(),
        }
    }

    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.values.iter().sum::<f64>() / self.values.len() as f64)
        }
    }

    pub fn same_grid(&self, other: &TimeSeries) -> bool {
        self.start == other.start && self.period_s == other.period_s
    }
}
