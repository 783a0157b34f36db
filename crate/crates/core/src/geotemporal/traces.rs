//! CSV trace ingestion. One file per (location, kind) with header
//! `timestamp,value`; timestamps are RFC 3339 / ISO-8601 with offset.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::{GeoError, TimeSeries, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    /// Real-time electricity price, $/MWh.
    Electricity,
    /// Outside air temperature, °C.
    Temperature,
}

/// Electricity and temperature series for every location, on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    electricity: BTreeMap<String, TimeSeries>,
    temperature: BTreeMap<String, TimeSeries>,
}

impl TraceSet {
    pub fn new(
        electricity: BTreeMap<String, TimeSeries>,
        temperature: BTreeMap<String, TimeSeries>,
    ) -> Result<Self, GeoError> {
        for loc in electricity.keys() {
            if !temperature.contains_key(loc) {
                return Err(GeoError::Alignment(format!("location {loc} has no temperature trace")));
            }
        }
        for loc in temperature.keys() {
            if !electricity.contains_key(loc) {
                return Err(GeoError::Alignment(format!("location {loc} has no electricity trace")));
            }
        }
        check_aligned(electricity.iter().chain(temperature.iter()))?;
        Ok(Self { electricity, temperature })
    }

    pub fn locations(&self) -> impl Iterator<Item = &str> {
        self.electricity.keys().map(String::as_str)
    }

    pub fn electricity(&self, location: &str) -> Option<&TimeSeries> {
        self.electricity.get(location)
    }

    pub fn temperature(&self, location: &str) -> Option<&TimeSeries> {
        self.temperature.get(location)
    }

    pub fn series(&self, kind: TraceKind) -> &BTreeMap<String, TimeSeries> {
        match kind {
            TraceKind::Electricity => &self.electricity,
            TraceKind::Temperature => &self.temperature,
        }
    }

    /// Applies `f` to every member series, keeping the location/kind keys.
    pub fn map<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&str, TraceKind, &TimeSeries) -> TimeSeries,
    {
        let electricity = self
            .electricity
            .iter()
            .map(|(l, s)| (l.clone(), f(l, TraceKind::Electricity, s)))
            .collect();
        let temperature = self
            .temperature
            .iter()
            .map(|(l, s)| (l.clone(), f(l, TraceKind::Temperature, s)))
            .collect();
        Self { electricity, temperature }
    }

    /// Shortest member series end; simulations must not run past it.
    pub fn common_end(&self) -> Option<Timestamp> {
        self.electricity.values().chain(self.temperature.values()).map(TimeSeries::end).min()
    }
}

fn check_aligned<'a>(mut it: impl Iterator<Item = (&'a String, &'a TimeSeries)>) -> Result<(), GeoError> {
    let Some((first_loc, first)) = it.next() else {
        return Ok(());
    };
    for (loc, s) in it {
        if s.start() != first.start() {
            return Err(GeoError::Alignment(format!(
                "{loc} starts at {} but {first_loc} starts at {}",
                s.start(),
                first.start()
            )));
        }
        if s.period_s() != first.period_s() {
            return Err(GeoError::Alignment(format!(
                "{loc} has period {} s but {first_loc} has {} s",
                s.period_s(),
                first.period_s()
            )));
        }
    }
    Ok(())
}

/// Parses one trace. `label` names the source in error messages.
pub fn parse_trace<R: Read>(reader: R, label: &str) -> Result<TimeSeries, GeoError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let parse_err = |line: u64, reason: String| GeoError::Parse { path: label.to_string(), line, reason };

    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "timestamp" || &headers[1] != "value" {
        return Err(parse_err(1, format!("expected header `timestamp,value`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }

    let mut rows: Vec<(Timestamp, f64, u64)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(parse_err(line, format!("expected 2 fields, got {}", record.len())));
        }
        let ts = DateTime::parse_from_rfc3339(&record[0])
            .map_err(|e| parse_err(line, format!("bad timestamp `{}`: {e}", &record[0])))?
            .with_timezone(&Utc);
        let value: f64 = record[1]
            .parse()
            .map_err(|e| parse_err(line, format!("bad value `{}`: {e}", &record[1])))?;
        if !value.is_finite() {
            return Err(parse_err(line, format!("non-finite value `{}`", &record[1])));
        }
        rows.push((ts, value, line));
    }

    if rows.len() < 2 {
        return Err(GeoError::Grid(format!("{label}: need at least two rows to infer the period")));
    }
    let start = rows[0].0;
    let period = (rows[1].0 - start).num_seconds();
    if period <= 0 {
        return Err(parse_err(rows[1].2, "timestamps must be strictly increasing".into()));
    }
    for (i, &(ts, _, line)) in rows.iter().enumerate() {
        let expected = start + Duration::seconds(period * i as i64);
        if ts > expected {
            return Err(GeoError::GridGap { path: label.to_string(), missing: expected });
        }
        if ts < expected {
            return Err(parse_err(line, format!("timestamp {ts} off the {period} s grid (expected {expected})")));
        }
    }
    TimeSeries::new(start, period, rows.into_iter().map(|r| r.1).collect())
}

/// Loads one trace file per location and checks the results share a grid.
pub fn load_traces(
    paths: &BTreeMap<String, PathBuf>,
    kind: TraceKind,
) -> Result<BTreeMap<String, TimeSeries>, GeoError> {
    let mut out = BTreeMap::new();
    for (loc, path) in paths {
        let file = File::open(path).map_err(|source| GeoError::Io { path: path.clone(), source })?;
        let series = parse_trace(file, &path.display().to_string())?;
        out.insert(loc.clone(), series);
    }
    check_aligned(out.iter())?;
    log::debug!("loaded {} {:?} traces", out.len(), kind);
    Ok(out)
}

/// Writes a series in the trace CSV format.
pub fn write_trace<W: Write>(series: &TimeSeries, writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "value"])?;
    for (t, v) in series.iter() {
        w.write_record([t.to_rfc3339(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_file(series: &TimeSeries, path: &Path) -> Result<(), GeoError> {
    let file = File::create(path).map_err(|source| GeoError::Io { path: path.to_path_buf(), source })?;
    write_trace(series, file).map_err(|e| GeoError::Grid(e.to_string()))
}

/// Builds a trace for a location without its own data by shifting a base
/// trace by a time-zone offset and adding a mean difference.
///
/// A positive offset moves the daily profile earlier in UTC: the output at
/// UTC time `t` is the base value at `t + offset`, wrapping at the end.
pub fn synthesize_shifted_trace(
    base: &TimeSeries,
    tz_offset_hours: i64,
    mean_offset: f64,
) -> Result<TimeSeries, GeoError> {
    let offset_s = tz_offset_hours * 3600;
    if offset_s % base.period_s() != 0 {
        return Err(GeoError::Grid(format!(
            "offset {tz_offset_hours} h is not a whole number of {} s periods",
            base.period_s()
        )));
    }
    let n = base.len();
    if n == 0 {
        return Ok(base.clone());
    }
    let shift = (offset_s / base.period_s()).rem_euclid(n as i64) as usize;
    let values = (0..n).map(|i| base.values()[(i + shift) % n] + mean_offset).collect();
    Ok(base.with_values(values))
}
