//! Statistically expensive hours of the day.

use std::collections::BTreeSet;

use chrono::Timelike;

use super::{GeoError, TimeSeries, Timestamp};

/// Set of UTC hours of day (0-23).
pub type HourSet = BTreeSet<u32>;

/// Groups prices by UTC hour of day, averages them, and returns the
/// `ceil(downtime_ratio * 24)` hours with the highest mean. Ties go to the
/// lower hour.
pub fn find_expensive_hours(prices: &TimeSeries, downtime_ratio: f64) -> Result<HourSet, GeoError> {
    if !(downtime_ratio > 0.0 && downtime_ratio <= 1.0) {
        return Err(GeoError::Parameter(format!("downtime_ratio must lie in (0, 1], got {downtime_ratio}")));
    }
    if prices.span_s() < 86_400 {
        return Err(GeoError::InsufficientHistory(prices.span_s()));
    }
    let mut sums = [0.0f64; 24];
    let mut counts = [0usize; 24];
    for (t, v) in prices.iter() {
        let h = t.hour() as usize;
        sums[h] += v;
        counts[h] += 1;
    }
    let mut means: Vec<(u32, f64)> = (0..24)
        .filter(|&h| counts[h] > 0)
        .map(|h| (h as u32, sums[h] / counts[h] as f64))
        .collect();
    let n = hour_count(downtime_ratio);
    if means.len() < n {
        return Err(GeoError::Grid(format!(
            "only {} hours of the day have samples, need {n}",
            means.len()
        )));
    }
    // Stable sort on a series already ordered by hour keeps the lower hour first on ties.
    means.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(means.into_iter().take(n).map(|(h, _)| h).collect())
}

/// Number of paused hours per day for a downtime ratio.
pub fn hour_count(downtime_ratio: f64) -> usize {
    // 0.16 * 24 = 3.84 -> 4; guard against 0.25 * 24 landing on 6.000000001.
    let raw = downtime_ratio * 24.0;
    let rounded = raw.round();
    if (raw - rounded).abs() < 1e-9 {
        rounded as usize
    } else {
        raw.ceil() as usize
    }
}

pub fn is_expensive(t: Timestamp, expensive: &HourSet) -> bool {
    expensive.contains(&t.hour())
}
