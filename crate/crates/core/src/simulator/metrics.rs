//! QoS post-processing of a finished run: migration rates, availability
//! and bootstrap confidence intervals.

use std::collections::BTreeMap;

use chrono::Duration;
use rand::Rng;

use super::engine::SimulationResult;
use super::SimError;
use crate::cloudmodel::VmId;
use crate::geotemporal::TimeSeries;
use crate::rng;

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const DEFAULT_CI_LEVEL: f64 = 0.95;

const DAY_S: i64 = 86_400;

/// Histogram of migrations per VM per bucket: maps a count to the number
/// of (VM, bucket) pairs with that many migrations. Buckets are aligned to
/// the run start and only those overlapping the VM's lifetime count.
pub fn migration_rate_histogram(result: &SimulationResult, bucket_s: i64) -> Result<BTreeMap<usize, usize>, SimError> {
    if bucket_s <= 0 {
        return Err(SimError::Parameter(format!("bucket must be positive, got {bucket_s} s")));
    }
    let start = result.meta.start;
    let bucket_of = |t: chrono::DateTime<chrono::Utc>| (t - start).num_seconds().div_euclid(bucket_s);
    let mut counts: BTreeMap<(VmId, i64), usize> = BTreeMap::new();
    for (vm, life) in &result.lifetimes {
        if life.end <= life.start {
            continue;
        }
        let last = bucket_of(life.end - Duration::milliseconds(1));
        for b in bucket_of(life.start)..=last {
            counts.insert((*vm, b), 0);
        }
    }
    for m in &result.migrations {
        *counts.entry((m.vm, bucket_of(m.time))).or_default() += 1;
    }
    let mut hist = BTreeMap::new();
    for c in counts.into_values() {
        *hist.entry(c).or_default() += 1;
    }
    Ok(hist)
}

/// One value per day of the run: the highest migration count any single
/// VM had that day.
pub fn worst_case_daily_rate(result: &SimulationResult) -> Result<TimeSeries, SimError> {
    let start = result.meta.start;
    let span = (result.meta.end - start).num_seconds().max(0);
    let days = ((span + DAY_S - 1) / DAY_S).max(1) as usize;
    let mut per_vm: BTreeMap<(VmId, usize), f64> = BTreeMap::new();
    for m in &result.migrations {
        let d = ((m.time - start).num_seconds() / DAY_S) as usize;
        *per_vm.entry((m.vm, d.min(days - 1))).or_default() += 1.0;
    }
    let mut values = vec![0.0; days];
    for ((_, d), c) in per_vm {
        values[d] = f64::max(values[d], c);
    }
    Ok(TimeSeries::new(start, DAY_S, values)?)
}

/// `1 - (migrations * downtime + paused) / lifetime`, clamped to [0, 1].
pub fn availability_from(
    migrations: usize,
    downtime_per_migration_s: f64,
    paused_s: f64,
    lifetime_s: f64,
) -> Result<f64, SimError> {
    if !(lifetime_s > 0.0) || downtime_per_migration_s < 0.0 || paused_s < 0.0 {
        return Err(SimError::Parameter(format!(
            "availability needs a positive lifetime and nonnegative downtimes (lifetime {lifetime_s} s)"
        )));
    }
    let down = migrations as f64 * downtime_per_migration_s + paused_s;
    Ok((1.0 - down / lifetime_s).clamp(0.0, 1.0))
}

/// Availability of `vm` over its observed lifetime.
pub fn availability(result: &SimulationResult, vm: VmId) -> Result<f64, SimError> {
    let life = result.lifetimes.get(&vm).ok_or_else(|| SimError::Parameter(format!("{vm} never ran")))?;
    let migrations = result.migrations.iter().filter(|m| m.vm == vm).count();
    let paused: f64 = result.pauses.iter().filter(|p| p.vm == vm).map(|p| p.duration_s()).sum();
    availability_from(migrations, result.downtime_per_migration, paused, life.duration_s())
}

/// Migrations per day of lifetime for every VM that ran.
pub fn per_vm_daily_rates(result: &SimulationResult) -> Vec<f64> {
    let mut counts: BTreeMap<VmId, usize> = BTreeMap::new();
    for m in &result.migrations {
        *counts.entry(m.vm).or_default() += 1;
    }
    result
        .lifetimes
        .iter()
        .filter(|(_, l)| l.duration_s() > 0.0)
        .map(|(vm, l)| counts.get(vm).copied().unwrap_or(0) as f64 / (l.duration_s() / DAY_S as f64))
        .collect()
}

/// Mean offset from `base`, so that equal values average exactly.
fn mean_from(base: f64, xs: impl Iterator<Item = f64>, n: usize) -> f64 {
    base + xs.map(|x| x - base).sum::<f64>() / n as f64
}

/// Percentile bootstrap confidence interval of the mean.
pub fn bootstrap_ci(samples: &[f64], level: f64, resamples: usize, seed: u64) -> Result<(f64, f64), SimError> {
    if samples.is_empty() {
        return Err(SimError::Parameter("bootstrap needs at least one sample".into()));
    }
    if !(level > 0.0 && level < 1.0) || resamples == 0 {
        return Err(SimError::Parameter(format!("level must lie in (0, 1) and resamples > 0 (level {level})")));
    }
    let n = samples.len();
    let base = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let mut r = rng::stream(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| mean_from(base, (0..n).map(|_| samples[r.random_range(0..n)]), n))
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let lo = ((alpha * resamples as f64).floor() as usize).min(resamples - 1);
    let hi = (((1.0 - alpha) * resamples as f64).ceil() as usize).clamp(1, resamples) - 1;
    Ok((means[lo], means[hi.max(lo)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn availability_examples() {
        let a = availability_from(19, 60.0, 0.0, 86_400.0).unwrap();
        assert!((a - 0.9868).abs() < 1e-4);
        let b = availability_from(0, 60.0, 4.0 * 3600.0, 86_400.0).unwrap();
        assert!((b - 0.8333).abs() < 1e-4);
        assert_eq!(availability_from(0, 60.0, 0.0, 10.0).unwrap(), 1.0);
        assert!(availability_from(0, 60.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn bootstrap_properties() {
        assert_eq!(bootstrap_ci(&[0.1; 7], 0.95, 500, 1).unwrap(), (0.1, 0.1));
        assert!(bootstrap_ci(&[], 0.95, 100, 1).is_err());
        let xs: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let (lo, hi) = bootstrap_ci(&xs, 0.95, 2000, 3).unwrap();
        assert!(lo <= mean && mean <= hi);
        let (lo90, hi90) = bootstrap_ci(&xs, 0.90, 2000, 3).unwrap();
        let (lo99, hi99) = bootstrap_ci(&xs, 0.99, 2000, 3).unwrap();
        assert!(lo99 <= lo90 && hi90 <= hi99);
        assert_eq!(bootstrap_ci(&xs, 0.95, 2000, 3).unwrap(), (lo, hi));
    }
}
