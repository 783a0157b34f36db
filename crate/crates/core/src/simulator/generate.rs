//! Random infrastructure, workload and trace generation.

use std::collections::BTreeMap;

use chrono::{Duration, Timelike};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

use super::config::{BetaSource, GridSpec, SyntheticTraces};
use super::SimError;
use crate::cloudmodel::{FrequencyRange, Pm, PmId, ResourceSpec, Vm, VmId};
use crate::geotemporal::{synthesize_shifted_trace, TimeSeries, TraceSet};
use crate::rng::{self, SimRng};

/// Physical machines for the generated infrastructure.
#[derive(Debug, Clone, PartialEq)]
pub struct InfraParams<'a> {
    pub pms: usize,
    pub cpu: (u32, u32),
    pub ram: (u32, u32),
    pub power_model: &'a str,
    pub freq: FrequencyRange,
    pub cores: Option<u32>,
}

/// Spreads `p.pms` machines over `locations`: every location gets
/// `pms / d`, and a random subset of locations one extra. Capacities are
/// uniform integers in the given ranges.
pub fn generate_infrastructure(p: &InfraParams, locations: &[String], seed: u64) -> Result<Vec<Pm>, SimError> {
    if locations.is_empty() || p.pms == 0 {
        return Err(SimError::Config("infrastructure: need at least one data center and one PM".into()));
    }
    let mut rng = rng::stream(seed);
    let d = locations.len();
    let mut counts = vec![p.pms / d; d];
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(&mut rng);
    for &i in order.iter().take(p.pms % d) {
        counts[i] += 1;
    }
    let mut pms = Vec::with_capacity(p.pms);
    for (loc, n) in locations.iter().zip(counts) {
        for _ in 0..n {
            let cpu = rng.random_range(p.cpu.0..=p.cpu.1);
            let ram = rng.random_range(p.ram.0..=p.ram.1);
            pms.push(Pm {
                id: PmId(pms.len() as u32),
                location: loc.clone(),
                capacity: ResourceSpec::new(vec![cpu as f64, ram as f64])?,
                power_model: p.power_model.to_string(),
                freq: p.freq,
                cores: p.cores.unwrap_or(cpu),
            });
        }
    }
    Ok(pms)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkloadParams {
    pub vms: usize,
    pub cpu: (u32, u32),
    pub ram: (u32, u32),
    pub beta: BetaSource,
    pub green_fraction: f64,
}

fn normal_clamped(rng: &mut SimRng, (lo, hi): (u32, u32)) -> f64 {
    if lo == hi {
        return lo as f64;
    }
    let mid = (lo + hi) as f64 / 2.0;
    let sd = (hi - lo) as f64 / 4.0;
    Normal::new(mid, sd).expect("positive sd").sample(rng).clamp(lo as f64, hi as f64).round()
}

fn draw_beta(rng: &mut SimRng, source: &BetaSource) -> Result<f64, SimError> {
    match *source {
        BetaSource::Constant { value } if (0.0..=1.0).contains(&value) => Ok(value),
        BetaSource::Uniform { min, max } if 0.0 <= min && min <= max && max <= 1.0 => {
            Ok(if min == max { min } else { rng.random_range(min..=max) })
        }
        BetaSource::Exponential { rate } if rate > 0.0 => {
            let exp = Exp::new(rate).expect("positive rate");
            for _ in 0..1000 {
                let b = exp.sample(rng);
                if b <= 1.0 {
                    return Ok(b);
                }
            }
            Ok(1.0)
        }
        other => Err(SimError::Config(format!("workload.beta: invalid source {other:?}"))),
    }
}

/// VM requests with uniform boot steps and uniform durations of 1..=n
/// steps; about half of them end inside the run. Times are grid-aligned.
pub fn generate_workload(p: &WorkloadParams, grid: &GridSpec, seed: u64) -> Result<Vec<Vm>, SimError> {
    let mut rng = rng::stream(seed);
    let n = grid.steps();
    let mut out = Vec::with_capacity(p.vms);
    for i in 0..p.vms {
        let boot = rng.random_range(0..n);
        let duration = rng.random_range(1..=n);
        let cpu = normal_clamped(&mut rng, p.cpu);
        let ram = normal_clamped(&mut rng, p.ram);
        let beta = draw_beta(&mut rng, &p.beta)?;
        let green = p.green_fraction > 0.0 && rng.random_bool(p.green_fraction);
        out.push(Vm {
            id: VmId(i as u32),
            requested: ResourceSpec::new(vec![cpu, ram])?,
            beta,
            boot_time: grid.time(boot),
            delete_time: (boot + duration < n).then(|| grid.time(boot + duration)),
            green,
        });
    }
    Ok(out)
}

/// Builds price and temperature traces on the grid period, covering
/// `history_days` before the grid start through `extra_s` after its end.
pub fn synthesize_traces(spec: &SyntheticTraces, grid: &GridSpec, extra_s: i64, seed: u64) -> Result<TraceSet, SimError> {
    if spec.locations.is_empty() {
        return Err(SimError::Config("traces.locations: need at least one location".into()));
    }
    let start = grid.start - Duration::days(spec.history_days as i64);
    let span = (grid.end() - start).num_seconds() + extra_s.max(0) + 86_400;
    let n = (span / grid.period_s) as usize;
    let times: Vec<_> = (0..n).map(|i| start + Duration::seconds(grid.period_s * i as i64)).collect();
    let (p0, p1) = spec.peak_hours;
    let mut electricity = BTreeMap::new();
    let mut temperature = BTreeMap::new();
    for loc in &spec.locations {
        let mut r = rng::stream(rng::derive(seed, &[rng::label(&loc.id)]));
        let price_noise = Normal::new(0.0, spec.price_noise.max(0.0)).map_err(|e| SimError::Config(e.to_string()))?;
        let temp_noise = Normal::new(0.0, spec.temperature_noise.max(0.0)).map_err(|e| SimError::Config(e.to_string()))?;
        let mut prices = Vec::with_capacity(n);
        let mut temps = Vec::with_capacity(n);
        for t in &times {
            let h = t.hour();
            let hf = h as f64 + t.minute() as f64 / 60.0;
            let factor = if (p0..=p1).contains(&h) { spec.peak_factor } else { 1.0 };
            prices.push(spec.price_mean * factor + price_noise.sample(&mut r));
            let cycle = (2.0 * std::f64::consts::PI * (hf - 9.0) / 24.0).sin();
            temps.push(spec.temperature_mean + spec.temperature_amplitude * cycle + temp_noise.sample(&mut r));
        }
        let base_p = TimeSeries::new(start, grid.period_s, prices)?;
        let base_t = TimeSeries::new(start, grid.period_s, temps)?;
        let tz = loc.tz_offset_hours as i64;
        electricity.insert(loc.id.clone(), synthesize_shifted_trace(&base_p, tz, loc.price_offset)?);
        temperature.insert(loc.id.clone(), synthesize_shifted_trace(&base_t, tz, loc.temperature_offset)?);
    }
    Ok(TraceSet::new(electricity, temperature)?)
}
