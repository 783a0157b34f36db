//! Synthetic server power signals for estimating what pausing during the
//! expensive hours saves on a production machine.

use chrono::{Duration, Timelike};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::economics::{integrate_cost, EnergyCost};
use crate::geotemporal::{HourSet, TimeSeries, Timestamp};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub start: Timestamp,
    pub period_s: i64,
    pub duration_s: i64,
    /// Mean power while running, W.
    pub peak: f64,
    /// Idle power as a fraction of peak.
    pub idle_ratio: f64,
    /// Noise variance, W².
    pub variance: f64,
    /// UTC hours during which the machine idles.
    pub pause_hours: HourSet,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<(), SimError> {
        if self.period_s <= 0 || self.duration_s < self.period_s {
            return Err(SimError::Parameter("synthetic signal needs a positive period and at least one sample".into()));
        }
        if !(0.0..=1.0).contains(&self.idle_ratio) || !(self.peak >= 0.0) || !(self.variance >= 0.0) {
            return Err(SimError::Parameter("peak and variance must be >= 0 and idle_ratio in [0, 1]".into()));
        }
        Ok(())
    }
}

/// The paused signal and the never-paused signal built from the same noise
/// draws.
pub fn synth_power_pair(spec: &SynthSpec) -> Result<(TimeSeries, TimeSeries), SimError> {
    spec.validate()?;
    let n = (spec.duration_s / spec.period_s) as usize;
    let sigma = spec.variance.sqrt();
    let idle = spec.idle_ratio * spec.peak;
    let mut r = rng::stream(spec.seed);
    let mut paused = Vec::with_capacity(n);
    let mut running = Vec::with_capacity(n);
    for i in 0..n {
        let t = spec.start + Duration::seconds(spec.period_s * i as i64);
        let z: f64 = StandardNormal.sample(&mut r);
        let level = if spec.pause_hours.contains(&t.hour()) { idle } else { spec.peak };
        paused.push((level + sigma * z).max(0.0));
        running.push((spec.peak + sigma * z).max(0.0));
    }
    Ok((TimeSeries::new(spec.start, spec.period_s, paused)?, TimeSeries::new(spec.start, spec.period_s, running)?))
}

/// Gaussian power around peak, or around `idle_ratio * peak` during the
/// pause hours, clamped at zero.
pub fn synth_power_signal(spec: &SynthSpec) -> Result<TimeSeries, SimError> {
    Ok(synth_power_pair(spec)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Savings {
    pub baseline: EnergyCost,
    pub paused: EnergyCost,
    /// Percent of baseline energy saved.
    pub energy_pct: f64,
    /// Percent of baseline cost saved.
    pub price_pct: f64,
}

/// Energy and cost savings of pausing versus never pausing under `prices`.
pub fn estimate_savings(spec: &SynthSpec, prices: &TimeSeries) -> Result<Savings, SimError> {
    let (paused, running) = synth_power_pair(spec)?;
    let baseline = integrate_cost(&running, prices)?;
    let with_pause = integrate_cost(&paused, prices)?;
    let pct = |a: f64, b: f64| if a > 0.0 { 100.0 * (a - b) / a } else { 0.0 };
    Ok(Savings {
        baseline,
        paused: with_pause,
        energy_pct: pct(baseline.energy_kwh, with_pause.energy_kwh),
        price_pct: pct(baseline.cost, with_pause.cost),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn spec(peak: f64, variance: f64, hours: &[u32]) -> SynthSpec {
        SynthSpec {
            start: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
            period_s: 3600,
            duration_s: 7 * 86_400,
            peak,
            idle_ratio: 0.0,
            variance,
            pause_hours: hours.iter().copied().collect(),
            seed: 4,
        }
    }

    #[test]
    fn constant_without_noise_or_pauses() {
        let s = synth_power_signal(&spec(200.0, 0.0, &[])).unwrap();
        assert!(s.values().iter().all(|&v| v == 200.0));
    }

    #[test]
    fn zero_power_in_pause_hours() {
        let s = synth_power_signal(&spec(200.0, 0.0, &[1, 2, 3, 4])).unwrap();
        let zeros = s.values().iter().filter(|&&v| v == 0.0).count();
        assert_eq!(zeros * 24, s.len() * 4);
    }

    #[test]
    fn savings_do_not_depend_on_peak() {
        let prices = TimeSeries::constant(spec(0.0, 0.0, &[]).start, 3600, 50.0, 7 * 24).unwrap();
        let a = estimate_savings(&spec(100.0, 0.0, &[13, 14, 15, 16]), &prices).unwrap();
        let b = estimate_savings(&spec(200.0, 0.0, &[13, 14, 15, 16]), &prices).unwrap();
        assert!((a.energy_pct - 100.0 * 4.0 / 24.0).abs() < 1e-9);
        assert_eq!(a.energy_pct, b.energy_pct);
    }
}
