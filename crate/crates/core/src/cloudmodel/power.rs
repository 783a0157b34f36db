//! Server power models.

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{state::utilization, ModelError, Pm, Vm};
use crate::geotemporal::{TimeSeries, Timestamp};
use crate::rng::{self, SimRng};

/// A wattage that is either fixed or follows a trace (step-hold, clamped to
/// the last value past the end).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PowerProfile {
    Constant(f64),
    Series(TimeSeries),
}

impl PowerProfile {
    pub fn at(&self, t: Timestamp) -> f64 {
        match self {
            PowerProfile::Constant(w) => *w,
            PowerProfile::Series(s) => s.value_at(t).unwrap_or_else(|| {
                if t < s.start() {
                    s.values()[0]
                } else {
                    *s.values().last().expect("non-empty series")
                }
            }),
        }
    }
}

/// Linear idle/peak model with additive Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPowerModel {
    pub p_peak: PowerProfile,
    pub p_idle: PowerProfile,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl LinearPowerModel {
    pub fn constant(p_peak: f64, p_idle: f64, noise_sigma: f64, seed: u64) -> Result<Self, ModelError> {
        let m = Self { p_peak: PowerProfile::Constant(p_peak), p_idle: PowerProfile::Constant(p_idle), noise_sigma, seed };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.noise_sigma >= 0.0) {
            return Err(ModelError::Invalid(format!("noise sigma {} must be >= 0", self.noise_sigma)));
        }
        let bad = match (&self.p_peak, &self.p_idle) {
            (PowerProfile::Constant(p), PowerProfile::Constant(i)) => i > p || *i < 0.0,
            (peak, PowerProfile::Series(s)) | (PowerProfile::Series(s), peak) => {
                s.iter().any(|(t, _)| self.p_idle.at(t) > self.p_peak.at(t) || self.p_idle.at(t) < 0.0)
                    || matches!(peak, PowerProfile::Series(o) if o.iter().any(|(t, _)| self.p_idle.at(t) > self.p_peak.at(t)))
            }
        };
        if bad {
            return Err(ModelError::Invalid("idle power must lie in [0, peak power]".into()));
        }
        Ok(())
    }

    fn noise(&self, t: Timestamp, key: u64) -> f64 {
        if self.noise_sigma == 0.0 {
            return 0.0;
        }
        let mut r = SimRng::seed_from_u64(rng::derive(self.seed, &[key, t.timestamp() as u64]));
        Normal::new(0.0, self.noise_sigma).expect("sigma validated").sample(&mut r)
    }
}

/// Power of a host at `util`: zero when empty (fast suspension), otherwise
/// linear between idle and peak plus noise, clamped at zero.
pub fn linear_power(model: &LinearPowerModel, util: f64, t: Timestamp) -> f64 {
    linear_power_keyed(model, util, t, 0)
}

fn linear_power_keyed(model: &LinearPowerModel, util: f64, t: Timestamp, key: u64) -> f64 {
    if util <= 0.0 {
        return 0.0;
    }
    let idle = model.p_idle.at(t);
    let peak = model.p_peak.at(t);
    (idle + util * (peak - idle) + model.noise(t, key)).max(0.0)
}

/// Coefficients of the cubic-in-frequency, linear-in-cores peak power
/// surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakCoefficients {
    pub p00: f64,
    pub p10: f64,
    pub p01: f64,
    pub p20: f64,
    pub p11: f64,
    pub p30: f64,
    pub p21: f64,
}

impl PeakCoefficients {
    /// Fit for the quad-core ARM board (q in 1..=11, c in 1..=4).
    pub const ARM: Self = Self {
        p00: 1.318,
        p10: 0.2243,
        p01: 0.03559,
        p20: 0.03137,
        p11: -0.00318,
        p30: 0.00711,
        p21: 0.000438,
    };

    pub const ZERO: Self = Self { p00: 0.0, p10: 0.0, p01: 0.0, p20: 0.0, p11: 0.0, p30: 0.0, p21: 0.0 };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticorePowerModel {
    pub peak: PeakCoefficients,
    /// (g0, g1, g2) of gamma(beta) = g0 beta^2 + g1 beta + g2.
    pub gamma: [f64; 3],
    pub p_max_core: f64,
    pub freq_steps: u32,
    pub core_count: u32,
}

impl MulticorePowerModel {
    pub fn arm() -> Self {
        Self { peak: PeakCoefficients::ARM, gamma: [-1.362, 2.798, 1.31], p_max_core: 2.746, freq_steps: 11, core_count: 4 }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.freq_steps == 0 || self.core_count == 0 {
            return Err(ModelError::Invalid("multicore model needs at least one frequency step and one core".into()));
        }
        if !(self.p_max_core > 0.0) {
            return Err(ModelError::Invalid(format!("p_max_core {} must be > 0", self.p_max_core)));
        }
        Ok(())
    }

    fn check(&self, q: u32, c: u32) -> Result<(), ModelError> {
        if q < 1 || q > self.freq_steps || c < 1 || c > self.core_count {
            return Err(ModelError::Domain { q, c, max_q: self.freq_steps, max_c: self.core_count });
        }
        Ok(())
    }

    fn idle_poly(&self, q: f64) -> f64 {
        let k = &self.peak;
        k.p00 + k.p10 * q + k.p20 * q * q + k.p30 * q * q * q
    }

    /// Normalized per-core power ratio for a CPU-boundedness value.
    pub fn gamma_core(&self, beta: f64) -> f64 {
        let [g0, g1, g2] = self.gamma;
        (g0 * beta * beta + g1 * beta + g2) / self.p_max_core
    }
}

pub fn multicore_peak_power(model: &MulticorePowerModel, q: u32, c: u32) -> Result<f64, ModelError> {
    model.check(q, c)?;
    let k = &model.peak;
    let (qf, cf) = (q as f64, c as f64);
    Ok(model.idle_poly(qf) + k.p01 * cf + k.p11 * qf * cf + k.p21 * qf * qf * cf)
}

pub fn multicore_idle_power(model: &MulticorePowerModel, q: u32) -> Result<f64, ModelError> {
    model.check(q, 1)?;
    Ok(model.idle_poly(q as f64))
}

/// Mean per-core gamma, clamped to [0, 1]. Empty input gives 0.
pub fn cpu_bound_utilization(betas: &[f64], model: &MulticorePowerModel) -> f64 {
    if betas.is_empty() {
        return 0.0;
    }
    let mean = betas.iter().map(|&b| model.gamma_core(b)).sum::<f64>() / betas.len() as f64;
    mean.clamp(0.0, 1.0)
}

pub fn multicore_power(model: &MulticorePowerModel, q: u32, c: u32, u: f64) -> Result<f64, ModelError> {
    if !(0.0..=1.0).contains(&u) {
        return Err(ModelError::Invalid(format!("utilisation {u} outside [0, 1]")));
    }
    let idle = multicore_idle_power(model, q)?;
    let peak = multicore_peak_power(model, q, c)?;
    Ok(idle + (peak - idle) * u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PowerModel {
    Linear(LinearPowerModel),
    Multicore(MulticorePowerModel),
}

impl PowerModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            PowerModel::Linear(m) => m.validate(),
            PowerModel::Multicore(m) => m.validate(),
        }
    }
}

/// Per-core betas of the running VMs: each VM's beta once per virtual core,
/// in VM id order, truncated to the physical core count.
pub fn core_betas(running: &[&Vm], cores: u32) -> Vec<f64> {
    let mut vms: Vec<&&Vm> = running.iter().collect();
    vms.sort_by_key(|v| v.id);
    vms.iter()
        .flat_map(|v| std::iter::repeat_n(v.beta, v.cores() as usize))
        .take(cores as usize)
        .collect()
}

/// IT power of one PM hosting `running` (paused VMs already removed) at
/// frequency `freq_hz`. Zero when nothing runs.
pub fn host_power(
    pm: &Pm,
    model: &PowerModel,
    running: &[&Vm],
    weights: &[f64],
    freq_hz: u64,
    t: Timestamp,
) -> Result<f64, ModelError> {
    if running.is_empty() {
        return Ok(0.0);
    }
    match model {
        PowerModel::Linear(m) => {
            let u = utilization(pm, running.iter().copied(), weights)?;
            Ok(linear_power_keyed(m, u, t, pm.id.0 as u64))
        }
        PowerModel::Multicore(m) => {
            let q = pm.freq.step_index(freq_hz).ok_or(ModelError::Frequency { pm: pm.id, hz: freq_hz })?;
            let betas = core_betas(running, pm.cores.min(m.core_count));
            let u = cpu_bound_utilization(&betas, m);
            multicore_power(m, q, betas.len() as u32, u)
        }
    }
}
