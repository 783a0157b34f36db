use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::Duration;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::cloudmodel::{FrequencyRange, LocationId, MigrationModel, Pm, PowerModel, Vm};
use crate::controllers::{ControllerId, FitnessWeights, GAParams, QoSParams, BCF_UNDERUTIL_THRESHOLD};
use crate::economics::{PricingKind, PricingModel};
use crate::geotemporal::{ForecastErrorSpec, Timestamp};
use crate::rng;

pub const SCHEMA_VERSION: u32 = 1;

/// Full description of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub grid: GridSpec,
    pub traces: TraceSpec,
    pub infrastructure: InfrastructureSpec,
    pub power_models: BTreeMap<String, PowerModel>,
    pub workload: WorkloadSpec,
    pub controller: ControllerSpec,
    #[serde(default)]
    pub forecast: ForecastSpec,
    pub pricing: PricingSpec,
    #[serde(default)]
    pub migration: MigrationModel,
    /// Resource-kind weights for utilisation; uniform when absent.
    #[serde(default)]
    pub resource_weights: Option<Vec<f64>>,
    #[serde(default)]
    pub seeds: Seeds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: Timestamp,
    pub period_s: i64,
    pub duration_s: i64,
}

impl GridSpec {
    pub fn steps(&self) -> usize {
        (self.duration_s / self.period_s) as usize
    }

    pub fn time(&self, k: usize) -> Timestamp {
        self.start + Duration::seconds(self.period_s * k as i64)
    }

    pub fn end(&self) -> Timestamp {
        self.start + Duration::seconds(self.duration_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum TraceSpec {
    /// One CSV per location and kind; relative paths resolve against the
    /// config file's directory.
    Files {
        electricity: BTreeMap<LocationId, PathBuf>,
        temperature: BTreeMap<LocationId, PathBuf>,
    },
    Synthetic(SyntheticTraces),
}

/// Daily-cycle base traces, shifted per location by its time-zone offset
/// and mean differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticTraces {
    pub locations: Vec<SyntheticLocation>,
    #[serde(default = "default_price_mean")]
    pub price_mean: f64,
    /// Extra price during the peak hours, as a multiple of the base.
    #[serde(default = "default_peak_factor")]
    pub peak_factor: f64,
    /// First and last (inclusive) UTC hour of the daily peak at offset 0.
    #[serde(default = "default_peak_hours")]
    pub peak_hours: (u32, u32),
    #[serde(default)]
    pub price_noise: f64,
    #[serde(default = "default_temp_mean")]
    pub temperature_mean: f64,
    #[serde(default = "default_temp_amplitude")]
    pub temperature_amplitude: f64,
    #[serde(default)]
    pub temperature_noise: f64,
    /// Days of history before the grid start.
    #[serde(default = "default_history_days")]
    pub history_days: u32,
}

fn default_price_mean() -> f64 {
    40.0
}
fn default_peak_factor() -> f64 {
    1.8
}
fn default_peak_hours() -> (u32, u32) {
    (13, 16)
}
fn default_temp_mean() -> f64 {
    15.0
}
fn default_temp_amplitude() -> f64 {
    8.0
}
fn default_history_days() -> u32 {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticLocation {
    pub id: LocationId,
    #[serde(default)]
    pub tz_offset_hours: i32,
    #[serde(default)]
    pub price_offset: f64,
    #[serde(default)]
    pub temperature_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum InfrastructureSpec {
    /// `pms` machines spread over the trace locations.
    Generated {
        pms: usize,
        cpu: (u32, u32),
        ram: (u32, u32),
        power_model: String,
        freq: FrequencyRange,
        /// Physical cores; defaults to the CPU capacity.
        #[serde(default)]
        cores: Option<u32>,
    },
    Explicit {
        pms: Vec<Pm>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum WorkloadSpec {
    Generated {
        vms: usize,
        cpu: (u32, u32),
        ram: (u32, u32),
        #[serde(default)]
        beta: BetaSource,
        /// Share of VMs sold as green instances.
        #[serde(default)]
        green_fraction: f64,
    },
    Explicit {
        vms: Vec<Vm>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaSource {
    Constant { value: f64 },
    Uniform { min: f64, max: f64 },
    /// Exponential with the given rate, truncated to [0, 1] by resampling.
    Exponential { rate: f64 },
}

impl Default for BetaSource {
    fn default() -> Self {
        BetaSource::Constant { value: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    pub id: ControllerId,
    #[serde(default)]
    pub ga: GAParams,
    #[serde(default)]
    pub weights: FitnessWeights,
    #[serde(default)]
    pub qos: QoSParams,
    #[serde(default = "default_underutil")]
    pub underutil_threshold: f64,
    #[serde(default = "default_downtime_ratio")]
    pub downtime_ratio: f64,
}

fn default_underutil() -> f64 {
    BCF_UNDERUTIL_THRESHOLD
}
fn default_downtime_ratio() -> f64 {
    0.16
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastSpec {
    pub price_error: ForecastErrorSpec,
    pub temperature_error: ForecastErrorSpec,
}

impl Default for ForecastSpec {
    fn default() -> Self {
        Self { price_error: ForecastErrorSpec::exact(), temperature_error: ForecastErrorSpec::exact() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingSpec {
    pub model: PricingModel,
    #[serde(default = "default_pricing_kind")]
    pub kind: PricingKind,
    /// Bill paused VMs as if they were running.
    #[serde(default)]
    pub bill_paused: bool,
}

fn default_pricing_kind() -> PricingKind {
    PricingKind::Perceived
}

/// Named seeds, one per random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub workload: u64,
    pub infrastructure: u64,
    pub traces: u64,
    pub power_noise: u64,
    pub forecast: u64,
    pub controller: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self::from_master(0)
    }
}

impl Seeds {
    /// Every stream derived from one master seed.
    pub fn from_master(seed: u64) -> Self {
        let d = |name: &str| rng::derive(seed, &[rng::label(name)]);
        Self {
            workload: d("workload"),
            infrastructure: d("infrastructure"),
            traces: d("traces"),
            power_noise: d("power_noise"),
            forecast: d("forecast"),
            controller: d("controller"),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("schema: unsupported version {}, expected {SCHEMA_VERSION}", self.schema));
        }
        let g = &self.grid;
        if g.period_s <= 0 || g.duration_s <= 0 || g.duration_s % g.period_s != 0 {
            return bad(format!("grid: duration {} s must be a positive multiple of period {} s", g.duration_s, g.period_s));
        }
        if self.controller.id == ControllerId::GaHybrid && self.controller.ga.fw_s > g.duration_s {
            return bad("controller.ga.fw_s: forecast window longer than the run".into());
        }
        for (name, m) in &self.power_models {
            m.validate().map_err(|e| SimError::Config(format!("power_models.{name}: {e}")))?;
        }
        self.migration.validate().map_err(|e| SimError::Config(format!("migration: {e}")))?;
        self.pricing.model.validate().map_err(|e| SimError::Config(format!("pricing.model: {e}")))?;
        if let WorkloadSpec::Generated { cpu, ram, green_fraction, .. } = &self.workload {
            if cpu.0 > cpu.1 || ram.0 > ram.1 || !(0.0..=1.0).contains(green_fraction) {
                return bad("workload: ranges must be ordered and green_fraction in [0, 1]".into());
            }
        }
        if let InfrastructureSpec::Generated { pms, cpu, ram, power_model, freq, .. } = &self.infrastructure {
            if *pms == 0 {
                return bad("infrastructure.pms: need at least one PM".into());
            }
            if cpu.0 == 0 || ram.0 == 0 || cpu.0 > cpu.1 || ram.0 > ram.1 {
                return bad("infrastructure: capacity ranges must be positive and ordered".into());
            }
            if !self.power_models.contains_key(power_model) {
                return bad(format!("infrastructure.power_model: unknown model {power_model:?}"));
            }
            freq.validate().map_err(|e| SimError::Config(format!("infrastructure.freq: {e}")))?;
        }
        Ok(())
    }

    /// Replaces every named seed with one derived from `seed`.
    pub fn override_seed(&mut self, seed: u64) {
        self.seeds = Seeds::from_master(seed);
    }

    /// Absolute trace paths for a config loaded from `base_dir`.
    pub fn resolve_paths(&mut self, base_dir: &Path) {
        if let TraceSpec::Files { electricity, temperature } = &mut self.traces {
            for p in electricity.values_mut().chain(temperature.values_mut()) {
                if p.is_relative() {
                    *p = base_dir.join(&*p);
                }
            }
        }
    }
}
