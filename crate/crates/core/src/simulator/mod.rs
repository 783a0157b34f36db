//! Discrete-time simulation loop, scenario generation, result output and
//! QoS statistics.
//!
//! Controllers see (optionally perturbed) forecasts; energy, cooling and
//! cost are always accrued on the true traces.

mod config;
mod engine;
mod generate;
mod metrics;
mod output;
mod synth;

pub use config::{
    BetaSource, ControllerSpec, ForecastSpec, GridSpec, InfrastructureSpec, PricingSpec, ScenarioConfig, Seeds,
    SyntheticLocation, SyntheticTraces, TraceSpec, WorkloadSpec, SCHEMA_VERSION,
};
pub use engine::{
    build_controller, prepare, simulate, simulate_with, ActionSource, DecisionRecord, Lifetime, LoggedAction, MigrationEvent,
    PauseInterval, RunMeta, Scenario, SimulationResult, StepMetrics,
};
pub use generate::{generate_infrastructure, generate_workload, synthesize_traces, InfraParams, WorkloadParams};
pub use metrics::{
    availability, availability_from, bootstrap_ci, migration_rate_histogram, per_vm_daily_rates,
    worst_case_daily_rate, DEFAULT_CI_LEVEL, DEFAULT_RESAMPLES,
};
pub use output::{write_result_dir, Summary};
pub use synth::{estimate_savings, synth_power_pair, synth_power_signal, Savings, SynthSpec};

use thiserror::Error;

use crate::cloudmodel::ModelError;
use crate::controllers::ControlError;
use crate::economics::EconError;
use crate::geotemporal::{GeoError, Timestamp};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Econ(#[from] EconError),
    #[error("controller failed at step {step} ({time}): {source}")]
    Controller {
        step: usize,
        time: Timestamp,
        #[source]
        source: ControlError,
    },
    #[error("invalid action at step {step} ({time}): {source}")]
    Action {
        step: usize,
        time: Timestamp,
        #[source]
        source: ModelError,
    },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    /// Step index of a runtime failure, if any.
    pub fn step(&self) -> Option<usize> {
        match self {
            SimError::Controller { step, .. } | SimError::Action { step, .. } => Some(*step),
            _ => None,
        }
    }
}
