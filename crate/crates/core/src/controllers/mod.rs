//! Scheduling policies: peak pauser, best-fit-decreasing baseline,
//! GA-hybrid migration scheduler with best-cost-fit repair, and the
//! two-stage BCF + frequency-scaling controller.

mod bcf;
mod bfd;
mod packing;
mod context;
mod fitness;
mod frequency;
mod ga;
mod peak;
mod policies;

pub use bcf::{bcf_place, bcf_repair, BCF_UNDERUTIL_THRESHOLD};
pub use bfd::{bfd_place, bfd_step};
pub use context::{ControlContext, WindowForecast};
pub use fitness::{FitnessBreakdown, FitnessContext, FitnessWeights, QoSParams};
pub use frequency::{frequency_scaling_stage, FrequencyOutcome, FrequencyStep};
pub use ga::{ga_create, ga_crossover, ga_mutate, ga_run, GAParams, GaOutcome};
pub use peak::peak_pauser;
pub use policies::{
    BcfController, BcffsController, BfdController, Controller, ControllerId, Decision,
    DecisionInfo, GaHybridController, PeakPauserController,
};

use thiserror::Error;

use crate::cloudmodel::{ModelError, VmId};
use crate::economics::EconError;
use crate::geotemporal::GeoError;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Econ(#[from] EconError),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error("no PM can host {0:?}")]
    CapacityExhausted(Vec<VmId>),
    #[error("repair failed, unplaced VMs: {0:?}")]
    RepairFailed(Vec<VmId>),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unknown power model {0:?}")]
    MissingPowerModel(String),
    #[error("no forecast for location {0:?}")]
    MissingLocation(String),
}
