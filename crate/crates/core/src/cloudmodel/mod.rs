//! Domain model of data centers, PMs, VMs, allocation state and control
//! actions, plus the physical models: utilisation, linear and multi-core
//! power, temperature-dependent cooling overhead and live-migration cost.
//!
//! Resource tuples are ordered per scenario; the crate's convention is
//! index [`CPU`] = cores and index [`RAM`] = GB, with further kinds allowed
//! after them.

mod cooling;
mod migration;
mod power;
mod state;
mod types;

pub use cooling::{ppue, total_power};
pub use migration::{migration_cost, MigrationCost, MigrationModel};
pub use power::{
    cpu_bound_utilization, host_power, linear_power, multicore_idle_power, multicore_peak_power,
    multicore_power, LinearPowerModel, MulticorePowerModel, PeakCoefficients, PowerModel,
    PowerProfile,
};
pub use state::{
    apply_actions, check_constraints, utilization, Action, ActionKind, CloudState,
    ConstraintReport, Effect, Schedule,
};
pub use types::{FrequencyRange, Inventory, LocationId, Pm, PmId, ResourceSpec, Vm, VmId};

use thiserror::Error;

use crate::geotemporal::Timestamp;

/// Index of CPU cores in resource tuples.
pub const CPU: usize = 0;
/// Index of RAM (GB) in resource tuples.
pub const RAM: usize = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("PM {0} has zero capacity in resource {1}")]
    ZeroCapacity(PmId, usize),
    #[error("resource tuple has {got} kinds, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("(q={q}, c={c}) outside the model domain 1..={max_q} x 1..={max_c}")]
    Domain { q: u32, c: u32, max_q: u32, max_c: u32 },
    #[error("frequency {hz} Hz is not on the grid of PM {pm}")]
    Frequency { pm: PmId, hz: u64 },
    #[error("pre-copy never converges: dirty rate {dirty} >= bandwidth {bandwidth}")]
    NonConvergent { dirty: f64, bandwidth: f64 },
    #[error("action at {time}: {reason}")]
    Action { time: Timestamp, reason: String },
}
