//! Energy-aware control and simulation of geographically distributed IaaS
//! clouds driven by geotemporal inputs: real-time electricity prices and
//! outside temperatures that change the cooling overhead.
//!
//! The crate is split along the data flow of a simulation run:
//!
//! * [`geotemporal`] holds time series, trace ingestion, forecasting and
//!   expensive-hour detection.
//! * [`cloudmodel`] is the physical model: VMs, PMs, allocation state,
//!   utilisation, power, cooling and live-migration overhead.
//! * [`economics`] integrates energy cost, prices VMs and balances Kyoto
//!   wastage against SLA penalties.
//! * [`controllers`] contains the control policies (peak pauser, BFD,
//!   GA hybrid with BCF repair, BCFFS frequency scaling).
//! * [`simulator`] runs the discrete-time loop and post-processes results.

pub mod cloudmodel;
pub mod controllers;
pub mod economics;
pub mod geotemporal;
pub mod rng;
pub mod simulator;

pub use geotemporal::{TimeSeries, Timestamp};
