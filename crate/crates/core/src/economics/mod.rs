//! Energy-cost integration, VM pricing and revenue, environmental
//! chargeback and the Kyoto wastage-penalty balance.

mod cost;
mod kyoto;
mod pricing;

pub use cost::{environmental_chargeback, integrate_cost, CostReport, EnergyCost};
pub use kyoto::{kyoto_equilibrium, kyoto_expected_penalty, kyoto_violation_prob, kyoto_wastage, KyotoParams};
pub(crate) use pricing::vm_price_at;
pub use pricing::{perceived_frequency, service_revenue, vm_price, PricingKind, PricingModel};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EconError {
    #[error("grid error: {0}")]
    Grid(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

/// Joules per kWh.
pub const J_PER_KWH: f64 = 3.6e6;
