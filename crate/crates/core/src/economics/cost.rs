use serde::{Deserialize, Serialize};

use super::{EconError, J_PER_KWH};
use crate::geotemporal::TimeSeries;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyCost {
    pub energy_kwh: f64,
    pub cost: f64,
}

/// Rectangle-rule energy (kWh) and cost ($) of a power trace (W) under
/// prices in $/MWh. Prices may be on a coarser grid; they are step-held,
/// but must cover every power sample.
pub fn integrate_cost(power: &TimeSeries, prices: &TimeSeries) -> Result<EnergyCost, EconError> {
    let dt = power.period_s();
    let offset = (power.start() - prices.start()).num_seconds();
    if offset < 0 || offset % dt != 0 || prices.period_s() % dt != 0 {
        return Err(EconError::Grid(format!(
            "power grid ({}, {} s) cannot be step-held from price grid ({}, {} s)",
            power.start(),
            dt,
            prices.start(),
            prices.period_s()
        )));
    }
    let mut out = EnergyCost::default();
    for (t, w) in power.iter() {
        let e = prices
            .value_at(t)
            .ok_or_else(|| EconError::Grid(format!("no price at {t}")))?;
        let kwh = w * dt as f64 / J_PER_KWH;
        out.energy_kwh += kwh;
        out.cost += kwh * e / 1000.0;
    }
    Ok(out)
}

/// Energy and money totals of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub it_energy: f64,
    pub it_cost: f64,
    pub total_energy: f64,
    pub total_cost: f64,
    pub migration_energy: f64,
    pub migration_cost: f64,
    pub service_revenue: f64,
}

impl CostReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    /// Header plus one data row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(self).expect("plain struct serializes");
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("ascii output")
    }

    /// Cost minus revenue; lower is better for the provider.
    pub fn net_cost(&self) -> f64 {
        self.total_cost - self.service_revenue
    }
}

/// Pounds of CO2e charged for `energy_kwh` of VM energy.
pub fn environmental_chargeback(energy_kwh: f64, cef_lb_per_mwh: f64, pue: f64) -> Result<f64, EconError> {
    if energy_kwh < 0.0 || cef_lb_per_mwh < 0.0 || pue < 0.0 {
        return Err(EconError::Domain("chargeback inputs must be >= 0".into()));
    }
    Ok(cef_lb_per_mwh * pue * energy_kwh / 1000.0)
}
