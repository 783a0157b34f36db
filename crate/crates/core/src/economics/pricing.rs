use serde::{Deserialize, Serialize};

use super::EconError;
use crate::cloudmodel::{CloudState, Inventory, Vm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PricingKind {
    /// Charged on the actual core frequency.
    Performance,
    /// Charged on `beta f + (1 - beta) f_max`.
    Perceived,
}

/// Hourly VM price parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricingModel {
    pub c_base: f64,
    pub c_cpu: f64,
    pub c_ram: f64,
    pub ram_base: f64,
    pub f_base: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl PricingModel {
    pub fn elastic_hosts(f_base: f64) -> Self {
        Self { c_base: 0.027, c_cpu: 0.018, c_ram: 0.025, ram_base: 1.0, f_base, scale: 1.0 }
    }

    pub fn cloud_sigma(f_base: f64) -> Self {
        Self { c_base: 0.0045, c_cpu: 0.0017, c_ram: 0.004, ram_base: 1.0, f_base, scale: 1.0 }
    }

    /// Same model at the ARM price level.
    pub fn arm(self) -> Self {
        Self { scale: self.scale / 11.0, ..self }
    }

    pub fn validate(&self) -> Result<(), EconError> {
        if [self.c_base, self.c_cpu, self.c_ram, self.scale].iter().any(|v| !(*v >= 0.0)) {
            return Err(EconError::Invalid("prices and scale must be >= 0".into()));
        }
        if !(self.ram_base > 0.0 && self.f_base > 0.0) {
            return Err(EconError::Invalid("ram_base and f_base must be > 0".into()));
        }
        Ok(())
    }
}

pub fn perceived_frequency(beta: f64, f: f64, f_max: f64) -> f64 {
    beta * f + (1.0 - beta) * f_max
}

/// Hourly price of `vm` with one frequency per virtual core.
pub fn vm_price(
    model: &PricingModel,
    vm: &Vm,
    per_core_freq: &[f64],
    kind: PricingKind,
    f_max: f64,
) -> Result<f64, EconError> {
    let mut cpu = 0.0;
    for &f in per_core_freq {
        if f < model.f_base || f > f_max {
            return Err(EconError::Domain(format!("core frequency {f} outside [{}, {f_max}]", model.f_base)));
        }
        let f_cpu = match kind {
            PricingKind::Performance => f,
            PricingKind::Perceived => perceived_frequency(vm.beta, f, f_max),
        };
        cpu += (f_cpu - model.f_base) / model.f_base;
    }
    Ok(model.scale * (model.c_base + model.c_cpu * cpu + model.c_ram * vm.ram_gb() / model.ram_base))
}

/// Price of `vm` with every core at the host frequency `f`.
pub(crate) fn vm_price_at(model: &PricingModel, vm: &Vm, f: f64, kind: PricingKind, f_max: f64) -> Result<f64, EconError> {
    vm_price(model, vm, &vec![f; vm.cores() as usize], kind, f_max)
}

/// Revenue over a sequence of states, each billed for `step_hours`:
/// every live, allocated and unpaused VM pays its hourly price at its
/// host's frequency.
pub fn service_revenue(
    states: &[CloudState],
    inventory: &Inventory,
    pricing: &PricingModel,
    kind: PricingKind,
    step_hours: f64,
) -> Result<f64, EconError> {
    let mut total = 0.0;
    for s in states {
        for (pm_id, vms) in &s.alloc {
            let Some(pm) = inventory.pm(*pm_id) else { continue };
            let f = s.frequency(pm) as f64;
            for vm in vms.iter().filter(|v| s.live.contains(v) && !s.paused.contains(v)) {
                let Some(vm) = inventory.vm(*vm) else { continue };
                total += vm_price_at(pricing, vm, f, kind, pm.freq.max_hz as f64)? * step_hours;
            }
        }
    }
    Ok(total)
}
