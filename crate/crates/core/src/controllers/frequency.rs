use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ControlContext, ControlError};
use crate::cloudmodel::{host_power, ppue, Action, ActionKind, CloudState, Pm, PmId, Vm};
use crate::economics::vm_price;

/// One tried frequency reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyStep {
    pub pm: PmId,
    pub hz: u64,
    pub en_savings: f64,
    pub revenue_loss: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrequencyOutcome {
    /// `SetFreq` for every PM with at least one accepted reduction.
    pub actions: Vec<Action>,
    pub chosen: BTreeMap<PmId, u64>,
    pub steps: Vec<FrequencyStep>,
}

/// Hourly revenue of the running VMs on `pm` with all cores at `hz`.
pub(crate) fn pm_revenue(ctx: &ControlContext, pm: &Pm, running: &[&Vm], hz: u64) -> Result<f64, ControlError> {
    let f_max = pm.freq.max_hz as f64;
    let mut total = 0.0;
    for vm in running {
        let freqs = vec![hz as f64; vm.cores() as usize];
        total += vm_price(ctx.pricing, vm, &freqs, ctx.pricing_kind, f_max)?;
    }
    Ok(total)
}

/// Energy cost in $ of running `pm` at `hz` for one hour, cooling included.
pub(crate) fn pm_energy_cost(ctx: &ControlContext, pm: &Pm, running: &[&Vm], hz: u64) -> Result<f64, ControlError> {
    let model = ctx.power_model(pm)?;
    let watts = host_power(pm, model, running, ctx.inventory.weights(), hz, ctx.now)?;
    let price = ctx.forecast.price(&pm.location, 0)?;
    let temp = ctx.forecast.temperature(&pm.location, 0)?;
    Ok(watts * ppue(temp) * price / 1e6)
}

pub(crate) fn running_vms<'a>(ctx: &ControlContext<'a>, state: &CloudState, pm: PmId) -> Vec<&'a Vm> {
    state.running(pm).filter_map(|v| ctx.inventory.vm(v)).collect()
}

/// Per active PM (id order), steps the frequency down from f_max while the
/// hour's energy-cost saving strictly exceeds the revenue loss. A PM that
/// accepts no reduction rules out every PM with a strictly higher mean
/// beta, lower price and lower temperature.
pub fn frequency_scaling_stage(ctx: &ControlContext, state: &CloudState) -> Result<FrequencyOutcome, ControlError> {
    let inv = ctx.inventory;
    let mut out = FrequencyOutcome::default();
    let mut removed = BTreeSet::new();
    let mean_beta = |vms: &[&Vm]| vms.iter().map(|v| v.beta).sum::<f64>() / vms.len().max(1) as f64;
    for pm in inv.pms() {
        let running = running_vms(ctx, state, pm.id);
        if running.is_empty() || removed.contains(&pm.id) {
            continue;
        }
        let mut f = pm.freq.max_hz;
        let mut revenue_cur = pm_revenue(ctx, pm, &running, f)?;
        let mut cost_cur = pm_energy_cost(ctx, pm, &running, f)?;
        let mut to_apply = None;
        while f > pm.freq.min_hz {
            f -= pm.freq.step_hz;
            let revenue_new = pm_revenue(ctx, pm, &running, f)?;
            let cost_new = pm_energy_cost(ctx, pm, &running, f)?;
            let step = FrequencyStep {
                pm: pm.id,
                hz: f,
                en_savings: cost_cur - cost_new,
                revenue_loss: revenue_cur - revenue_new,
                accepted: cost_cur - cost_new > revenue_cur - revenue_new,
            };
            out.steps.push(step);
            if !step.accepted {
                break;
            }
            revenue_cur = revenue_new;
            cost_cur = cost_new;
            to_apply = Some(f);
        }
        match to_apply {
            Some(hz) => {
                out.chosen.insert(pm.id, hz);
                out.actions.push(Action::new(ctx.now, ActionKind::SetFreq { pm: pm.id, hz }));
            }
            None => {
                let beta = mean_beta(&running);
                let price = ctx.forecast.price(&pm.location, 0)?;
                let temp = ctx.forecast.temperature(&pm.location, 0)?;
                for other in inv.pms() {
                    let vms = running_vms(ctx, state, other.id);
                    if vms.is_empty() {
                        continue;
                    }
                    if mean_beta(&vms) > beta
                        && ctx.forecast.price(&other.location, 0)? < price
                        && ctx.forecast.temperature(&other.location, 0)? < temp
                    {
                        removed.insert(other.id);
                    }
                }
            }
        }
    }
    Ok(out)
}
