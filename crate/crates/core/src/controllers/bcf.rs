use std::collections::BTreeSet;

use super::packing::{evict_until_fits, running_util, sort_by_size_desc, Load};
use super::{ControlContext, ControlError};
use crate::cloudmodel::{Action, Pm, PmId, Schedule, Vm, VmId};

/// Hosts with a running utilisation in (0, threshold) are emptied at the
/// start of a repair.
pub const BCF_UNDERUTIL_THRESHOLD: f64 = 0.25;

/// Best-cost-fit repair. Replays `schedule` step by step from the current
/// state; at every step, unallocated VMs and VMs evicted from overloaded
/// hosts are re-placed, and at the first step the VMs of underutilised
/// hosts are too. Candidates: active hosts by free capacity then location
/// cost (price x pPUE), falling back to inactive hosts by capacity
/// (largest first) then cost.
pub fn bcf_repair(schedule: &Schedule, ctx: &ControlContext, underutil_threshold: f64) -> Result<Schedule, ControlError> {
    let inv = ctx.inventory;
    let mut state = ctx.state.clone();
    let mut out = Vec::with_capacity(schedule.len());
    let mut pending = schedule.actions().iter().peekable();
    let mut unplaced = BTreeSet::new();
    for k in 0..ctx.window_steps {
        let t = ctx.step_time(k);
        state.time = t;
        while let Some(a) = pending.next_if(|a| a.time <= t) {
            match state.apply(a, inv.pms()) {
                Ok(_) => out.push(Action { time: t, ..*a }),
                Err(e) => log::debug!("repair drops {a:?}: {e}"),
            }
        }

        let mut load = Load::new(inv, &state);
        let hosted = state.host_map();
        let mut to_alloc: Vec<(VmId, Option<PmId>)> =
            state.live.iter().filter(|v| !hosted.contains_key(v)).map(|&v| (v, None)).collect();
        for pm in inv.pms() {
            if load.overloaded(pm) {
                to_alloc.extend(evict_until_fits(&mut state, &mut load, pm).into_iter().map(|v| (v, Some(pm.id))));
            }
        }
        if k == 0 {
            for pm in inv.pms() {
                let u = running_util(&state, inv, pm);
                if u > 0.0 && u < underutil_threshold {
                    let vms: Vec<VmId> = state.hosted(pm.id).collect();
                    for v in vms {
                        load.remove(pm.id, inv.vm(v).expect("inventory VM"));
                        to_alloc.push((v, Some(pm.id)));
                    }
                    state.alloc.get_mut(&pm.id).expect("known PM").clear();
                }
            }
        }
        if to_alloc.is_empty() {
            continue;
        }

        let mut vms: Vec<&Vm> = to_alloc.iter().filter_map(|(v, _)| inv.vm(*v)).collect();
        sort_by_size_desc(&load, &mut vms);
        let costs: Vec<f64> = inv.pms().iter().map(|pm| ctx.location_cost(pm, k)).collect::<Result<_, _>>()?;
        let cost = |pm: &Pm| costs[inv.pm_index(pm.id).expect("inventory PM")];
        for vm in vms {
            let mut active: Vec<&Pm> = inv.pms().iter().filter(|p| state.is_active(p.id)).collect();
            active.sort_by(|a, b| {
                load.free(a).total_cmp(&load.free(b)).then(cost(a).total_cmp(&cost(b))).then(a.id.cmp(&b.id))
            });
            let mut inactive: Vec<&Pm> = inv.pms().iter().filter(|p| !state.is_active(p.id)).collect();
            inactive.sort_by(|a, b| {
                load.capacity(b).total_cmp(&load.capacity(a)).then(cost(a).total_cmp(&cost(b))).then(a.id.cmp(&b.id))
            });
            let target = active.into_iter().chain(inactive).find(|p| load.fits(p, vm));
            let Some(pm) = target else {
                unplaced.insert(vm.id);
                continue;
            };
            load.add(pm.id, vm);
            state.alloc.get_mut(&pm.id).expect("known PM").insert(vm.id);
            let from = to_alloc.iter().find(|(v, _)| *v == vm.id).and_then(|(_, f)| *f);
            if from != Some(pm.id) {
                out.push(Action::migrate(t, vm.id, pm.id));
            }
        }
    }
    if !unplaced.is_empty() {
        return Err(ControlError::RepairFailed(unplaced.into_iter().collect()));
    }
    Ok(Schedule::new(ctx.now, ctx.window_end(), out)?)
}

/// Best-cost-fit placement at `ctx.now` only: new VMs, VMs of overloaded
/// hosts and VMs of underutilised hosts.
pub fn bcf_place(ctx: &ControlContext, underutil_threshold: f64) -> Result<Vec<Action>, ControlError> {
    let now_only = ControlContext { window_steps: 1, ..*ctx };
    Ok(bcf_repair(&Schedule::empty(ctx.now, ctx.now), &now_only, underutil_threshold)?.into_actions())
}
