//! Shared bin-packing bookkeeping for the greedy placers.

use std::collections::BTreeMap;

use crate::cloudmodel::{utilization, CloudState, Inventory, Pm, PmId, Vm, VmId};

const EPS: f64 = 1e-9;

/// Reserved demand per PM (paused VMs included), kept in step with a
/// working [`CloudState`].
#[derive(Debug, Clone)]
pub(crate) struct Load<'a> {
    inventory: &'a Inventory,
    max_cap: Vec<f64>,
    used: BTreeMap<PmId, Vec<f64>>,
}

impl<'a> Load<'a> {
    pub fn new(inventory: &'a Inventory, state: &CloudState) -> Self {
        let r = inventory.resource_kinds();
        let mut used: BTreeMap<PmId, Vec<f64>> = inventory.pms().iter().map(|p| (p.id, vec![0.0; r])).collect();
        for (pm, vms) in &state.alloc {
            let Some(u) = used.get_mut(pm) else { continue };
            for vm in vms.iter().filter_map(|v| inventory.vm(*v)) {
                add(u, vm, 1.0);
            }
        }
        Self { inventory, max_cap: inventory.max_capacity(), used }
    }

    pub fn add(&mut self, pm: PmId, vm: &Vm) {
        if let Some(u) = self.used.get_mut(&pm) {
            add(u, vm, 1.0);
        }
    }

    pub fn remove(&mut self, pm: PmId, vm: &Vm) {
        if let Some(u) = self.used.get_mut(&pm) {
            add(u, vm, -1.0);
        }
    }

    pub fn fits(&self, pm: &Pm, vm: &Vm) -> bool {
        let u = &self.used[&pm.id];
        u.iter()
            .zip(vm.requested.values())
            .zip(pm.capacity.values())
            .all(|((used, req), cap)| used + req <= cap + EPS)
    }

    pub fn overloaded(&self, pm: &Pm) -> bool {
        self.used[&pm.id].iter().zip(pm.capacity.values()).any(|(u, c)| *u > c + EPS)
    }

    /// Free capacity on the inventory-wide scale, weighted by resource kind.
    pub fn free(&self, pm: &Pm) -> f64 {
        let w = self.inventory.weights();
        self.used[&pm.id]
            .iter()
            .zip(pm.capacity.values())
            .zip(w.iter().zip(&self.max_cap))
            .map(|((u, c), (w, m))| w * (c - u) / m)
            .sum()
    }

    pub fn capacity(&self, pm: &Pm) -> f64 {
        scaled(pm.capacity.values(), self.inventory.weights(), &self.max_cap)
    }

    pub fn size(&self, vm: &Vm) -> f64 {
        scaled(vm.requested.values(), self.inventory.weights(), &self.max_cap)
    }
}

fn add(u: &mut [f64], vm: &Vm, sign: f64) {
    for (x, r) in u.iter_mut().zip(vm.requested.values()) {
        *x += sign * r;
    }
}

fn scaled(values: &[f64], weights: &[f64], max_cap: &[f64]) -> f64 {
    values.iter().zip(weights.iter().zip(max_cap)).map(|(v, (w, m))| w * v / m).sum()
}

/// VMs sorted by decreasing size, id ascending on ties.
pub(crate) fn sort_by_size_desc(load: &Load, vms: &mut [&Vm]) {
    vms.sort_by(|a, b| load.size(b).total_cmp(&load.size(a)).then(a.id.cmp(&b.id)));
}

/// Utilisation of the running (unpaused) VMs on `pm`.
pub(crate) fn running_util(state: &CloudState, inventory: &Inventory, pm: &Pm) -> f64 {
    let vms: Vec<&Vm> = state.running(pm.id).filter_map(|v| inventory.vm(v)).collect();
    utilization(pm, vms, inventory.weights()).unwrap_or(0.0)
}

/// Evicts the largest VMs from an overloaded PM until it fits again.
pub(crate) fn evict_until_fits(state: &mut CloudState, load: &mut Load, pm: &Pm) -> Vec<VmId> {
    let inventory = load.inventory;
    let mut hosted: Vec<&Vm> = state.hosted(pm.id).filter_map(|v| inventory.vm(v)).collect();
    sort_by_size_desc(load, &mut hosted);
    let mut out = Vec::new();
    for vm in hosted {
        if !load.overloaded(pm) {
            break;
        }
        load.remove(pm.id, vm);
        state.alloc.get_mut(&pm.id).expect("known PM").remove(&vm.id);
        out.push(vm.id);
    }
    out
}
