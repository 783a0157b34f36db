//! Allocation state, control actions and schedules.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Inventory, ModelError, Pm, PmId, Vm, VmId};
use crate::geotemporal::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionKind {
    /// A VM request arrives; it is live but not yet placed.
    Boot { vm: VmId },
    /// The VM leaves the cloud.
    Delete { vm: VmId },
    /// Place or move a VM. Placing an unallocated VM is a boot placement,
    /// not a migration.
    Migrate { vm: VmId, pm: PmId },
    Pause { vm: VmId },
    Unpause { vm: VmId },
    SetFreq { pm: PmId, hz: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub time: Timestamp,
    #[serde(flatten)]
    pub kind: ActionKind,
}

impl Action {
    pub fn new(time: Timestamp, kind: ActionKind) -> Self {
        Self { time, kind }
    }

    pub fn migrate(time: Timestamp, vm: VmId, pm: PmId) -> Self {
        Self::new(time, ActionKind::Migrate { vm, pm })
    }
}

/// Time-ordered actions planned inside the window `[start, end]` (both
/// grid instants, inclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    start: Timestamp,
    end: Timestamp,
    actions: Vec<Action>,
}

impl Schedule {
    pub fn empty(start: Timestamp, end: Timestamp) -> Self {
        Self { start, end, actions: Vec::new() }
    }

    /// Sorts `actions` by time (stable) and drops nothing; fails if any
    /// action falls outside the window.
    pub fn new(start: Timestamp, end: Timestamp, mut actions: Vec<Action>) -> Result<Self, ModelError> {
        if let Some(a) = actions.iter().find(|a| a.time < start || a.time > end) {
            return Err(ModelError::Action { time: a.time, reason: format!("outside schedule window {start}..={end}") });
        }
        actions.sort_by_key(|a| a.time);
        Ok(Self { start, end, actions })
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn end(&self) -> Timestamp {
        self.end
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn into_actions(self) -> Vec<Action> {
        self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Inserts after every existing action with the same time.
    pub fn insert(&mut self, action: Action) {
        let at = self.actions.partition_point(|a| a.time <= action.time);
        self.actions.insert(at, action);
    }

    pub fn remove(&mut self, index: usize) -> Action {
        self.actions.remove(index)
    }

    pub fn actions_at(&self, t: Timestamp) -> impl Iterator<Item = &Action> {
        self.actions.iter().filter(move |a| a.time == t)
    }

    pub fn retain<F: FnMut(&Action) -> bool>(&mut self, f: F) {
        self.actions.retain(f);
    }

    /// Same actions in a new window, dropping those that fall outside it.
    pub fn rewindow(&self, start: Timestamp, end: Timestamp) -> Self {
        let actions = self.actions.iter().filter(|a| a.time >= start && a.time <= end).copied().collect();
        Self { start, end, actions }
    }
}

/// What applying one action did to the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effect {
    None,
    Booted,
    Deleted,
    Placed { to: PmId },
    Migrated { from: PmId, to: PmId },
    Paused,
    Unpaused,
    FrequencySet,
}

/// Cloud snapshot at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudState {
    pub time: Timestamp,
    pub live: BTreeSet<VmId>,
    /// Every known PM has an entry, possibly empty.
    pub alloc: BTreeMap<PmId, BTreeSet<VmId>>,
    pub paused: BTreeSet<VmId>,
    pub freq: BTreeMap<PmId, u64>,
}

impl CloudState {
    /// No VMs, every PM at its maximum frequency.
    pub fn empty(time: Timestamp, pms: &[Pm]) -> Self {
        Self {
            time,
            live: BTreeSet::new(),
            alloc: pms.iter().map(|p| (p.id, BTreeSet::new())).collect(),
            paused: BTreeSet::new(),
            freq: pms.iter().map(|p| (p.id, p.freq.max_hz)).collect(),
        }
    }

    pub fn host_of(&self, vm: VmId) -> Option<PmId> {
        self.alloc.iter().find(|(_, set)| set.contains(&vm)).map(|(pm, _)| *pm)
    }

    pub fn hosts_of(&self, vm: VmId) -> Vec<PmId> {
        self.alloc.iter().filter(|(_, set)| set.contains(&vm)).map(|(pm, _)| *pm).collect()
    }

    /// VM -> host map; VMs on several PMs map to the lowest PM id.
    pub fn host_map(&self) -> BTreeMap<VmId, PmId> {
        let mut out = BTreeMap::new();
        for (pm, set) in &self.alloc {
            for vm in set {
                out.entry(*vm).or_insert(*pm);
            }
        }
        out
    }

    pub fn hosted(&self, pm: PmId) -> impl Iterator<Item = VmId> + '_ {
        self.alloc.get(&pm).into_iter().flatten().copied()
    }

    /// Hosted and not paused.
    pub fn running(&self, pm: PmId) -> impl Iterator<Item = VmId> + '_ {
        self.hosted(pm).filter(|vm| !self.paused.contains(vm))
    }

    pub fn is_active(&self, pm: PmId) -> bool {
        self.alloc.get(&pm).is_some_and(|s| !s.is_empty())
    }

    pub fn frequency(&self, pm: &Pm) -> u64 {
        self.freq.get(&pm.id).copied().unwrap_or(pm.freq.max_hz)
    }

    /// Applies one action in place.
    pub fn apply(&mut self, action: &Action, pms: &[Pm]) -> Result<Effect, ModelError> {
        let err = |reason: String| ModelError::Action { time: action.time, reason };
        match action.kind {
            ActionKind::Boot { vm } => {
                if !self.live.insert(vm) {
                    return Err(err(format!("boot of {vm}, which is already live")));
                }
                Ok(Effect::Booted)
            }
            ActionKind::Delete { vm } => {
                if !self.live.remove(&vm) {
                    return Err(err(format!("delete of {vm}, which is not live")));
                }
                for set in self.alloc.values_mut() {
                    set.remove(&vm);
                }
                self.paused.remove(&vm);
                Ok(Effect::Deleted)
            }
            ActionKind::Migrate { vm, pm } => {
                if !self.alloc.contains_key(&pm) {
                    return Err(err(format!("migration of {vm} to unknown {pm}")));
                }
                if !self.live.contains(&vm) {
                    return Err(err(format!("migration of {vm}, which is not live")));
                }
                let from = self.host_of(vm);
                for set in self.alloc.values_mut() {
                    set.remove(&vm);
                }
                self.alloc.get_mut(&pm).expect("checked").insert(vm);
                Ok(match from {
                    None => Effect::Placed { to: pm },
                    Some(f) if f == pm => Effect::None,
                    Some(f) => Effect::Migrated { from: f, to: pm },
                })
            }
            ActionKind::Pause { vm } => {
                if self.host_of(vm).is_none() {
                    return Err(err(format!("pause of {vm}, which is not allocated")));
                }
                Ok(if self.paused.insert(vm) { Effect::Paused } else { Effect::None })
            }
            ActionKind::Unpause { vm } => {
                if self.paused.remove(&vm) {
                    Ok(Effect::Unpaused)
                } else {
                    log::debug!("{}: unpause of {vm}, which is not paused; ignored", action.time);
                    Ok(Effect::None)
                }
            }
            ActionKind::SetFreq { pm, hz } => {
                let spec = pms
                    .iter()
                    .find(|p| p.id == pm)
                    .ok_or_else(|| err(format!("frequency change on unknown {pm}")))?;
                if !spec.freq.contains(hz) {
                    return Err(ModelError::Frequency { pm, hz });
                }
                self.freq.insert(pm, hz);
                Ok(Effect::FrequencySet)
            }
        }
    }
}

/// New state at time `at` after applying `actions` in order.
pub fn apply_actions(state: &CloudState, at: Timestamp, actions: &[Action], pms: &[Pm]) -> Result<CloudState, ModelError> {
    let mut next = state.clone();
    next.time = at;
    for a in actions {
        next.apply(a, pms)?;
    }
    Ok(next)
}

/// Weighted sum over resource kinds of (demand of `hosted`) / capacity.
/// Not clamped: values above 1 mean overcommitment.
pub fn utilization<'a>(
    pm: &Pm,
    hosted: impl IntoIterator<Item = &'a Vm>,
    weights: &[f64],
) -> Result<f64, ModelError> {
    let r = pm.capacity.len();
    if weights.len() != r {
        return Err(ModelError::Dimension { expected: r, got: weights.len() });
    }
    if let Some(i) = pm.capacity.values().iter().position(|&c| c <= 0.0) {
        return Err(ModelError::ZeroCapacity(pm.id, i));
    }
    let mut demand = vec![0.0; r];
    for vm in hosted {
        for (d, x) in demand.iter_mut().zip(vm.requested.values()) {
            *d += x;
        }
    }
    Ok(demand
        .iter()
        .zip(pm.capacity.values())
        .zip(weights)
        .map(|((d, c), w)| w * d / c)
        .sum())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// Live VMs hosted on zero PMs or on more than one.
    pub unallocated: BTreeSet<VmId>,
    /// PMs whose hosted demand exceeds capacity in some resource kind.
    pub overloaded: BTreeSet<PmId>,
}

impl ConstraintReport {
    pub fn is_clean(&self) -> bool {
        self.unallocated.is_empty() && self.overloaded.is_empty()
    }
}

/// Allocation and capacity constraint check. Paused VMs keep their
/// reservation and count toward capacity.
pub fn check_constraints(state: &CloudState, inventory: &Inventory) -> ConstraintReport {
    let mut host_count: BTreeMap<VmId, usize> = BTreeMap::new();
    let mut overloaded = BTreeSet::new();
    for (pm_id, set) in &state.alloc {
        for vm in set {
            *host_count.entry(*vm).or_default() += 1;
        }
        let Some(pm) = inventory.pm(*pm_id) else { continue };
        let mut demand = vec![0.0; pm.capacity.len()];
        for vm in set.iter().filter_map(|v| inventory.vm(*v)) {
            for (d, x) in demand.iter_mut().zip(vm.requested.values()) {
                *d += x;
            }
        }
        if demand.iter().zip(pm.capacity.values()).any(|(d, c)| d > c) {
            overloaded.insert(*pm_id);
        }
    }
    let unallocated = state
        .live
        .iter()
        .filter(|vm| host_count.get(vm).copied().unwrap_or(0) != 1)
        .copied()
        .collect();
    ConstraintReport { unallocated, overloaded }
}
