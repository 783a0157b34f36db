use std::collections::BTreeSet;

use crate::cloudmodel::{Action, ActionKind, CloudState, VmId};
use crate::geotemporal::{is_expensive, HourSet, Timestamp};

/// Pauses every running green VM during an expensive hour and unpauses
/// every paused one otherwise. Unallocated VMs are skipped.
pub fn peak_pauser(expensive: &HourSet, green_vms: &BTreeSet<VmId>, t: Timestamp, state: &CloudState) -> Vec<Action> {
    let hosted = state.host_map();
    let pause = is_expensive(t, expensive);
    green_vms
        .iter()
        .filter(|vm| hosted.contains_key(vm))
        .filter_map(|&vm| match (pause, state.paused.contains(&vm)) {
            (true, false) => Some(Action::new(t, ActionKind::Pause { vm })),
            (false, true) => Some(Action::new(t, ActionKind::Unpause { vm })),
            _ => None,
        })
        .collect()
}
