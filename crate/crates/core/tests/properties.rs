mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use geocloud::cloudmodel::{
    check_constraints, multicore_idle_power, multicore_peak_power, multicore_power, Action, ActionKind,
    MulticorePowerModel, PmId, VmId,
};
use geocloud::controllers::peak_pauser;
use geocloud::economics::{service_revenue, PricingKind, PricingModel};
use geocloud::geotemporal::{find_expensive_hours, hour_count, ses_smooth};
use geocloud::TimeSeries;
use proptest::prelude::*;

fn daily(values: &[f64], days: usize) -> TimeSeries {
    let v = (0..days * 24).map(|i| values[i % 24]).collect();
    TimeSeries::new(t0(), HOUR, v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ses_is_causal(x in proptest::collection::vec(-50.0f64..200.0, 2..60), cut in 1usize..60, alpha in 0.01f64..0.99) {
        let cut = cut.min(x.len());
        let full = ses_smooth(&TimeSeries::new(t0(), HOUR, x.clone()).unwrap(), alpha).unwrap();
        let head = ses_smooth(&TimeSeries::new(t0(), HOUR, x[..cut].to_vec()).unwrap(), alpha).unwrap();
        prop_assert_eq!(&full.values()[..cut], head.values());
        // s[t] ignores x[t] itself for t >= 1
        if cut < x.len() {
            let mut bumped = x.clone();
            bumped[cut] += 1000.0;
            let b = ses_smooth(&TimeSeries::new(t0(), HOUR, bumped).unwrap(), alpha).unwrap();
            prop_assert_eq!(&b.values()[..=cut], &full.values()[..=cut]);
        }
    }

    #[test]
    fn expensive_set_size(ratio in 0.001f64..=1.0, hourly in proptest::collection::vec(0.0f64..100.0, 24)) {
        let got = find_expensive_hours(&daily(&hourly, 2), ratio).unwrap();
        let want = (ratio * 24.0 - 1e-9).ceil() as usize;
        prop_assert_eq!(got.len(), want);
        prop_assert_eq!(hour_count(ratio), want);
    }

    #[test]
    fn dominant_hour_is_always_selected(hourly in proptest::collection::vec(0.0f64..100.0, 24), top in 0usize..24, ratio in 0.01f64..=1.0) {
        let mut h = hourly.clone();
        h[top] = 500.0;
        let got = find_expensive_hours(&daily(&h, 3), ratio).unwrap();
        prop_assert!(got.contains(&(top as u32)));
        // brute force: every selected hour's mean is at least every unselected one's
        let lo = got.iter().map(|&i| h[i as usize]).fold(f64::INFINITY, f64::min);
        prop_assert!((0..24u32).filter(|i| !got.contains(i)).all(|i| h[i as usize] <= lo));
    }

    #[test]
    fn equal_means_break_ties_by_hour(level in 1.0f64..100.0, ratio in 0.01f64..=1.0, perm in Just((0..24u32).collect::<Vec<_>>()).prop_shuffle()) {
        // all hours tie, whatever order they were generated in
        let h: Vec<f64> = perm.iter().map(|_| level).collect();
        let got = find_expensive_hours(&daily(&h, 2), ratio).unwrap();
        let want: BTreeSet<u32> = (0..hour_count(ratio) as u32).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn multicore_stays_between_idle_and_peak(q in 1u32..=11, c in 1u32..=4, u in 0.0f64..=1.0) {
        let m = MulticorePowerModel::arm();
        let (idle, peak) = (multicore_idle_power(&m, q).unwrap(), multicore_peak_power(&m, q, c).unwrap());
        let p = multicore_power(&m, q, c, u).unwrap();
        prop_assert!(idle <= peak);
        prop_assert!(p >= idle - 1e-12 && p <= peak + 1e-12);
    }

    #[test]
    fn transitions_keep_allocation_single(ops in proptest::collection::vec((0u8..6, 0u32..6, 0u32..4), 0..60)) {
        let w = World::new((0..3).map(|i| pm(i, "a", 8.0, 16.0)).collect(), (0..5).map(|i| vm(i, 1.0, 1.0, 1.0)).collect(), &[], flat_forecast(&[("a", 1.0, 1.0)], 1));
        let mut state = w.state.clone();
        for (op, v, p) in ops {
            let (vm, pm) = (VmId(v), PmId(p));
            let kind = match op {
                0 => ActionKind::Boot { vm },
                1 => ActionKind::Delete { vm },
                2 | 3 => ActionKind::Migrate { vm, pm },
                4 => ActionKind::Pause { vm },
                _ => ActionKind::Unpause { vm },
            };
            let before = state.clone();
            if state.apply(&Action::new(t0(), kind), w.inventory.pms()).is_err() {
                prop_assert_eq!(&state, &before);
                continue;
            }
            let mut seen = BTreeSet::new();
            for set in state.alloc.values() {
                for vm in set {
                    prop_assert!(seen.insert(*vm), "{vm} hosted twice");
                    prop_assert!(state.live.contains(vm));
                }
            }
            prop_assert!(state.paused.iter().all(|v| seen.contains(v)), "dangling pause");
        }
    }

    #[test]
    fn constraint_check_matches_brute_force(
        caps in proptest::collection::vec((1u32..8, 1u32..16), 1..=5),
        vms in proptest::collection::vec((1u32..4, 1u32..6, proptest::option::of(0usize..5)), 0..=20),
    ) {
        let pms: Vec<_> = caps.iter().enumerate().map(|(i, (c, r))| pm(i as u32, "a", *c as f64, *r as f64)).collect();
        let placement: Vec<(u32, u32)> = vms.iter().enumerate()
            .filter_map(|(i, (_, _, h))| h.filter(|h| *h < pms.len()).map(|h| (i as u32, h as u32))).collect();
        let vm_list = vms.iter().enumerate().map(|(i, (c, r, _))| vm(i as u32, *c as f64, *r as f64, 1.0)).collect();
        let w = World::new(pms.clone(), vm_list, &placement, flat_forecast(&[("a", 1.0, 1.0)], 1));
        let report = check_constraints(&w.state, &w.inventory);

        let hosted: BTreeMap<u32, u32> = placement.iter().copied().collect();
        let unallocated: BTreeSet<VmId> = (0..vms.len() as u32).filter(|v| !hosted.contains_key(v)).map(VmId).collect();
        let mut overloaded = BTreeSet::new();
        for (i, (c, r)) in caps.iter().enumerate() {
            let (mut sc, mut sr) = (0, 0);
            for (v, h) in &hosted {
                if *h == i as u32 {
                    sc += vms[*v as usize].0;
                    sr += vms[*v as usize].1;
                }
            }
            if sc > *c || sr > *r {
                overloaded.insert(PmId(i as u32));
            }
        }
        prop_assert_eq!(report.unallocated, unallocated);
        prop_assert_eq!(report.overloaded, overloaded);
    }

    #[test]
    fn peak_pauser_day_matches_expensive_count(hours in proptest::collection::btree_set(0u32..24, 0..24), greens in 1u32..5) {
        let mut vms: Vec<_> = (0..greens).map(|i| vm(i, 1.0, 1.0, 1.0)).collect();
        for v in &mut vms {
            v.green = true;
        }
        let placement: Vec<(u32, u32)> = (0..greens).map(|i| (i, 0)).collect();
        let w = World::new(vec![pm(0, "a", 8.0, 16.0)], vms, &placement, flat_forecast(&[("a", 1.0, 1.0)], 1));
        let green: BTreeSet<VmId> = (0..greens).map(VmId).collect();
        let mut state = w.state.clone();
        let mut paused = vec![0usize; greens as usize];
        for h in 0..24 {
            let actions = peak_pauser(&hours, &green, at(h), &state);
            for a in &actions {
                state.apply(a, w.inventory.pms()).unwrap();
            }
            for v in &state.paused {
                paused[v.0 as usize] += 1;
            }
        }
        prop_assert!(paused.iter().all(|&p| p == hours.len()));
    }
}

#[test]
fn halving_frequency_only_charges_cpu_bound_vms_less() {
    let mut w = World::new(
        vec![arm_pm(0, "a"), arm_pm(1, "a")],
        vec![vm(0, 1.0, 1.0, 0.0), vm(1, 1.0, 1.0, 0.6), vm(2, 1.0, 1.0, 1.0)],
        &[(0, 0), (1, 0), (2, 1)],
        flat_forecast(&[("a", 1.0, 1.0)], 1),
    );
    w.pricing = PricingModel::cloud_sigma(0.8e9).arm();
    let revenue = |state: &geocloud::cloudmodel::CloudState, only: u32| {
        let mut s = state.clone();
        s.live.retain(|v| v.0 == only);
        service_revenue(&[s], &w.inventory, &w.pricing, PricingKind::Perceived, 1.0).unwrap()
    };
    let mut slow = w.state.clone();
    slow.freq.insert(PmId(0), 900 * MHZ);
    assert_eq!(revenue(&slow, 0), revenue(&w.state, 0));
    assert!(revenue(&slow, 1) < revenue(&w.state, 1));
    assert_eq!(revenue(&slow, 2), revenue(&w.state, 2));
}
