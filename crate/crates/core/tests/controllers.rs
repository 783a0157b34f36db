mod common;

use std::collections::BTreeSet;

use approx::assert_abs_diff_eq;
use common::*;
use geocloud::cloudmodel::{apply_actions, check_constraints, Action, ActionKind, PmId, Schedule, VmId};
use geocloud::controllers::{
    bcf_repair, frequency_scaling_stage, ga_create, ga_crossover, ga_mutate, ga_run, peak_pauser, BcffsController,
    ControlError, Controller, FitnessContext, FitnessWeights, GAParams, QoSParams,
};
use geocloud::economics::{PricingKind, PricingModel};
use geocloud::rng;
use proptest::prelude::*;

fn ppue_oracle(t: f64) -> f64 {
    7.1705e-5 * t * t + 0.0041 * t + 1.0743
}

fn weights(ct: f64, q: f64, up: f64, cd: f64, alloc: f64, cap: f64) -> FitnessWeights {
    FitnessWeights { w_ct: ct, w_q: q, w_up: up, w_cd: cd, w_alloc: alloc, w_cap: cap }
}

fn migrate(h: i64, v: u32, p: u32) -> Action {
    Action::migrate(at(h), VmId(v), PmId(p))
}

fn schedule(steps: i64, actions: Vec<Action>) -> Schedule {
    Schedule::new(t0(), at(steps - 1), actions).unwrap()
}

// ---- fitness ----

#[test]
fn all_unallocated_gives_full_constraint() {
    let w = World::new(
        vec![pm(0, "a", 4.0, 8.0), pm(1, "a", 4.0, 8.0)],
        vec![vm(0, 1.0, 1.0, 1.0), vm(1, 1.0, 1.0, 1.0)],
        &[],
        flat_forecast(&[("a", 40.0, 10.0)], 3),
    );
    let f = FitnessContext::new(&w.ctx(3), weights(1.0, 0.0, 0.0, 0.0, 1.0, 0.0), QoSParams::default()).unwrap();
    let b = f.evaluate(&f.empty_schedule());
    assert_eq!(b.constraint, 1.0);
    assert_eq!(b.total, 1.0);
}

#[test]
fn no_migrations_no_qos_penalty() {
    let w = World::new(
        vec![pm(0, "a", 4.0, 8.0)],
        vec![vm(0, 1.0, 1.0, 1.0)],
        &[(0, 0)],
        flat_forecast(&[("a", 40.0, 10.0)], 4),
    );
    let f = FitnessContext::new(&w.ctx(4), FitnessWeights::default(), QoSParams::default()).unwrap();
    assert_eq!(f.evaluate(&f.empty_schedule()).qos, 0.0);
}

#[test]
fn fully_utilised_cloud() {
    let w = World::new(
        vec![pm(0, "a", 4.0, 8.0), pm(1, "b", 2.0, 4.0)],
        vec![vm(0, 4.0, 8.0, 1.0), vm(1, 2.0, 4.0, 1.0)],
        &[(0, 0), (1, 1)],
        flat_forecast(&[("a", 40.0, 10.0), ("b", 70.0, 25.0)], 3),
    );
    let f = FitnessContext::new(&w.ctx(3), FitnessWeights::default(), QoSParams::default()).unwrap();
    let b = f.evaluate(&f.empty_schedule());
    assert_abs_diff_eq!(b.utilprice, 1.0, epsilon = 1e-12);
    assert_eq!(b.consolid, 0.0);
    assert_eq!(b.constraint, 0.0);
}

#[test]
fn utilprice_and_consolidation_by_hand() {
    let (ea, ta, eb, tb) = (40.0, 10.0, 80.0, 20.0);
    let w = World::new(
        vec![pm(0, "a", 4.0, 8.0), pm(1, "b", 4.0, 8.0)],
        vec![vm(0, 2.0, 4.0, 1.0)],
        &[(0, 0)],
        flat_forecast(&[("a", ea, ta), ("b", eb, tb)], 2),
    );
    let f = FitnessContext::new(&w.ctx(2), FitnessWeights::default(), QoSParams::default()).unwrap();
    let b = f.evaluate(&f.empty_schedule());
    let (ca, cb) = (ea * ppue_oracle(ta), eb * ppue_oracle(tb));
    // util 0.5 on pm0, nothing on pm1, same every step
    let up_avg = (0.5 * ca + 0.0 * cb) / 2.0;
    let up_worst = (ca + cb) / 2.0;
    assert_abs_diff_eq!(b.utilprice, up_avg / up_worst, epsilon = 1e-12);
    assert_abs_diff_eq!(b.consolid, 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(b.total, 0.4 * up_avg / up_worst + 0.1 * 0.5, epsilon = 1e-12);
}

#[test]
fn qos_penalty_is_linear_between_bounds() {
    let w = World::new(
        vec![pm(0, "a", 4.0, 8.0), pm(1, "a", 4.0, 8.0)],
        vec![vm(0, 1.0, 2.0, 1.0), vm(1, 1.0, 2.0, 1.0)],
        &[(0, 0), (1, 0)],
        flat_forecast(&[("a", 40.0, 10.0)], 4),
    );
    let f = FitnessContext::new(&w.ctx(4), FitnessWeights::default(), QoSParams::default()).unwrap();
    // vm0 moves twice in a 4 h window: 0.5/h, a third of the way from 0.25 to 1
    let s = schedule(4, vec![migrate(1, 0, 1), migrate(2, 0, 0)]);
    assert_abs_diff_eq!(f.evaluate(&s).qos, (1.0 / 3.0) / 2.0, epsilon = 1e-12);
}

#[test]
fn empty_window_is_rejected() {
    let w = World::new(vec![pm(0, "a", 4.0, 8.0)], vec![], &[], flat_forecast(&[("a", 40.0, 10.0)], 1));
    assert!(matches!(
        FitnessContext::new(&w.ctx(0), FitnessWeights::default(), QoSParams::default()),
        Err(ControlError::Parameter(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn fitness_components_stay_in_unit_interval(
        sizes in proptest::collection::vec((1u32..4, 1u32..8), 1..8),
        hosts in proptest::collection::vec(proptest::option::of(0u32..3), 8),
        moves in proptest::collection::vec((0i64..4, 0u32..8, 0u32..3), 0..12),
        price in proptest::collection::vec(-20.0f64..150.0, 4),
    ) {
        let vms: Vec<_> = sizes.iter().enumerate().map(|(i, (c, r))| vm(i as u32, *c as f64, *r as f64, 0.5)).collect();
        let n = vms.len() as u32;
        let placement: Vec<(u32, u32)> = hosts.iter().take(vms.len()).enumerate()
            .filter_map(|(i, h)| h.map(|p| (i as u32, p))).collect();
        let w = World::new(
            vec![pm(0, "a", 4.0, 8.0), pm(1, "b", 8.0, 16.0), pm(2, "b", 2.0, 4.0)],
            vms,
            &placement,
            forecast(&[("a", price.clone(), vec![5.0; 4]), ("b", price.iter().rev().copied().collect(), vec![30.0; 4])]),
        );
        let f = FitnessContext::new(&w.ctx(4), FitnessWeights::default(), QoSParams::default()).unwrap();
        let s = schedule(4, moves.into_iter().filter(|m| m.1 < n).map(|(h, v, p)| migrate(h, v, p)).collect());
        let b = f.evaluate(&s);
        for c in [b.constraint, b.qos, b.utilprice, b.consolid, b.total] {
            prop_assert!((0.0..=1.0).contains(&c), "{b:?}");
        }
    }
}

// ---- GA operators ----

fn ga_world() -> World {
    World::new(
        vec![pm(0, "a", 8.0, 16.0), pm(1, "b", 8.0, 16.0), pm(2, "b", 8.0, 16.0)],
        (0..4).map(|i| vm(i, 1.0, 2.0, 1.0)).collect(),
        &[(0, 0), (1, 0), (2, 1), (3, 2)],
        flat_forecast(&[("a", 30.0, 5.0), ("b", 60.0, 20.0)], 6),
    )
}

#[test]
fn create_respects_migration_bounds() {
    let w = ga_world();
    let f = FitnessContext::new(&w.ctx(6), FitnessWeights::default(), QoSParams::default()).unwrap();
    let mut r = rng::stream(1);
    let none = GAParams { min_migr: 0, max_migr: Some(0), ..Default::default() };
    assert!(ga_create(&f, &none, &mut r).is_empty());
    let five = GAParams { min_migr: 5, max_migr: Some(5), ..Default::default() };
    for _ in 0..20 {
        let s = ga_create(&f, &five, &mut r);
        assert_eq!(s.len(), 5);
        assert!(s.actions().iter().all(|a| a.time >= f.start() && a.time <= f.end()));
    }
    let a = ga_create(&f, &five, &mut rng::stream(9));
    assert_eq!(a, ga_create(&f, &five, &mut rng::stream(9)));
}

#[test]
fn crossover_boundaries() {
    let w = ga_world();
    let f = FitnessContext::new(&w.ctx(6), FitnessWeights::default(), QoSParams::default()).unwrap();
    let p = GAParams { min_migr: 3, max_migr: Some(6), ..Default::default() };
    let mut r = rng::stream(2);
    let s1 = ga_create(&f, &p, &mut r);
    let s2 = ga_create(&f, &p, &mut r);
    assert_eq!(ga_crossover(&s1, &s1, &f, &mut r).unwrap(), s1);
    for _ in 0..20 {
        let child = ga_crossover(&f.empty_schedule(), &s2, &f, &mut r).unwrap();
        let tail: Vec<_> = s2.actions().iter().rev().take(child.len()).rev().copied().collect();
        assert_eq!(child.actions(), &tail[..]);
    }

    // one-step window: t_r is always the window start, so the child is s2
    let f1 = FitnessContext::new(&w.ctx(1), FitnessWeights::default(), QoSParams::default()).unwrap();
    let a = ga_create(&f1, &p, &mut r);
    let b = ga_create(&f1, &p, &mut r);
    assert_eq!(ga_crossover(&a, &b, &f1, &mut r).unwrap(), b);

    let other = Schedule::empty(at(1), at(6));
    assert!(matches!(ga_crossover(&s1, &other, &f, &mut r), Err(ControlError::Parameter(_))));
}

#[test]
fn mutation_cardinality_and_determinism() {
    let w = ga_world();
    let f = FitnessContext::new(&w.ctx(6), FitnessWeights::default(), QoSParams::default()).unwrap();
    let mut r = rng::stream(3);
    assert_eq!(ga_mutate(&f.empty_schedule(), &f, &mut r).len(), 1);
    let s = ga_create(&f, &GAParams { min_migr: 4, max_migr: Some(4), ..Default::default() }, &mut r);
    for _ in 0..10 {
        assert_eq!(ga_mutate(&s, &f, &mut r).len(), 4);
    }
    assert_eq!(ga_mutate(&s, &f, &mut rng::stream(5)), ga_mutate(&s, &f, &mut rng::stream(5)));
}

#[test]
fn zero_generations_return_initial_best() {
    let w = ga_world();
    let f = FitnessContext::new(&w.ctx(6), FitnessWeights::default(), QoSParams::default()).unwrap();
    let p = GAParams { pop: 12, gen: 0, seed: 4, ..Default::default() };
    let out = ga_run(&f, &p, None).unwrap();
    assert_eq!(out.population.len(), 12);
    let fits: Vec<f64> = out.population.iter().map(|s| f.fitness(s)).collect();
    assert_eq!(out.best_fitness, fits.iter().copied().fold(f64::INFINITY, f64::min));
    assert_eq!(out.best_fitness, f.fitness(&out.best));
}

#[test]
fn evolution_never_loses_the_initial_best() {
    let w = ga_world();
    let f = FitnessContext::new(&w.ctx(6), FitnessWeights::default(), QoSParams::default()).unwrap();
    for seed in 0..5 {
        let p0 = GAParams { pop: 16, gen: 0, seed, ..Default::default() };
        let p1 = GAParams { gen: 15, ..p0 };
        let initial = ga_run(&f, &p0, None).unwrap();
        let evolved = ga_run(&f, &p1, None).unwrap();
        assert!(evolved.best_fitness <= initial.best_fitness);
        let again = ga_run(&f, &p1, None).unwrap();
        assert_eq!((evolved.best, evolved.best_fitness), (again.best, again.best_fitness));
    }
}

#[test]
fn planted_carryover_survives() {
    let pms: Vec<_> = (0..6).map(|i| pm(i, if i < 3 { "a" } else { "b" }, 8.0, 16.0)).collect();
    let vms: Vec<_> = (0..6).map(|i| vm(i, 1.0, 2.0, 1.0)).collect();
    let w = World::new(pms, vms, &[(0, 0), (2, 1), (3, 2), (4, 3), (5, 4)], flat_forecast(&[("a", 30.0, 5.0), ("b", 60.0, 20.0)], 12));
    let f = FitnessContext::new(&w.ctx(12), weights(1.0, 0.0, 0.0, 0.0, 0.4, 0.6), QoSParams::default()).unwrap();
    let planted = schedule(12, vec![migrate(0, 1, 5)]);
    assert_eq!(f.fitness(&planted), 0.0);
    let p = GAParams { fw_s: 12 * HOUR, pop: 10, gen: 8, min_migr: 0, max_migr: Some(2), seed: 11, ..Default::default() };
    let out = ga_run(&f, &p, Some(&[planted.clone()])).unwrap();
    assert_eq!(out.best_fitness, 0.0);
    assert!(out.population.contains(&planted));
}

/// Every schedule of at most two migrations on the window.
fn enumerate(f: &FitnessContext, vms: u32, pms: u32) -> Vec<Schedule> {
    let steps = f.steps() as i64;
    let mut single = Vec::new();
    for h in 0..steps {
        for v in 0..vms {
            for p in 0..pms {
                single.push(migrate(h, v, p));
            }
        }
    }
    let mut out = vec![schedule(steps, vec![])];
    for (i, a) in single.iter().enumerate() {
        out.push(schedule(steps, vec![*a]));
        for b in &single[i..] {
            out.push(schedule(steps, vec![*a, *b]));
        }
    }
    out
}

#[test]
fn ga_finds_the_cheaper_location_on_a_toy() {
    let w = World::new(
        vec![pm(0, "dear", 4.0, 8.0), pm(1, "cheap", 4.0, 8.0)],
        vec![vm(0, 1.0, 2.0, 1.0), vm(1, 1.0, 2.0, 1.0)],
        &[(0, 0), (1, 0)],
        flat_forecast(&[("dear", 100.0, 20.0), ("cheap", 20.0, 20.0)], 2),
    );
    let qos = QoSParams { r_mig_min: 1.0, r_mig_max: 2.0 };
    let f = FitnessContext::new(&w.ctx(2), FitnessWeights::default(), qos).unwrap();
    let p = GAParams { fw_s: 2 * HOUR, max_migr: Some(2), seed: 7, ..Default::default() };
    let out = ga_run(&f, &p, None).unwrap();
    let idle = f.fitness(&f.empty_schedule());
    assert!(out.best_fitness < idle);
    let all: Vec<f64> = enumerate(&f, 2, 2).iter().map(|s| f.fitness(s)).collect();
    let best = all.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(out.best_fitness <= best + 1e-12, "{} vs {best}", out.best_fitness);
}

// ---- BCF repair ----

#[test]
fn feasible_schedule_is_left_alone() {
    let w = World::new(
        vec![pm(0, "a", 4.0, 8.0), pm(1, "a", 4.0, 8.0)],
        vec![vm(0, 2.0, 4.0, 1.0), vm(1, 2.0, 4.0, 1.0)],
        &[(0, 0), (1, 1)],
        flat_forecast(&[("a", 40.0, 10.0)], 3),
    );
    let s = schedule(3, vec![migrate(1, 1, 0)]);
    assert_eq!(bcf_repair(&s, &w.ctx(3), 0.25).unwrap(), s);
}

#[test]
fn unallocated_vm_joins_the_active_host() {
    let w = World::new(
        vec![pm(0, "a", 4.0, 8.0), pm(1, "a", 16.0, 32.0)],
        vec![vm(0, 2.0, 4.0, 1.0), vm(1, 1.0, 2.0, 1.0)],
        &[(0, 0)],
        flat_forecast(&[("a", 40.0, 10.0)], 2),
    );
    let out = bcf_repair(&schedule(2, vec![]), &w.ctx(2), 0.25).unwrap();
    assert_eq!(out.actions(), &[migrate(0, 1, 0)]);
}

#[test]
fn cheaper_location_wins_a_tie() {
    // "warm" has the lower price but its cooling overhead makes it dearer
    let (e_cold, t_cold, e_warm, t_warm) = (50.0, 0.0, 48.0, 35.0);
    assert!(e_cold * ppue_oracle(t_cold) < e_warm * ppue_oracle(t_warm));
    let fc = flat_forecast(&[("cold", e_cold, t_cold), ("warm", e_warm, t_warm)], 1);
    for (first, second) in [("warm", "cold"), ("cold", "warm")] {
        let w = World::new(vec![pm(0, first, 8.0, 16.0), pm(1, second, 8.0, 16.0)], vec![vm(0, 2.0, 4.0, 1.0)], &[], fc.clone());
        let cold = if first == "cold" { 0 } else { 1 };
        let out = bcf_repair(&schedule(1, vec![]), &w.ctx(1), 0.25).unwrap();
        assert_eq!(out.actions(), &[migrate(0, 0, cold)]);
    }
    // same with two active hosts of equal free capacity
    let w = World::new(
        vec![pm(0, "warm", 8.0, 16.0), pm(1, "cold", 8.0, 16.0)],
        vec![vm(0, 4.0, 8.0, 1.0), vm(1, 4.0, 8.0, 1.0), vm(2, 1.0, 2.0, 1.0)],
        &[(0, 0), (1, 1)],
        fc,
    );
    let out = bcf_repair(&schedule(1, vec![]), &w.ctx(1), 0.25).unwrap();
    assert_eq!(out.actions(), &[migrate(0, 2, 1)]);
}

#[test]
fn underutilised_host_is_emptied() {
    let w = World::new(
        vec![pm(0, "a", 4.0, 8.0), pm(1, "a", 16.0, 32.0)],
        vec![vm(0, 2.0, 4.0, 1.0), vm(1, 1.0, 2.0, 1.0)],
        &[(0, 0), (1, 1)],
        flat_forecast(&[("a", 40.0, 10.0)], 1),
    );
    let out = bcf_repair(&schedule(1, vec![]), &w.ctx(1), 0.25).unwrap();
    assert_eq!(out.actions(), &[migrate(0, 1, 0)]);
}

#[test]
fn insufficient_capacity_fails_with_the_vm() {
    let w = World::new(
        vec![pm(0, "a", 4.0, 8.0)],
        vec![vm(0, 3.0, 4.0, 1.0), vm(1, 3.0, 4.0, 1.0)],
        &[(0, 0)],
        flat_forecast(&[("a", 40.0, 10.0)], 1),
    );
    match bcf_repair(&schedule(1, vec![]), &w.ctx(1), 0.25) {
        Err(ControlError::RepairFailed(v)) => assert_eq!(v, vec![VmId(1)]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn repair_output_is_feasible_at_every_step() {
    let w = ga_world();
    let f = FitnessContext::new(&w.ctx(6), FitnessWeights::default(), QoSParams::default()).unwrap();
    let mut r = rng::stream(8);
    let p = GAParams { min_migr: 4, max_migr: Some(10), ..Default::default() };
    for _ in 0..30 {
        let s = ga_create(&f, &p, &mut r);
        let fixed = bcf_repair(&s, &w.ctx(6), 0.25).unwrap();
        let mut state = w.state.clone();
        for h in 0..6 {
            let due: Vec<Action> = fixed.actions_at(at(h)).copied().collect();
            state = apply_actions(&state, at(h), &due, w.inventory.pms()).unwrap();
            assert!(check_constraints(&state, &w.inventory).is_clean());
        }
    }
}

// ---- frequency scaling ----

fn arm_world(betas: &[&[f64]], locs: &[(&str, f64, f64)]) -> World {
    let mut pms = Vec::new();
    let mut vms = Vec::new();
    let mut placement = Vec::new();
    for (i, bs) in betas.iter().enumerate() {
        pms.push(arm_pm(i as u32, locs[i].0));
        for b in bs.iter() {
            let id = vms.len() as u32;
            vms.push(vm(id, 1.0, 2.0, *b));
            placement.push((id, i as u32));
        }
    }
    let mut w = World::new(pms, vms, &placement, flat_forecast(locs, 1));
    w.pricing = PricingModel::cloud_sigma(0.8e9).arm();
    w.kind = PricingKind::Perceived;
    w
}

#[test]
fn io_bound_host_drops_to_min_frequency() {
    let w = arm_world(&[&[0.0, 0.0]], &[("a", 60.0, 20.0)]);
    let out = frequency_scaling_stage(&w.ctx(1), &w.state).unwrap();
    assert_eq!(out.chosen.get(&PmId(0)), Some(&(800 * MHZ)));
    assert_eq!(out.steps.len(), 10);
    assert!(out.steps.iter().all(|s| s.accepted && s.revenue_loss == 0.0 && s.en_savings > 0.0));
    assert_eq!(out.actions, vec![Action::new(t0(), ActionKind::SetFreq { pm: PmId(0), hz: 800 * MHZ })]);
}

#[test]
fn cpu_bound_host_stays_at_max_when_losses_dominate() {
    let w = arm_world(&[&[1.0, 1.0]], &[("a", 10.0, 20.0)]);
    let out = frequency_scaling_stage(&w.ctx(1), &w.state).unwrap();
    assert!(out.actions.is_empty() && out.chosen.is_empty());
    assert_eq!(out.steps.len(), 1);
    assert!(out.steps[0].revenue_loss > out.steps[0].en_savings);
}

#[test]
fn failing_host_prunes_cheaper_colder_more_cpu_bound_hosts() {
    let pruned = arm_world(&[&[0.9, 0.9], &[1.0, 1.0]], &[("hot", 5.0, 30.0), ("cool", 2.0, 10.0)]);
    let out = frequency_scaling_stage(&pruned.ctx(1), &pruned.state).unwrap();
    assert_eq!(out.steps.len(), 1);
    assert!(out.steps[0].pm == PmId(0) && !out.steps[0].accepted);

    // equal mean beta never prunes
    let kept = arm_world(&[&[0.9, 0.9], &[0.9, 0.9]], &[("hot", 5.0, 30.0), ("cool", 2.0, 10.0)]);
    let out = frequency_scaling_stage(&kept.ctx(1), &kept.state).unwrap();
    assert!(out.steps.iter().any(|s| s.pm == PmId(1)));
}

#[test]
fn bcffs_places_a_new_vm_with_a_single_migration() {
    let w = World::new(vec![pm(0, "a", 8.0, 16.0), pm(1, "b", 8.0, 16.0)], vec![vm(0, 2.0, 4.0, 1.0)], &[], flat_forecast(&[("a", 30.0, 10.0), ("b", 40.0, 10.0)], 1));
    let d = BcffsController { underutil_threshold: 0.25 }.decide(&w.ctx(1)).unwrap();
    assert_eq!(d.actions, vec![migrate(0, 0, 0)]);
}

#[test]
fn bcffs_leaves_losing_hosts_alone() {
    let w = arm_world(&[&[1.0, 1.0], &[1.0, 1.0]], &[("a", 4.0, 20.0), ("b", 5.0, 15.0)]);
    let d = BcffsController { underutil_threshold: 0.25 }.decide(&w.ctx(1)).unwrap();
    assert!(d.actions.is_empty(), "{:?}", d.actions);
}

// ---- peak pauser ----

#[test]
fn peak_pauser_pauses_and_resumes() {
    let mut vms: Vec<_> = (0..3).map(|i| vm(i, 1.0, 2.0, 1.0)).collect();
    for v in &mut vms {
        v.green = true;
    }
    let w = World::new(vec![pm(0, "a", 8.0, 16.0)], vms, &[(0, 0), (1, 0), (2, 0)], flat_forecast(&[("a", 1.0, 1.0)], 1));
    let expensive = BTreeSet::from([13, 14, 15, 16]);
    let green: BTreeSet<VmId> = (0..3).map(VmId).collect();

    assert!(peak_pauser(&expensive, &green, at(3), &w.state).is_empty());
    assert_eq!(peak_pauser(&expensive, &green, at(13), &w.state).len(), 3);

    let mut state = w.state.clone();
    let mut paused_hours = [0; 3];
    for h in 0..24 {
        let actions = peak_pauser(&expensive, &green, at(h), &state);
        state = apply_actions(&state, at(h), &actions, w.inventory.pms()).unwrap();
        assert!(peak_pauser(&expensive, &green, at(h), &state).is_empty());
        for v in 0..3 {
            paused_hours[v] += state.paused.contains(&VmId(v as u32)) as usize;
        }
    }
    assert_eq!(paused_hours, [4, 4, 4]);
}
