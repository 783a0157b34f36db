use std::collections::{BTreeMap, BTreeSet};

use chrono::Duration;
use serde::{Deserialize, Serialize};

use super::config::{GridSpec, InfrastructureSpec, ScenarioConfig, Seeds, TraceSpec, WorkloadSpec, SCHEMA_VERSION};
use super::generate::{generate_infrastructure, generate_workload, synthesize_traces, InfraParams, WorkloadParams};
use super::SimError;
use crate::cloudmodel::{
    check_constraints, host_power, migration_cost, ppue, utilization, Action, ActionKind, CloudState, Effect,
    Inventory, PmId, PowerModel, Vm, VmId,
};
use crate::controllers::{
    BcfController, BcffsController, BfdController, ControlContext, Controller, ControllerId, DecisionInfo,
    GaHybridController, PeakPauserController, WindowForecast,
};
use crate::economics::{integrate_cost, vm_price_at, CostReport, J_PER_KWH};
use crate::geotemporal::{load_traces, ForecastErrorSpec, TimeSeries, Timestamp, TraceKind, TraceSet};
use crate::rng;

/// A validated configuration with its generated inventory and traces.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub inventory: Inventory,
    /// True traces, including any history before the grid start.
    pub traces: TraceSet,
    /// Power models with their noise seeds bound to the run's seeds.
    pub power_models: BTreeMap<String, PowerModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub schema: u32,
    pub version: String,
    pub controller: ControllerId,
    pub start: Timestamp,
    pub end: Timestamp,
    pub period_s: i64,
    pub steps: usize,
    pub window_steps: usize,
    pub locations: Vec<String>,
    pub pms: usize,
    pub vms: usize,
    pub seeds: Seeds,
    pub rng: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSource {
    /// Boot and delete requests from the workload.
    Environment,
    Controller,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedAction {
    pub step: usize,
    pub source: ActionSource,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub step: usize,
    pub time: Timestamp,
    pub info: DecisionInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigrationEvent {
    pub step: usize,
    pub time: Timestamp,
    pub vm: VmId,
    pub from: PmId,
    pub to: PmId,
    pub rounds: u32,
    pub energy_kwh: f64,
    /// Energy priced at the mean of the two locations' true prices.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauseInterval {
    pub vm: VmId,
    pub start: Timestamp,
    pub end: Timestamp,
}

impl PauseInterval {
    pub fn duration_s(&self) -> f64 {
        (self.end - self.start).num_milliseconds() as f64 / 1000.0
    }
}

/// Observed service interval of a VM: from boot delivery to its delete
/// or the end of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lifetime {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Lifetime {
    pub fn duration_s(&self) -> f64 {
        (self.end - self.start).num_milliseconds() as f64 / 1000.0
    }
}

/// Aggregates of one grid step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: usize,
    pub time: Timestamp,
    pub live_vms: usize,
    pub allocated_vms: usize,
    pub paused_vms: usize,
    pub active_pms: usize,
    /// Mean IT power over the step, W.
    pub it_power: f64,
    /// Mean IT plus cooling power over the step, W.
    pub total_power: f64,
    pub mean_price: f64,
    pub migrations: usize,
    pub revenue: f64,
    pub unallocated: usize,
    pub overloaded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub meta: RunMeta,
    pub cost_report: CostReport,
    pub actions: Vec<LoggedAction>,
    pub decisions: Vec<DecisionRecord>,
    /// Mean IT power per step, W.
    pub power: BTreeMap<PmId, TimeSeries>,
    /// Mean running utilisation per step.
    pub utilization: BTreeMap<PmId, TimeSeries>,
    pub migrations: Vec<MigrationEvent>,
    pub pauses: Vec<PauseInterval>,
    pub lifetimes: BTreeMap<VmId, Lifetime>,
    pub steps: Vec<StepMetrics>,
    /// Unavailability charged per migration, s.
    pub downtime_per_migration: f64,
}

impl SimulationResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("result serializes")
    }
}

fn cfg_err(msg: impl Into<String>) -> SimError {
    SimError::Config(msg.into())
}

fn load_or_synthesize(config: &ScenarioConfig, window_s: i64) -> Result<TraceSet, SimError> {
    match &config.traces {
        TraceSpec::Files { electricity, temperature } => {
            for p in electricity.values().chain(temperature.values()) {
                if !p.exists() {
                    return Err(cfg_err(format!("traces: file not found: {}", p.display())));
                }
            }
            let e = load_traces(electricity, TraceKind::Electricity)?;
            let t = load_traces(temperature, TraceKind::Temperature)?;
            Ok(TraceSet::new(e, t)?)
        }
        TraceSpec::Synthetic(spec) => synthesize_traces(spec, &config.grid, window_s, config.seeds.traces),
    }
}

fn window_seconds(config: &ScenarioConfig) -> i64 {
    match config.controller.id {
        ControllerId::GaHybrid => config.controller.ga.fw_s,
        _ => config.grid.period_s,
    }
}

/// Validates `config` and builds the inventory and traces it describes.
pub fn prepare(config: &ScenarioConfig) -> Result<Scenario, SimError> {
    config.validate()?;
    let grid = config.grid;
    let traces = load_or_synthesize(config, window_seconds(config))?;
    let locations: Vec<String> = traces.locations().map(str::to_string).collect();
    for loc in &locations {
        for (kind, s) in [("electricity", traces.electricity(loc)), ("temperature", traces.temperature(loc))] {
            let s = s.ok_or_else(|| cfg_err(format!("traces.{kind}: no trace for {loc:?}")))?;
            let last = grid.time(grid.steps() - 1);
            if s.start() > grid.start || s.value_at(last).is_none() {
                return Err(cfg_err(format!(
                    "traces.{kind}.{loc}: trace [{}, {}) does not cover the run [{}, {})",
                    s.start(),
                    s.end(),
                    grid.start,
                    grid.end()
                )));
            }
        }
    }

    let pms = match &config.infrastructure {
        InfrastructureSpec::Generated { pms, cpu, ram, power_model, freq, cores } => {
            let p = InfraParams { pms: *pms, cpu: *cpu, ram: *ram, power_model, freq: *freq, cores: *cores };
            generate_infrastructure(&p, &locations, config.seeds.infrastructure)?
        }
        InfrastructureSpec::Explicit { pms } => pms.clone(),
    };
    for pm in &pms {
        if !locations.contains(&pm.location) {
            return Err(cfg_err(format!("infrastructure: {} is in {:?}, which has no traces", pm.id, pm.location)));
        }
        if !config.power_models.contains_key(&pm.power_model) {
            return Err(cfg_err(format!("infrastructure: {} uses unknown power model {:?}", pm.id, pm.power_model)));
        }
        if (pm.freq.min_hz as f64) < config.pricing.model.f_base {
            return Err(cfg_err(format!(
                "pricing.model.f_base: {} Hz exceeds the minimum frequency of {}",
                config.pricing.model.f_base, pm.id
            )));
        }
    }
    let vms = match &config.workload {
        WorkloadSpec::Generated { vms, cpu, ram, beta, green_fraction } => {
            let p = WorkloadParams { vms: *vms, cpu: *cpu, ram: *ram, beta: *beta, green_fraction: *green_fraction };
            generate_workload(&p, &grid, config.seeds.workload)?
        }
        WorkloadSpec::Explicit { vms } => vms.clone(),
    };
    let inventory =
        Inventory::new(pms, vms, config.resource_weights.clone()).map_err(|e| cfg_err(format!("inventory: {e}")))?;

    let power_models = config
        .power_models
        .iter()
        .map(|(name, m)| {
            let mut m = m.clone();
            if let PowerModel::Linear(lin) = &mut m {
                lin.seed = rng::derive(config.seeds.power_noise, &[rng::label(name), lin.seed]);
            }
            (name.clone(), m)
        })
        .collect();
    Ok(Scenario { config: config.clone(), inventory, traces, power_models })
}

/// Price history strictly before the grid start, when at least a day of it
/// exists; the whole trace otherwise.
fn price_history(traces: &TraceSet, start: Timestamp) -> Result<TraceSet, SimError> {
    let cut = |m: &BTreeMap<String, TimeSeries>| -> BTreeMap<String, TimeSeries> {
        m.iter()
            .map(|(loc, s)| {
                let n = s.index_of(start).unwrap_or(0);
                let hist = s.slice(0, n);
                let keep = if hist.span_s() >= 86_400 { hist } else { s.clone() };
                (loc.clone(), keep)
            })
            .collect()
    };
    Ok(TraceSet::new(cut(traces.series(TraceKind::Electricity)), cut(traces.series(TraceKind::Temperature)))?)
}

/// Instantiates the configured controller.
pub fn build_controller(scenario: &Scenario) -> Result<Box<dyn Controller>, SimError> {
    let cfg = &scenario.config;
    let spec = &cfg.controller;
    let thr = spec.underutil_threshold;
    Ok(match spec.id {
        ControllerId::Bfd => Box::new(BfdController { underload_threshold: thr }),
        ControllerId::PeakPauser => {
            let history = price_history(&scenario.traces, cfg.grid.start)?;
            let c = PeakPauserController::from_history(&history, spec.downtime_ratio, thr)
                .map_err(|e| cfg_err(format!("controller: {e}")))?;
            Box::new(c)
        }
        ControllerId::GaHybrid => {
            let mut params = spec.ga;
            params.seed = rng::derive(cfg.seeds.controller, &[params.seed]);
            params.validate(cfg.grid.period_s).map_err(|e| cfg_err(format!("controller.ga: {e}")))?;
            Box::new(GaHybridController::new(params, spec.weights, spec.qos, thr))
        }
        ControllerId::Bcf => Box::new(BcfController { underutil_threshold: thr }),
        ControllerId::Bcffs => Box::new(BcffsController { underutil_threshold: thr }),
    })
}

/// Builds the scenario and runs it with its configured controller.
pub fn simulate(config: &ScenarioConfig) -> Result<SimulationResult, SimError> {
    let scenario = prepare(config)?;
    let mut controller = build_controller(&scenario)?;
    simulate_with(&scenario, controller.as_mut())
}

fn true_value(s: Option<&TimeSeries>, t: Timestamp) -> f64 {
    let s = s.expect("locations checked in prepare");
    s.value_at(t).unwrap_or_else(|| *s.values().last().expect("non-empty trace"))
}

fn forecast_spec(base: &ForecastErrorSpec, seed: u64, step: usize) -> ForecastErrorSpec {
    ForecastErrorSpec { sigma_pred: base.sigma_pred, seed: rng::derive(seed, &[base.seed, step as u64]) }
}

/// Runs the discrete-time loop with an explicit controller.
pub fn simulate_with(scenario: &Scenario, controller: &mut dyn Controller) -> Result<SimulationResult, SimError> {
    let cfg = &scenario.config;
    let inv = &scenario.inventory;
    let traces = &scenario.traces;
    let grid: GridSpec = cfg.grid;
    let n = grid.steps();
    let period = grid.period_s;
    let pms = inv.pms();
    let weights = inv.weights();
    let window = controller.window_steps(period);

    let mut state = CloudState::empty(grid.start, pms);
    let mut pending: BTreeSet<VmId> = inv.vms().keys().copied().collect();
    let mut actions_log = Vec::new();
    let mut decisions = Vec::new();
    let mut migrations = Vec::new();
    let mut pauses = Vec::new();
    let mut paused_since: BTreeMap<VmId, Timestamp> = BTreeMap::new();
    let mut lifetimes: BTreeMap<VmId, Lifetime> = BTreeMap::new();
    let mut power: BTreeMap<PmId, Vec<f64>> = pms.iter().map(|p| (p.id, Vec::with_capacity(n))).collect();
    let mut cooled: BTreeMap<PmId, Vec<f64>> = power.clone();
    let mut util: BTreeMap<PmId, Vec<f64>> = power.clone();
    let mut steps = Vec::with_capacity(n);
    let mut revenue_total = 0.0;
    let mut mig_energy = 0.0;
    let mut mig_cost = 0.0;

    for k in 0..n {
        let t = grid.time(k);
        state.time = t;

        // Workload events due by now.
        let mut env = Vec::new();
        for vm in state.live.iter() {
            if inv.vm(*vm).and_then(|v| v.delete_time).is_some_and(|d| d <= t) {
                env.push(Action::new(t, ActionKind::Delete { vm: *vm }));
            }
        }
        let due: Vec<VmId> = pending
            .iter()
            .filter(|id| inv.vm(**id).is_some_and(|v| v.boot_time <= t))
            .copied()
            .collect();
        for id in due {
            pending.remove(&id);
            let vm = inv.vm(id).expect("known VM");
            if vm.delete_time.is_some_and(|d| d <= t) {
                log::debug!("{id} ends before it is delivered; skipped");
                continue;
            }
            env.push(Action::new(t, ActionKind::Boot { vm: id }));
        }
        for a in env {
            state.apply(&a, pms).map_err(|source| SimError::Action { step: k, time: t, source })?;
            match a.kind {
                ActionKind::Boot { vm } => {
                    lifetimes.insert(vm, Lifetime { start: t, end: grid.end() });
                }
                ActionKind::Delete { vm } => {
                    let end = inv.vm(vm).and_then(|v| v.delete_time).unwrap_or(t);
                    if let Some(l) = lifetimes.get_mut(&vm) {
                        l.end = end;
                    }
                    if let Some(start) = paused_since.remove(&vm) {
                        pauses.push(PauseInterval { vm, start, end });
                    }
                }
                _ => {}
            }
            actions_log.push(LoggedAction { step: k, source: ActionSource::Environment, action: a });
        }

        // Controller on the forecast window.
        let ctl_err = |source| SimError::Controller { step: k, time: t, source };
        let exact = WindowForecast::from_traces(traces, t, period, window).map_err(ctl_err)?;
        let forecast = exact.perturbed(
            &forecast_spec(&cfg.forecast.price_error, cfg.seeds.forecast, k),
            &forecast_spec(&cfg.forecast.temperature_error, cfg.seeds.forecast, k),
        );
        let ctx = ControlContext {
            now: t,
            period_s: period,
            window_steps: window,
            state: &state,
            inventory: inv,
            forecast: &forecast,
            power_models: &scenario.power_models,
            pricing: &cfg.pricing.model,
            pricing_kind: cfg.pricing.kind,
        };
        let decision = controller.decide(&ctx).map_err(ctl_err)?;
        if decision.info != DecisionInfo::None {
            decisions.push(DecisionRecord { step: k, time: t, info: decision.info });
        }

        let mut step_migrations = 0;
        for a in decision.actions {
            let effect = state.apply(&a, pms).map_err(|source| SimError::Action { step: k, time: t, source })?;
            match (effect, a.kind) {
                (Effect::Migrated { from, to }, ActionKind::Migrate { vm, .. }) => {
                    let spec = inv.vm(vm).expect("known VM");
                    let c = migration_cost(&cfg.migration, spec.mem_bits())
                        .map_err(|source| SimError::Action { step: k, time: t, source })?;
                    let price = |pm: PmId| true_value(traces.electricity(&inv.pm(pm).expect("known PM").location), t);
                    let energy_kwh = c.energy_j / J_PER_KWH;
                    let cost = energy_kwh * (price(from) + price(to)) / 2.0 / 1000.0;
                    mig_energy += energy_kwh;
                    mig_cost += cost;
                    step_migrations += 1;
                    migrations.push(MigrationEvent { step: k, time: t, vm, from, to, rounds: c.rounds, energy_kwh, cost });
                }
                (Effect::Paused, ActionKind::Pause { vm }) => {
                    paused_since.insert(vm, t);
                }
                (Effect::Unpaused, ActionKind::Unpause { vm }) => {
                    if let Some(start) = paused_since.remove(&vm) {
                        pauses.push(PauseInterval { vm, start, end: t });
                    }
                }
                _ => {}
            }
            actions_log.push(LoggedAction { step: k, source: ActionSource::Controller, action: a });
        }

        let report = check_constraints(&state, inv);
        if !report.is_clean() {
            log::warn!(
                "step {k}: {} unallocated VMs, {} overloaded PMs",
                report.unallocated.len(),
                report.overloaded.len()
            );
        }

        // Accrue over [t, t + period), split at deletes inside the step.
        let next = t + Duration::seconds(period);
        let mut cuts: Vec<Timestamp> = state
            .live
            .iter()
            .filter_map(|v| inv.vm(*v).and_then(|v| v.delete_time))
            .filter(|d| *d > t && *d < next)
            .collect();
        cuts.push(t);
        cuts.push(next);
        cuts.sort();
        cuts.dedup();

        let mut step_revenue = 0.0;
        let (mut it_sum, mut total_sum) = (0.0, 0.0);
        for pm in pms {
            let model = scenario.power_models.get(&pm.power_model).expect("checked in prepare");
            let freq = state.frequency(pm);
            let hosted: Vec<&Vm> = state.hosted(pm.id).filter_map(|v| inv.vm(v)).collect();
            let (mut energy_ws, mut util_s) = (0.0, 0.0);
            for w in cuts.windows(2) {
                let (a, b) = (w[0], w[1]);
                let d = (b - a).num_milliseconds() as f64 / 1000.0;
                let present: Vec<&Vm> = hosted.iter().copied().filter(|v| v.delete_time.is_none_or(|x| x > a)).collect();
                let running: Vec<&Vm> = present.iter().copied().filter(|v| !state.paused.contains(&v.id)).collect();
                energy_ws += host_power(pm, model, &running, weights, freq, t)? * d;
                util_s += utilization(pm, running.iter().copied(), weights)? * d;
                let billed = if cfg.pricing.bill_paused { &present } else { &running };
                for vm in billed {
                    step_revenue += vm_price_at(&cfg.pricing.model, vm, freq as f64, cfg.pricing.kind, pm.freq.max_hz as f64)?
                        * d
                        / 3600.0;
                }
            }
            let mean_power = energy_ws / period as f64;
            let with_cooling = mean_power * ppue(true_value(traces.temperature(&pm.location), t));
            it_sum += mean_power;
            total_sum += with_cooling;
            power.get_mut(&pm.id).expect("every PM").push(mean_power);
            cooled.get_mut(&pm.id).expect("every PM").push(with_cooling);
            util.get_mut(&pm.id).expect("every PM").push(util_s / period as f64);
        }
        revenue_total += step_revenue;

        let locs: Vec<&str> = traces.locations().collect();
        let mean_price =
            locs.iter().map(|l| true_value(traces.electricity(l), t)).sum::<f64>() / locs.len().max(1) as f64;
        steps.push(StepMetrics {
            step: k,
            time: t,
            live_vms: state.live.len(),
            allocated_vms: state.host_map().len(),
            paused_vms: state.paused.len(),
            active_pms: pms.iter().filter(|p| state.is_active(p.id)).count(),
            it_power: it_sum,
            total_power: total_sum,
            mean_price,
            migrations: step_migrations,
            revenue: step_revenue,
            unallocated: report.unallocated.len(),
            overloaded: report.overloaded.len(),
        });
    }

    for (vm, start) in paused_since {
        pauses.push(PauseInterval { vm, start, end: grid.end() });
    }
    pauses.sort_by_key(|p| (p.start, p.vm));

    let series = |m: BTreeMap<PmId, Vec<f64>>| -> Result<BTreeMap<PmId, TimeSeries>, SimError> {
        m.into_iter().map(|(pm, v)| Ok((pm, TimeSeries::new(grid.start, period, v)?))).collect()
    };
    let power = series(power)?;
    let cooled = series(cooled)?;
    let util = series(util)?;

    let mut report = CostReport { service_revenue: revenue_total, ..Default::default() };
    for pm in pms {
        let prices = traces.electricity(&pm.location).expect("checked in prepare");
        let it = integrate_cost(&power[&pm.id], prices)?;
        let all = integrate_cost(&cooled[&pm.id], prices)?;
        report.it_energy += it.energy_kwh;
        report.it_cost += it.cost;
        report.total_energy += all.energy_kwh;
        report.total_cost += all.cost;
    }
    report.migration_energy = mig_energy;
    report.migration_cost = mig_cost;
    report.total_energy += mig_energy;
    report.total_cost += mig_cost;

    let meta = RunMeta {
        schema: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION").to_string(),
        controller: controller.id(),
        start: grid.start,
        end: grid.end(),
        period_s: period,
        steps: n,
        window_steps: window,
        locations: traces.locations().map(str::to_string).collect(),
        pms: pms.len(),
        vms: inv.vms().len(),
        seeds: cfg.seeds,
        rng: rng::GENERATOR_NAME.to_string(),
    };
    Ok(SimulationResult {
        meta,
        cost_report: report,
        actions: actions_log,
        decisions,
        power,
        utilization: util,
        migrations,
        pauses,
        lifetimes,
        steps,
        downtime_per_migration: cfg.migration.downtime,
    })
}
