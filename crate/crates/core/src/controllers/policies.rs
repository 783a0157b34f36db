use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    bcf_place, bcf_repair, bfd_step, frequency_scaling_stage, ga_run, peak_pauser, ControlContext, ControlError,
    FitnessBreakdown, FitnessContext, FitnessWeights, FrequencyStep, GAParams, QoSParams,
};
use crate::cloudmodel::{apply_actions, Action, ActionKind, LocationId, Schedule};
use crate::geotemporal::{find_expensive_hours, HourSet, TraceSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerId {
    PeakPauser,
    Bfd,
    GaHybrid,
    Bcffs,
    /// BCF placement alone, without frequency scaling.
    Bcf,
}

impl ControllerId {
    pub const ALL: [ControllerId; 5] =
        [ControllerId::PeakPauser, ControllerId::Bfd, ControllerId::GaHybrid, ControllerId::Bcffs, ControllerId::Bcf];

    pub fn as_str(&self) -> &'static str {
        match self {
            ControllerId::PeakPauser => "peak_pauser",
            ControllerId::Bfd => "bfd",
            ControllerId::GaHybrid => "ga_hybrid",
            ControllerId::Bcffs => "bcffs",
            ControllerId::Bcf => "bcf",
        }
    }
}

impl fmt::Display for ControllerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControllerId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown controller {s:?}; expected one of peak_pauser, bfd, ga_hybrid, bcffs, bcf"))
    }
}

/// Inputs behind a decision, kept for the action log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecisionInfo {
    None,
    Ga { ga_fitness: f64, fitness: FitnessBreakdown, repair_actions: usize },
    Frequency { steps: Vec<FrequencyStep> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    /// Actions to execute now.
    pub actions: Vec<Action>,
    pub info: DecisionInfo,
}

pub trait Controller: Send {
    fn id(&self) -> ControllerId;

    /// Forecast window length in grid steps.
    fn window_steps(&self, _period_s: i64) -> usize {
        1
    }

    fn decide(&mut self, ctx: &ControlContext) -> Result<Decision, ControlError>;
}

/// Best-fit-decreasing baseline with underload consolidation.
#[derive(Debug, Clone)]
pub struct BfdController {
    pub underload_threshold: f64,
}

impl Controller for BfdController {
    fn id(&self) -> ControllerId {
        ControllerId::Bfd
    }

    fn decide(&mut self, ctx: &ControlContext) -> Result<Decision, ControlError> {
        let actions = bfd_step(ctx.state, ctx.inventory, ctx.now, self.underload_threshold)?;
        Ok(Decision { actions, info: DecisionInfo::None })
    }
}

/// BFD placement plus pausing of green VMs during the expensive hours of
/// their host's location.
#[derive(Debug, Clone)]
pub struct PeakPauserController {
    pub expensive: BTreeMap<LocationId, HourSet>,
    pub underload_threshold: f64,
}

impl PeakPauserController {
    /// Expensive hours per location from historical prices.
    pub fn from_history(prices: &TraceSet, downtime_ratio: f64, underload_threshold: f64) -> Result<Self, ControlError> {
        let mut expensive = BTreeMap::new();
        for loc in prices.locations() {
            let series = prices.electricity(loc).expect("validated trace set");
            expensive.insert(loc.to_string(), find_expensive_hours(series, downtime_ratio)?);
        }
        Ok(Self { expensive, underload_threshold })
    }
}

impl Controller for PeakPauserController {
    fn id(&self) -> ControllerId {
        ControllerId::PeakPauser
    }

    fn decide(&mut self, ctx: &ControlContext) -> Result<Decision, ControlError> {
        let mut actions = bfd_step(ctx.state, ctx.inventory, ctx.now, self.underload_threshold)?;
        let placed = apply_actions(ctx.state, ctx.now, &actions, ctx.inventory.pms())?;
        let hosts = placed.host_map();
        let mut by_location: BTreeMap<&str, BTreeSet<_>> = BTreeMap::new();
        for vm in placed.live.iter().filter(|v| ctx.inventory.vm(**v).is_some_and(|vm| vm.green)) {
            if let Some(pm) = hosts.get(vm).and_then(|p| ctx.inventory.pm(*p)) {
                by_location.entry(pm.location.as_str()).or_default().insert(*vm);
            }
        }
        let none = HourSet::new();
        for (loc, green) in by_location {
            let hours = self.expensive.get(loc).unwrap_or(&none);
            actions.extend(peak_pauser(hours, &green, ctx.now, &placed));
        }
        Ok(Decision { actions, info: DecisionInfo::None })
    }
}

/// Genetic migration scheduler whose best schedule is repaired by BCF.
#[derive(Debug, Clone)]
pub struct GaHybridController {
    pub params: GAParams,
    pub weights: FitnessWeights,
    pub qos: QoSParams,
    pub underutil_threshold: f64,
    population: Option<Vec<Schedule>>,
}

impl GaHybridController {
    pub fn new(params: GAParams, weights: FitnessWeights, qos: QoSParams, underutil_threshold: f64) -> Self {
        Self { params, weights, qos, underutil_threshold, population: None }
    }
}

impl Controller for GaHybridController {
    fn id(&self) -> ControllerId {
        ControllerId::GaHybrid
    }

    fn window_steps(&self, period_s: i64) -> usize {
        (self.params.fw_s / period_s).max(1) as usize
    }

    fn decide(&mut self, ctx: &ControlContext) -> Result<Decision, ControlError> {
        self.params.validate(ctx.period_s)?;
        let fctx = FitnessContext::new(ctx, self.weights, self.qos)?;
        let outcome = ga_run(&fctx, &self.params, self.population.as_deref())?;
        let repaired = bcf_repair(&outcome.best, ctx, self.underutil_threshold)?;
        let fitness = fctx.evaluate(&repaired);
        let repair_actions = repaired.len().saturating_sub(outcome.best.len());
        self.population = Some(outcome.population);
        let actions = repaired.actions_at(ctx.now).copied().collect();
        Ok(Decision { actions, info: DecisionInfo::Ga { ga_fitness: outcome.best_fitness, fitness, repair_actions } })
    }
}

/// BCF placement alone.
#[derive(Debug, Clone)]
pub struct BcfController {
    pub underutil_threshold: f64,
}

impl Controller for BcfController {
    fn id(&self) -> ControllerId {
        ControllerId::Bcf
    }

    fn decide(&mut self, ctx: &ControlContext) -> Result<Decision, ControlError> {
        Ok(Decision { actions: bcf_place(ctx, self.underutil_threshold)?, info: DecisionInfo::None })
    }
}

/// BCF placement followed by per-PM frequency scaling.
#[derive(Debug, Clone)]
pub struct BcffsController {
    pub underutil_threshold: f64,
}

impl Controller for BcffsController {
    fn id(&self) -> ControllerId {
        ControllerId::Bcffs
    }

    fn decide(&mut self, ctx: &ControlContext) -> Result<Decision, ControlError> {
        let mut actions = bcf_place(ctx, self.underutil_threshold)?;
        let mut placed = apply_actions(ctx.state, ctx.now, &actions, ctx.inventory.pms())?;
        let current = placed.freq.clone();
        for pm in ctx.inventory.pms() {
            placed.freq.insert(pm.id, pm.freq.max_hz);
        }
        let stage = frequency_scaling_stage(ctx, &placed)?;
        for pm in ctx.inventory.pms() {
            let target = stage.chosen.get(&pm.id).copied().unwrap_or(pm.freq.max_hz);
            if current.get(&pm.id).copied().unwrap_or(pm.freq.max_hz) != target {
                actions.push(Action::new(ctx.now, ActionKind::SetFreq { pm: pm.id, hz: target }));
            }
        }
        Ok(Decision { actions, info: DecisionInfo::Frequency { steps: stage.steps } })
    }
}
