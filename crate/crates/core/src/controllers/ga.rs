use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ControlError, FitnessContext};
use crate::cloudmodel::{Action, ActionKind, Schedule};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GAParams {
    /// Forecast window length in seconds.
    pub fw_s: i64,
    pub pop: usize,
    pub gen: usize,
    pub cross: f64,
    pub mut_rate: f64,
    pub rand: f64,
    pub min_migr: usize,
    /// `None` means `fw_hours * |VMs| / 3`.
    pub max_migr: Option<usize>,
    pub seed: u64,
}

impl Default for GAParams {
    fn default() -> Self {
        Self {
            fw_s: 12 * 3600,
            pop: 100,
            gen: 100,
            cross: 0.15,
            mut_rate: 0.05,
            rand: 0.3,
            min_migr: 0,
            max_migr: None,
            seed: 0,
        }
    }
}

impl GAParams {
    pub fn validate(&self, period_s: i64) -> Result<(), ControlError> {
        if self.pop < 2 {
            return Err(ControlError::Parameter(format!("population {} must be >= 2", self.pop)));
        }
        for (name, v) in [("cross", self.cross), ("mut", self.mut_rate), ("rand", self.rand)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ControlError::Parameter(format!("{name} rate {v} outside [0, 1]")));
            }
        }
        if self.fw_s <= 0 || self.fw_s % period_s != 0 {
            return Err(ControlError::Parameter(format!("window {} s is not a positive multiple of {period_s} s", self.fw_s)));
        }
        if self.max_migr.is_some_and(|m| m < self.min_migr) {
            return Err(ControlError::Parameter("max_migr below min_migr".into()));
        }
        Ok(())
    }

    fn migration_bounds(&self, ctx: &FitnessContext) -> (usize, usize) {
        let max = self
            .max_migr
            .unwrap_or_else(|| (ctx.window_hours() * ctx.vms().len() as f64 / 3.0).floor() as usize);
        (self.min_migr.min(max), max)
    }
}

fn random_action<R: Rng>(ctx: &FitnessContext, rng: &mut R) -> Option<Action> {
    if ctx.vms().is_empty() || ctx.pms().is_empty() {
        return None;
    }
    let t = ctx.step_time(rng.random_range(0..ctx.steps()));
    let vm = ctx.vms()[rng.random_range(0..ctx.vms().len())];
    let pm = ctx.pms()[rng.random_range(0..ctx.pms().len())];
    Some(Action::migrate(t, vm, pm))
}

/// Random schedule with a uniformly drawn number of migrations.
pub fn ga_create<R: Rng>(ctx: &FitnessContext, params: &GAParams, rng: &mut R) -> Schedule {
    let (lo, hi) = params.migration_bounds(ctx);
    let n = rng.random_range(lo..=hi);
    let actions = (0..n).filter_map(|_| random_action(ctx, rng)).collect();
    Schedule::new(ctx.start(), ctx.end(), actions).expect("actions drawn inside the window")
}

/// Child with `s1`'s actions before a random step `t_r` and `s2`'s from
/// `t_r` on.
pub fn ga_crossover<R: Rng>(s1: &Schedule, s2: &Schedule, ctx: &FitnessContext, rng: &mut R) -> Result<Schedule, ControlError> {
    if s1.start() != s2.start() || s1.end() != s2.end() {
        return Err(ControlError::Parameter("crossover of schedules with different windows".into()));
    }
    let t_r = ctx.step_time(rng.random_range(0..ctx.steps()));
    Ok(splice(s1, s2, t_r))
}

pub(crate) fn splice(s1: &Schedule, s2: &Schedule, t_r: crate::geotemporal::Timestamp) -> Schedule {
    let actions = s1
        .actions()
        .iter()
        .filter(|a| a.time < t_r)
        .chain(s2.actions().iter().filter(|a| a.time >= t_r))
        .copied()
        .collect();
    Schedule::new(s1.start(), s1.end(), actions).expect("parents share the window")
}

/// Removes one random action (if any) and inserts a random one.
pub fn ga_mutate<R: Rng>(s: &Schedule, ctx: &FitnessContext, rng: &mut R) -> Schedule {
    let mut out = s.clone();
    if !out.is_empty() {
        out.remove(rng.random_range(0..out.len()));
    }
    match random_action(ctx, rng) {
        Some(a) => out.insert(a),
        None => return s.clone(),
    }
    out
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Schedule,
    pub best_fitness: f64,
    /// Final population, best first.
    pub population: Vec<Schedule>,
}

fn score(ctx: &FitnessContext, pop: Vec<Schedule>) -> Vec<(f64, Schedule)> {
    let fits: Vec<f64> = pop.par_iter().map(|s| ctx.fitness(s)).collect();
    let mut scored: Vec<(f64, Schedule)> = fits.into_iter().zip(pop).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored
}

/// Core genetic loop with elitist replacement. `carryover` is the previous
/// invocation's population; its best `(1 - rand) * pop` members, moved to
/// the new window and stripped of actions on departed VMs, seed the new
/// population.
pub fn ga_run(ctx: &FitnessContext, params: &GAParams, carryover: Option<&[Schedule]>) -> Result<GaOutcome, ControlError> {
    if params.pop < 2 {
        return Err(ControlError::Parameter(format!("population {} must be >= 2", params.pop)));
    }
    let mut rng = rng::stream(rng::derive(params.seed, &[ctx.start().timestamp() as u64]));
    let keep = ((1.0 - params.rand) * params.pop as f64).round() as usize;
    let mut population: Vec<Schedule> = Vec::with_capacity(params.pop);
    if let Some(prev) = carryover {
        let moved: Vec<Schedule> = prev
            .iter()
            .map(|s| {
                let mut s = s.rewindow(ctx.start(), ctx.end());
                s.retain(|a| match a.kind {
                    ActionKind::Migrate { vm, pm } => ctx.vms().binary_search(&vm).is_ok() && ctx.pms().binary_search(&pm).is_ok(),
                    _ => false,
                });
                s
            })
            .collect();
        population.extend(score(ctx, moved).into_iter().take(keep).map(|(_, s)| s));
    }
    while population.len() < params.pop {
        population.push(ga_create(ctx, params, &mut rng));
    }

    let n_children = ((params.pop as f64 * params.cross).round() as usize).min(params.pop - 1);
    let n_mut = (params.pop as f64 * params.mut_rate).round() as usize;
    let mut generation = 0;
    loop {
        let scored = score(ctx, population);
        if generation == params.gen {
            let best_fitness = scored[0].0;
            let population: Vec<Schedule> = scored.into_iter().map(|(_, s)| s).collect();
            return Ok(GaOutcome { best: population[0].clone(), best_fitness, population });
        }
        let wheel = WeightedIndex::new(scored.iter().map(|(f, _)| (1.0 - f).max(0.0) + 1e-6))
            .expect("positive weights");
        let mut children = Vec::with_capacity(n_children);
        for _ in 0..n_children {
            let a = &scored[wheel.sample(&mut rng)].1;
            let b = &scored[wheel.sample(&mut rng)].1;
            children.push(ga_crossover(a, b, ctx, &mut rng)?);
        }
        population = scored.into_iter().take(params.pop - n_children).map(|(_, s)| s).collect();
        population.extend(children);
        // index 0 holds the current best and is never mutated
        for _ in 0..n_mut {
            let i = rng.random_range(1..population.len());
            population[i] = ga_mutate(&population[i], ctx, &mut rng);
        }
        generation += 1;
    }
}
