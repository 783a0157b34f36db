use serde::{Deserialize, Serialize};

use super::{ControlContext, ControlError};
use crate::cloudmodel::{ppue, ActionKind, PmId, Schedule, VmId};
use crate::geotemporal::Timestamp;

/// Component weights of the schedule fitness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitnessWeights {
    pub w_ct: f64,
    pub w_q: f64,
    pub w_up: f64,
    pub w_cd: f64,
    pub w_alloc: f64,
    pub w_cap: f64,
}

impl Default for FitnessWeights {
    fn default() -> Self {
        Self { w_ct: 0.1, w_q: 0.4, w_up: 0.4, w_cd: 0.1, w_alloc: 0.4, w_cap: 0.6 }
    }
}

impl FitnessWeights {
    /// Top-level weights scaled to sum to 1, and the two constraint
    /// weights likewise.
    pub fn normalized(&self) -> Result<Self, ControlError> {
        let all = [self.w_ct, self.w_q, self.w_up, self.w_cd, self.w_alloc, self.w_cap];
        if all.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(ControlError::Parameter(format!("fitness weights must lie in [0, 1]: {all:?}")));
        }
        let top = self.w_ct + self.w_q + self.w_up + self.w_cd;
        let inner = self.w_alloc + self.w_cap;
        if top <= 0.0 || inner <= 0.0 {
            return Err(ControlError::Parameter("fitness weight groups must have a positive sum".into()));
        }
        Ok(Self {
            w_ct: self.w_ct / top,
            w_q: self.w_q / top,
            w_up: self.w_up / top,
            w_cd: self.w_cd / top,
            w_alloc: self.w_alloc / inner,
            w_cap: self.w_cap / inner,
        })
    }
}

/// Acceptable and maximum migration rates, per VM per hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QoSParams {
    pub r_mig_min: f64,
    pub r_mig_max: f64,
}

impl Default for QoSParams {
    fn default() -> Self {
        Self { r_mig_min: 0.25, r_mig_max: 1.0 }
    }
}

impl QoSParams {
    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.r_mig_min >= 0.0 && self.r_mig_min < self.r_mig_max) {
            return Err(ControlError::Parameter(format!(
                "need 0 <= r_mig_min < r_mig_max, got {} and {}",
                self.r_mig_min, self.r_mig_max
            )));
        }
        Ok(())
    }

    pub fn penalty(&self, rate: f64) -> f64 {
        if rate < self.r_mig_min {
            0.0
        } else if rate > self.r_mig_max {
            1.0
        } else {
            (rate - self.r_mig_min) / (self.r_mig_max - self.r_mig_min)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessBreakdown {
    pub constraint: f64,
    pub qos: f64,
    pub utilprice: f64,
    pub consolid: f64,
    pub total: f64,
}

/// Precomputed, index-based view of one controller invocation used to
/// score many schedules cheaply. Only the VMs live at the window start
/// take part; the schedule's migrations are replayed on top of the
/// current allocation.
#[derive(Debug, Clone)]
pub struct FitnessContext {
    start: Timestamp,
    period_s: i64,
    steps: usize,
    window_hours: f64,
    r: usize,
    weights: FitnessWeights,
    qos: QoSParams,
    res_weights: Vec<f64>,
    pm_ids: Vec<PmId>,
    pm_cap: Vec<f64>,
    vm_ids: Vec<VmId>,
    vm_req: Vec<f64>,
    init_host: Vec<Option<usize>>,
    paused: Vec<bool>,
    /// max(price, 0) * pPUE per (step, PM).
    cost: Vec<f64>,
    up_worst: f64,
}

impl FitnessContext {
    pub fn new(ctx: &ControlContext, weights: FitnessWeights, qos: QoSParams) -> Result<Self, ControlError> {
        if ctx.window_steps == 0 {
            return Err(ControlError::Parameter("empty forecast window".into()));
        }
        qos.validate()?;
        let weights = weights.normalized()?;
        let inv = ctx.inventory;
        let r = inv.resource_kinds();
        let pms = inv.pms();
        let pm_ids: Vec<PmId> = pms.iter().map(|p| p.id).collect();
        let pm_cap = pms.iter().flat_map(|p| p.capacity.values().iter().copied()).collect();
        let vm_ids: Vec<VmId> = ctx.state.live.iter().copied().filter(|v| inv.vm(*v).is_some()).collect();
        let vm_req = vm_ids.iter().flat_map(|v| inv.vm(*v).expect("filtered").requested.values().iter().copied()).collect();
        let hosts = ctx.state.host_map();
        let init_host = vm_ids
            .iter()
            .map(|v| hosts.get(v).and_then(|pm| pm_ids.binary_search(pm).ok()))
            .collect();
        let paused = vm_ids.iter().map(|v| ctx.state.paused.contains(v)).collect();
        let mut cost = Vec::with_capacity(ctx.window_steps * pms.len());
        for k in 0..ctx.window_steps {
            for pm in pms {
                let e = ctx.forecast.price(&pm.location, k)?.max(0.0);
                cost.push(e * ppue(ctx.forecast.temperature(&pm.location, k)?));
            }
        }
        let up_worst = if pms.is_empty() { 0.0 } else { cost.iter().sum::<f64>() / cost.len() as f64 };
        Ok(Self {
            start: ctx.now,
            period_s: ctx.period_s,
            steps: ctx.window_steps,
            window_hours: ctx.window_hours(),
            r,
            weights,
            qos,
            res_weights: inv.weights().to_vec(),
            pm_ids,
            pm_cap,
            vm_ids,
            vm_req,
            init_host,
            paused,
            cost,
            up_worst,
        })
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step_time(&self, k: usize) -> Timestamp {
        self.start + chrono::Duration::seconds(self.period_s * k as i64)
    }

    pub fn end(&self) -> Timestamp {
        self.step_time(self.steps - 1)
    }

    pub fn window_hours(&self) -> f64 {
        self.window_hours
    }

    /// VMs live at the window start.
    pub fn vms(&self) -> &[VmId] {
        &self.vm_ids
    }

    pub fn pms(&self) -> &[PmId] {
        &self.pm_ids
    }

    pub fn empty_schedule(&self) -> Schedule {
        Schedule::empty(self.start, self.end())
    }

    fn step_of(&self, t: Timestamp) -> Option<usize> {
        let off = (t - self.start).num_seconds();
        if off < 0 {
            return None;
        }
        let k = ((off + self.period_s - 1) / self.period_s) as usize;
        (k < self.steps).then_some(k)
    }

    pub fn fitness(&self, schedule: &Schedule) -> f64 {
        self.evaluate(schedule).total
    }

    pub fn evaluate(&self, schedule: &Schedule) -> FitnessBreakdown {
        let (r, np, nv) = (self.r, self.pm_ids.len(), self.vm_ids.len());
        let mut host = self.init_host.clone();
        let mut reserved = vec![0.0; np * r];
        let mut running = vec![0.0; np * r];
        for (v, h) in host.iter().enumerate() {
            if let Some(p) = h {
                self.shift(&mut reserved, *p, v, 1.0);
                if !self.paused[v] {
                    self.shift(&mut running, *p, v, 1.0);
                }
            }
        }
        let mut unalloc = host.iter().filter(|h| h.is_none()).count();
        let mut migrations = vec![0u32; nv];

        let mut moves: Vec<(usize, usize, usize)> = schedule
            .actions()
            .iter()
            .filter_map(|a| match a.kind {
                ActionKind::Migrate { vm, pm } => Some((
                    self.step_of(a.time)?,
                    self.vm_ids.binary_search(&vm).ok()?,
                    self.pm_ids.binary_search(&pm).ok()?,
                )),
                _ => None,
            })
            .collect();
        moves.sort_by_key(|m| m.0);

        let (mut constraint, mut up_sum) = (0.0, 0.0);
        let mut pos_sum = vec![0.0; np];
        let mut pos_n = vec![0u32; np];
        let mut next = 0;
        for k in 0..self.steps {
            while next < moves.len() && moves[next].0 == k {
                let (_, v, p) = moves[next];
                next += 1;
                match host[v] {
                    Some(old) if old == p => continue,
                    Some(old) => {
                        migrations[v] += 1;
                        self.shift(&mut reserved, old, v, -1.0);
                        if !self.paused[v] {
                            self.shift(&mut running, old, v, -1.0);
                        }
                    }
                    None => unalloc -= 1,
                }
                host[v] = Some(p);
                self.shift(&mut reserved, p, v, 1.0);
                if !self.paused[v] {
                    self.shift(&mut running, p, v, 1.0);
                }
            }
            let mut overcap = 0;
            for p in 0..np {
                let cap = &self.pm_cap[p * r..(p + 1) * r];
                if reserved[p * r..(p + 1) * r].iter().zip(cap).any(|(u, c)| *u > c + 1e-9) {
                    overcap += 1;
                }
                let u: f64 = running[p * r..(p + 1) * r]
                    .iter()
                    .zip(cap)
                    .zip(&self.res_weights)
                    .map(|((d, c), w)| w * d / c)
                    .sum();
                let u_capped = u.min(1.0);
                up_sum += u_capped * self.cost[k * np + p];
                if u > 1e-12 {
                    pos_sum[p] += u_capped;
                    pos_n[p] += 1;
                }
            }
            let r_unalloc = if nv == 0 { 0.0 } else { unalloc as f64 / nv as f64 };
            let r_overcap = if np == 0 { 0.0 } else { overcap as f64 / np as f64 };
            constraint += self.weights.w_alloc * r_unalloc + self.weights.w_cap * r_overcap;
        }
        let constraint = constraint / self.steps as f64;
        let qos = if nv == 0 {
            0.0
        } else {
            migrations.iter().map(|&m| self.qos.penalty(m as f64 / self.window_hours)).sum::<f64>() / nv as f64
        };
        let utilprice = if self.up_worst > 0.0 {
            (up_sum / (np * self.steps) as f64 / self.up_worst).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let used: Vec<f64> = (0..np).filter(|&p| pos_n[p] > 0).map(|p| pos_sum[p] / pos_n[p] as f64).collect();
        let consolid = if used.is_empty() { 0.0 } else { 1.0 - used.iter().sum::<f64>() / used.len() as f64 };
        let w = &self.weights;
        let total = w.w_ct * constraint + w.w_q * qos + w.w_up * utilprice + w.w_cd * consolid;
        FitnessBreakdown { constraint, qos, utilprice, consolid, total }
    }

    fn shift(&self, acc: &mut [f64], p: usize, v: usize, sign: f64) {
        let r = self.r;
        for i in 0..r {
            acc[p * r + i] += sign * self.vm_req[v * r + i];
        }
    }
}
