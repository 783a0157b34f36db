use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ModelError, CPU, RAM};
use crate::geotemporal::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VmId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PmId(pub u32);

impl fmt::Display for VmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vm{}", self.0)
    }
}

impl fmt::Display for PmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pm{}", self.0)
    }
}

/// Data center location key, shared with the trace set.
pub type LocationId = String;

/// Ordered tuple of nonnegative resource amounts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceSpec(Vec<f64>);

impl ResourceSpec {
    pub fn new(values: Vec<f64>) -> Result<Self, ModelError> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(ModelError::Invalid(format!("resource amount {v} must be finite and >= 0")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0.get(i).copied().unwrap_or(0.0)
    }
}

/// Discrete DVFS range in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyRange {
    pub min_hz: u64,
    pub max_hz: u64,
    pub step_hz: u64,
}

impl FrequencyRange {
    pub fn new(min_hz: u64, max_hz: u64, step_hz: u64) -> Result<Self, ModelError> {
        let r = Self { min_hz, max_hz, step_hz };
        r.validate()?;
        Ok(r)
    }

    /// A single fixed frequency.
    pub fn fixed(hz: u64) -> Self {
        Self { min_hz: hz, max_hz: hz, step_hz: 1 }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.step_hz == 0 || self.min_hz > self.max_hz || (self.max_hz - self.min_hz) % self.step_hz != 0 {
            return Err(ModelError::Invalid(format!(
                "frequency range {}..{} step {} is not a valid grid",
                self.min_hz, self.max_hz, self.step_hz
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> u32 {
        ((self.max_hz - self.min_hz) / self.step_hz) as u32 + 1
    }

    pub fn contains(&self, hz: u64) -> bool {
        hz >= self.min_hz && hz <= self.max_hz && (hz - self.min_hz) % self.step_hz == 0
    }

    /// Step index `q = 1 + (f - f_min) / f_step` for an on-grid frequency.
    pub fn step_index(&self, hz: u64) -> Option<u32> {
        self.contains(hz).then(|| 1 + ((hz - self.min_hz) / self.step_hz) as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pm {
    pub id: PmId,
    pub location: LocationId,
    pub capacity: ResourceSpec,
    /// Key into the scenario's power-model table.
    pub power_model: String,
    pub freq: FrequencyRange,
    pub cores: u32,
}

impl Pm {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.freq.validate()?;
        if let Some(i) = self.capacity.values().iter().position(|&c| c <= 0.0) {
            return Err(ModelError::ZeroCapacity(self.id, i));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vm {
    pub id: VmId,
    pub requested: ResourceSpec,
    /// CPU-boundedness in [0, 1]; 1 is fully CPU-bound.
    pub beta: f64,
    pub boot_time: Timestamp,
    #[serde(default)]
    pub delete_time: Option<Timestamp>,
    /// Opted into reduced availability (paused during expensive hours).
    #[serde(default)]
    pub green: bool,
}

impl Vm {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(ModelError::Invalid(format!("{}: beta {} outside [0, 1]", self.id, self.beta)));
        }
        if let Some(d) = self.delete_time {
            if d <= self.boot_time {
                return Err(ModelError::Invalid(format!("{}: delete time not after boot time", self.id)));
            }
        }
        Ok(())
    }

    /// Virtual cores, at least one.
    pub fn cores(&self) -> u32 {
        (self.requested.get(CPU).round() as u32).max(1)
    }

    pub fn ram_gb(&self) -> f64 {
        self.requested.get(RAM)
    }

    /// Memory image size in bits (decimal GB).
    pub fn mem_bits(&self) -> f64 {
        self.ram_gb() * 8e9
    }

    pub fn is_live_at(&self, t: Timestamp) -> bool {
        self.boot_time <= t && self.delete_time.is_none_or(|d| t < d)
    }
}

/// Static description of the cloud: every PM, every VM that will ever be
/// requested, and the utilisation weights per resource kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Inventory {
    pms: Vec<Pm>,
    vms: BTreeMap<VmId, Vm>,
    weights: Vec<f64>,
}

impl Inventory {
    /// `weights` are normalized to sum to 1; `None` means uniform.
    pub fn new(mut pms: Vec<Pm>, vms: Vec<Vm>, weights: Option<Vec<f64>>) -> Result<Self, ModelError> {
        pms.sort_by_key(|p| p.id);
        if pms.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(ModelError::Invalid("duplicate PM id".into()));
        }
        let r = pms.first().map(|p| p.capacity.len()).or_else(|| vms.first().map(|v| v.requested.len())).unwrap_or(2);
        for pm in &pms {
            pm.validate()?;
            if pm.capacity.len() != r {
                return Err(ModelError::Dimension { expected: r, got: pm.capacity.len() });
            }
        }
        let mut map = BTreeMap::new();
        for vm in vms {
            vm.validate()?;
            if vm.requested.len() != r {
                return Err(ModelError::Dimension { expected: r, got: vm.requested.len() });
            }
            if map.insert(vm.id, vm).is_some() {
                return Err(ModelError::Invalid("duplicate VM id".into()));
            }
        }
        let weights = normalize_weights(weights.unwrap_or_else(|| vec![1.0; r]), r)?;
        Ok(Self { pms, vms: map, weights })
    }

    pub fn pms(&self) -> &[Pm] {
        &self.pms
    }

    pub fn pm(&self, id: PmId) -> Option<&Pm> {
        self.pms.binary_search_by_key(&id, |p| p.id).ok().map(|i| &self.pms[i])
    }

    pub fn pm_index(&self, id: PmId) -> Option<usize> {
        self.pms.binary_search_by_key(&id, |p| p.id).ok()
    }

    pub fn vms(&self) -> &BTreeMap<VmId, Vm> {
        &self.vms
    }

    pub fn vm(&self, id: VmId) -> Option<&Vm> {
        self.vms.get(&id)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn resource_kinds(&self) -> usize {
        self.weights.len()
    }

    /// Largest capacity per resource kind across PMs; used to put VM and
    /// PM sizes on a common scale.
    pub fn max_capacity(&self) -> Vec<f64> {
        let mut max = vec![0.0f64; self.weights.len()];
        for pm in &self.pms {
            for (m, c) in max.iter_mut().zip(pm.capacity.values()) {
                *m = m.max(*c);
            }
        }
        max
    }
}

fn normalize_weights(w: Vec<f64>, r: usize) -> Result<Vec<f64>, ModelError> {
    if w.len() != r {
        return Err(ModelError::Dimension { expected: r, got: w.len() });
    }
    let sum: f64 = w.iter().sum();
    if w.iter().any(|x| !(*x >= 0.0)) || !(sum > 0.0) {
        return Err(ModelError::Invalid(format!("resource weights {w:?} must be >= 0 with a positive sum")));
    }
    Ok(w.into_iter().map(|x| x / sum).collect())
}
