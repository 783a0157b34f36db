//! Live-migration overhead under iterative pre-copy.

use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MigrationModel {
    /// Link bandwidth R in bits/s.
    pub bandwidth: f64,
    /// Page dirtying rate D in bits/s.
    pub dirty_rate: f64,
    /// Stop-and-copy threshold V_thd in bits.
    pub threshold: f64,
    /// Joules per transferred byte, source and destination combined.
    pub energy_per_byte: f64,
    pub energy_fixed: f64,
    /// Seconds of unavailability charged per migration.
    pub downtime: f64,
}

impl Default for MigrationModel {
    fn default() -> Self {
        Self {
            bandwidth: 1e9,
            dirty_rate: 0.3e9,
            threshold: 0.1e9,
            energy_per_byte: 0.512e-6,
            energy_fixed: 20.165,
            downtime: 60.0,
        }
    }
}

impl MigrationModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.dirty_rate >= 0.0 && self.dirty_rate < self.bandwidth) {
            return Err(ModelError::NonConvergent { dirty: self.dirty_rate, bandwidth: self.bandwidth });
        }
        if !(self.threshold > 0.0) || self.energy_per_byte < 0.0 || self.energy_fixed < 0.0 || self.downtime < 0.0 {
            return Err(ModelError::Invalid("migration threshold must be > 0 and energies/downtime >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MigrationCost {
    pub rounds: u32,
    /// Bits sent over all rounds.
    pub transferred: f64,
    pub energy_j: f64,
    pub downtime_s: f64,
    pub duration_s: f64,
}

pub fn migration_cost(model: &MigrationModel, vm_mem_bits: f64) -> Result<MigrationCost, ModelError> {
    model.validate()?;
    if !(vm_mem_bits > 0.0) {
        return Err(ModelError::Invalid(format!("memory size {vm_mem_bits} must be > 0")));
    }
    let lambda = model.dirty_rate / model.bandwidth;
    let rounds = if lambda == 0.0 || vm_mem_bits <= model.threshold {
        0
    } else {
        let raw = (model.threshold / vm_mem_bits).ln() / lambda.ln();
        let near = raw.round();
        let n = if (raw - near).abs() < 1e-9 { near } else { raw.ceil() };
        n.max(0.0) as u32
    };
    let transferred = vm_mem_bits * (1.0 - lambda.powi(rounds as i32 + 1)) / (1.0 - lambda);
    Ok(MigrationCost {
        rounds,
        transferred,
        energy_j: model.energy_per_byte * transferred / 8.0 + model.energy_fixed,
        downtime_s: model.downtime,
        duration_s: transferred / model.bandwidth,
    })
}
