use serde::{Deserialize, Serialize};

use super::EconError;

/// Inputs of the wastage-penalty model. Resource amounts share one unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KyotoParams {
    pub c_en: f64,
    pub c_co2: f64,
    pub c_viol: f64,
    pub r_agreed: f64,
    pub mean_demand: f64,
    pub max_demand: f64,
}

impl KyotoParams {
    pub fn validate(&self) -> Result<(), EconError> {
        if self.c_en < 0.0 || self.c_co2 < 0.0 || self.c_viol < 0.0 {
            return Err(EconError::Invalid("costs must be >= 0".into()));
        }
        if !(self.r_agreed > 0.0) {
            return Err(EconError::Invalid(format!("r_agreed {} must be > 0", self.r_agreed)));
        }
        if !(self.mean_demand >= 0.0 && self.max_demand >= self.mean_demand) {
            return Err(EconError::Invalid("need max_demand >= mean_demand >= 0".into()));
        }
        Ok(())
    }

    fn c_waste(&self) -> f64 {
        self.c_en + self.c_co2
    }
}

/// Cost of provisioning above mean demand.
pub fn kyoto_wastage(p: &KyotoParams, r_provisioned: f64) -> Result<f64, EconError> {
    p.validate()?;
    if r_provisioned < p.mean_demand {
        return Err(EconError::Domain(format!("provisioned {r_provisioned} below mean demand {}", p.mean_demand)));
    }
    Ok((r_provisioned - p.mean_demand) / p.r_agreed * p.c_waste())
}

pub fn kyoto_violation_prob(p: &KyotoParams, r_provisioned: f64) -> Result<f64, EconError> {
    p.validate()?;
    if !(0.0..=p.max_demand).contains(&r_provisioned) || p.max_demand <= 0.0 {
        return Err(EconError::Domain(format!("provisioned {r_provisioned} outside [0, {}]", p.max_demand)));
    }
    Ok(1.0 - r_provisioned / p.max_demand)
}

pub fn kyoto_expected_penalty(p: &KyotoParams, r_provisioned: f64) -> Result<f64, EconError> {
    Ok(kyoto_violation_prob(p, r_provisioned)? * p.c_viol)
}

/// Provisioning level where wastage equals the expected penalty.
pub fn kyoto_equilibrium(p: &KyotoParams) -> Result<f64, EconError> {
    p.validate()?;
    let denom = p.max_demand * p.c_waste() + p.r_agreed * p.c_viol;
    if !(denom > 0.0) {
        return Err(EconError::Domain("wastage and violation costs are all zero".into()));
    }
    Ok(p.max_demand * (p.mean_demand * p.c_waste() + p.r_agreed * p.c_viol) / denom)
}
