use std::collections::BTreeMap;

use chrono::Duration;

use super::ControlError;
use crate::cloudmodel::{ppue, CloudState, Inventory, LocationId, Pm, PowerModel, Vm};
use crate::economics::{PricingKind, PricingModel};
use crate::geotemporal::{perturb_forecast, ForecastErrorSpec, TimeSeries, Timestamp, TraceSet};
use crate::rng;

/// Predicted prices ($/MWh) and temperatures (°C) per location over the
/// controller's window, one value per grid step.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowForecast {
    pub electricity: BTreeMap<LocationId, TimeSeries>,
    pub temperature: BTreeMap<LocationId, TimeSeries>,
}

impl WindowForecast {
    /// Exact values read from `traces`; past the end of a trace its last
    /// value is held.
    pub fn from_traces(traces: &TraceSet, start: Timestamp, period_s: i64, steps: usize) -> Result<Self, ControlError> {
        let cut = |s: &TimeSeries| -> Result<TimeSeries, ControlError> {
            let values = (0..steps)
                .map(|k| {
                    let t = start + Duration::seconds(period_s * k as i64);
                    if t < s.start() {
                        return Err(ControlError::Parameter(format!("trace starts after {t}")));
                    }
                    Ok(s.value_at(t).unwrap_or_else(|| *s.values().last().expect("non-empty trace")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(TimeSeries::new(start, period_s, values)?)
        };
        let mut out = Self { electricity: BTreeMap::new(), temperature: BTreeMap::new() };
        for loc in traces.locations() {
            out.electricity.insert(loc.to_string(), cut(traces.electricity(loc).expect("validated trace set"))?);
            out.temperature.insert(loc.to_string(), cut(traces.temperature(loc).expect("validated trace set"))?);
        }
        Ok(out)
    }

    /// Gaussian forecast error on every value, one independent stream per
    /// location and kind.
    pub fn perturbed(&self, price_err: &ForecastErrorSpec, temp_err: &ForecastErrorSpec) -> Self {
        let apply = |m: &BTreeMap<LocationId, TimeSeries>, spec: &ForecastErrorSpec, kind: u64| {
            m.iter()
                .map(|(loc, s)| {
                    let seed = rng::derive(spec.seed, &[kind, rng::label(loc)]);
                    (loc.clone(), perturb_forecast(s, &ForecastErrorSpec { seed, ..*spec }))
                })
                .collect()
        };
        Self { electricity: apply(&self.electricity, price_err, 1), temperature: apply(&self.temperature, temp_err, 2) }
    }

    pub fn price(&self, loc: &str, k: usize) -> Result<f64, ControlError> {
        lookup(&self.electricity, loc, k)
    }

    pub fn temperature(&self, loc: &str, k: usize) -> Result<f64, ControlError> {
        lookup(&self.temperature, loc, k)
    }
}

fn lookup(m: &BTreeMap<LocationId, TimeSeries>, loc: &str, k: usize) -> Result<f64, ControlError> {
    let s = m.get(loc).ok_or_else(|| ControlError::MissingLocation(loc.to_string()))?;
    Ok(s.values().get(k).or(s.values().last()).copied().expect("non-empty forecast"))
}

/// Everything a controller may look at when invoked at `now`.
#[derive(Debug, Clone, Copy)]
pub struct ControlContext<'a> {
    pub now: Timestamp,
    pub period_s: i64,
    /// Grid steps in the forecast window, `now` included.
    pub window_steps: usize,
    pub state: &'a CloudState,
    pub inventory: &'a Inventory,
    pub forecast: &'a WindowForecast,
    pub power_models: &'a BTreeMap<String, PowerModel>,
    pub pricing: &'a PricingModel,
    pub pricing_kind: PricingKind,
}

impl ControlContext<'_> {
    pub fn step_time(&self, k: usize) -> Timestamp {
        self.now + Duration::seconds(self.period_s * k as i64)
    }

    /// Last grid instant of the window.
    pub fn window_end(&self) -> Timestamp {
        self.step_time(self.window_steps.saturating_sub(1))
    }

    pub fn window_hours(&self) -> f64 {
        self.window_steps as f64 * self.period_s as f64 / 3600.0
    }

    pub fn power_model(&self, pm: &Pm) -> Result<&PowerModel, ControlError> {
        self.power_models.get(&pm.power_model).ok_or_else(|| ControlError::MissingPowerModel(pm.power_model.clone()))
    }

    /// Electricity price times cooling overhead at the PM's location.
    pub fn location_cost(&self, pm: &Pm, k: usize) -> Result<f64, ControlError> {
        Ok(self.forecast.price(&pm.location, k)? * ppue(self.forecast.temperature(&pm.location, k)?))
    }

    pub fn vm(&self, id: crate::cloudmodel::VmId) -> Option<&Vm> {
        self.inventory.vm(id)
    }
}
