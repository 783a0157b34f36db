//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Duration, TimeZone, Utc};
use geocloud::cloudmodel::{
    CloudState, FrequencyRange, Inventory, LinearPowerModel, MulticorePowerModel, Pm, PmId, PowerModel, ResourceSpec,
    Vm, VmId,
};
use geocloud::controllers::{ControlContext, WindowForecast};
use geocloud::economics::{PricingKind, PricingModel};
use geocloud::{TimeSeries, Timestamp};

pub const HOUR: i64 = 3600;
pub const GHZ: u64 = 1_000_000_000;
pub const MHZ: u64 = 1_000_000;

pub fn t0() -> Timestamp {
    Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()
}

pub fn at(h: i64) -> Timestamp {
    t0() + Duration::hours(h)
}

pub fn pm(id: u32, loc: &str, cpu: f64, ram: f64) -> Pm {
    Pm {
        id: PmId(id),
        location: loc.to_string(),
        capacity: ResourceSpec::new(vec![cpu, ram]).unwrap(),
        power_model: "lin".into(),
        freq: FrequencyRange::fixed(2 * GHZ),
        cores: cpu as u32,
    }
}

/// Quad-core ARM board, 0.8 to 1.8 GHz in 100 MHz steps.
pub fn arm_pm(id: u32, loc: &str) -> Pm {
    Pm {
        id: PmId(id),
        location: loc.to_string(),
        capacity: ResourceSpec::new(vec![4.0, 8.0]).unwrap(),
        power_model: "arm".into(),
        freq: FrequencyRange::new(800 * MHZ, 1800 * MHZ, 100 * MHZ).unwrap(),
        cores: 4,
    }
}

pub fn vm(id: u32, cpu: f64, ram: f64, beta: f64) -> Vm {
    Vm {
        id: VmId(id),
        requested: ResourceSpec::new(vec![cpu, ram]).unwrap(),
        beta,
        boot_time: t0(),
        delete_time: None,
        green: false,
    }
}

pub fn power_models() -> BTreeMap<String, PowerModel> {
    BTreeMap::from([
        ("lin".to_string(), PowerModel::Linear(LinearPowerModel::constant(200.0, 100.0, 0.0, 0).unwrap())),
        ("arm".to_string(), PowerModel::Multicore(MulticorePowerModel::arm())),
    ])
}

/// Per-location price and temperature paths over the window.
pub fn forecast(series: &[(&str, Vec<f64>, Vec<f64>)]) -> WindowForecast {
    let mut f = WindowForecast { electricity: BTreeMap::new(), temperature: BTreeMap::new() };
    for (loc, e, t) in series {
        f.electricity.insert(loc.to_string(), TimeSeries::new(t0(), HOUR, e.clone()).unwrap());
        f.temperature.insert(loc.to_string(), TimeSeries::new(t0(), HOUR, t.clone()).unwrap());
    }
    f
}

/// Constant price and temperature per location.
pub fn flat_forecast(locs: &[(&str, f64, f64)], steps: usize) -> WindowForecast {
    let rows: Vec<_> = locs.iter().map(|(l, e, t)| (*l, vec![*e; steps], vec![*t; steps])).collect();
    forecast(&rows)
}

/// Everything a controller context borrows.
pub struct World {
    pub inventory: Inventory,
    pub state: CloudState,
    pub forecast: WindowForecast,
    pub power_models: BTreeMap<String, PowerModel>,
    pub pricing: PricingModel,
    pub kind: PricingKind,
}

impl World {
    /// All VMs live; `placement` maps VM id to PM id, others unallocated.
    pub fn new(pms: Vec<Pm>, vms: Vec<Vm>, placement: &[(u32, u32)], forecast: WindowForecast) -> Self {
        let mut state = CloudState::empty(t0(), &pms);
        state.live = vms.iter().map(|v| v.id).collect::<BTreeSet<_>>();
        for &(v, p) in placement {
            state.alloc.get_mut(&PmId(p)).unwrap().insert(VmId(v));
        }
        Self {
            inventory: Inventory::new(pms, vms, None).unwrap(),
            state,
            forecast,
            power_models: power_models(),
            pricing: PricingModel::elastic_hosts(2.0 * GHZ as f64),
            kind: PricingKind::Perceived,
        }
    }

    pub fn ctx(&self, window_steps: usize) -> ControlContext<'_> {
        ControlContext {
            now: self.state.time,
            period_s: HOUR,
            window_steps,
            state: &self.state,
            inventory: &self.inventory,
            forecast: &self.forecast,
            power_models: &self.power_models,
            pricing: &self.pricing,
            pricing_kind: self.kind,
        }
    }
}
