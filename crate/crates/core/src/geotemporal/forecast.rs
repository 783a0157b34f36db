//! Simple exponential smoothing, the Theta method as SES plus a random
//! drift, MAPE, and Gaussian forecast-error injection.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{GeoError, TimeSeries};
use crate::rng;

/// Gaussian forecast error: each forecast value is drawn from
/// `N(actual, sigma_pred^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastErrorSpec {
    pub sigma_pred: f64,
    pub seed: u64,
}

impl ForecastErrorSpec {
    pub fn exact() -> Self {
        Self { sigma_pred: 0.0, seed: 0 }
    }
}

fn check_alpha(alpha: f64) -> Result<(), GeoError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(GeoError::Parameter(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// `s[0] = x[0]`, `s[t] = alpha * x[t-1] + (1 - alpha) * s[t-1]`.
///
/// `s[t]` is the one-step-ahead estimate of `x[t]`; it depends only on
/// `x[0..t]`.
pub fn ses_smooth(series: &TimeSeries, alpha: f64) -> Result<TimeSeries, GeoError> {
    check_alpha(alpha)?;
    let x = series.values();
    if x.is_empty() {
        return Err(GeoError::EmptySeries);
    }
    let mut s = Vec::with_capacity(x.len());
    s.push(x[0]);
    for t in 1..x.len() {
        s.push(alpha * x[t - 1] + (1.0 - alpha) * s[t - 1]);
    }
    Ok(series.with_values(s))
}

/// Bootstrapped SES forecast: every step beyond the data reuses the last
/// observation `x[T]`, starting from the smoothed state at `T`. The output
/// grid continues the input grid.
pub fn ses_forecast(series: &TimeSeries, alpha: f64, horizon: usize) -> Result<TimeSeries, GeoError> {
    if horizon == 0 {
        return Err(GeoError::Parameter("horizon must be at least 1".into()));
    }
    let smoothed = ses_smooth(series, alpha)?;
    let last_obs = *series.values().last().expect("non-empty checked by ses_smooth");
    let mut state = *smoothed.values().last().expect("same length");
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        state = alpha * last_obs + (1.0 - alpha) * state;
        out.push(state);
    }
    TimeSeries::new(series.end(), series.period_s(), out)
}

/// SES forecast plus an additive zero-mean Gaussian drift with standard
/// deviation `drift_sigma`. `drift_sigma == 0` returns the SES forecast.
pub fn theta_forecast(
    series: &TimeSeries,
    alpha: f64,
    drift_sigma: f64,
    seed: u64,
    horizon: usize,
) -> Result<TimeSeries, GeoError> {
    if !(drift_sigma >= 0.0) {
        return Err(GeoError::Parameter(format!("drift_sigma must be >= 0, got {drift_sigma}")));
    }
    let base = ses_forecast(series, alpha, horizon)?;
    if drift_sigma == 0.0 {
        return Ok(base);
    }
    let normal = Normal::new(0.0, drift_sigma).expect("sigma validated");
    let mut rng = rng::stream(seed);
    let values = base.values().iter().map(|v| v + normal.sample(&mut rng)).collect();
    Ok(base.with_values(values))
}

/// Grid search over alpha in {0.05, 0.10, ..., 0.95} minimizing in-sample
/// one-step squared error. Ties keep the smaller alpha.
pub fn fit_ses_alpha(series: &TimeSeries) -> Result<f64, GeoError> {
    if series.is_empty() {
        return Err(GeoError::EmptySeries);
    }
    let mut best = (f64::INFINITY, 0.05);
    for k in 1..=19 {
        let alpha = k as f64 * 0.05;
        let s = ses_smooth(series, alpha)?;
        let sse: f64 = series
            .values()
            .iter()
            .zip(s.values())
            .skip(1)
            .map(|(x, f)| (x - f).powi(2))
            .sum();
        if sse < best.0 {
            best = (sse, alpha);
        }
    }
    Ok(best.1)
}

/// Mean absolute percentage error, as a fraction (0.1 = 10 %).
pub fn mape(actual: &TimeSeries, forecast: &TimeSeries) -> Result<f64, GeoError> {
    if actual.len() != forecast.len() {
        return Err(GeoError::Alignment(format!(
            "actual has {} values, forecast {}",
            actual.len(),
            forecast.len()
        )));
    }
    if actual.is_empty() {
        return Err(GeoError::EmptySeries);
    }
    let mut total = 0.0;
    for (i, (a, f)) in actual.values().iter().zip(forecast.values()).enumerate() {
        if *a == 0.0 {
            return Err(GeoError::ZeroActual(i));
        }
        total += ((a - f) / a).abs();
    }
    Ok(total / actual.len() as f64)
}

/// Replaces every value with an independent draw from `N(x_t, sigma^2)`.
pub fn perturb_forecast(series: &TimeSeries, spec: &ForecastErrorSpec) -> TimeSeries {
    if spec.sigma_pred <= 0.0 {
        return series.clone();
    }
    let normal = Normal::new(0.0, spec.sigma_pred).expect("sigma is finite and positive");
    let mut rng = rng::stream(spec.seed);
    series.with_values(series.values().iter().map(|x| x + normal.sample(&mut rng)).collect())
}
