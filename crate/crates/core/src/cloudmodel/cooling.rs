//! Temperature-dependent cooling overhead.

/// Partial PUE at outside temperature `temperature_c`.
pub fn ppue(temperature_c: f64) -> f64 {
    7.1705e-5 * temperature_c * temperature_c + 0.0041 * temperature_c + 1.0743
}

/// IT power plus cooling.
pub fn total_power(it_power: f64, temperature_c: f64) -> f64 {
    it_power * ppue(temperature_c)
}
