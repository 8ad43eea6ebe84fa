//! Physical constants (SI, CODATA 2018 exact values).

/// Speed of light in vacuum \[m/s\].
pub const C_LIGHT: f64 = 299_792_458.0;

/// Planck constant \[J·s\].
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Boltzmann constant \[J/K\].
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Convert a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Convert a power in watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Convert a power ratio to decibels.
pub fn ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Convert decibels to a power ratio.
pub fn db_to_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
