//! Decibel conversions.
//!
//! All engine code works in linear SI units (watts, hertz, seconds, metres).
//! Decibel values appear only at the edges: configuration files, CLI flags and
//! report tables. These helpers are the single place where the conversion
//! happens, so a stray `10.0 * x.log10()` elsewhere is a bug.

/// Converts a dimensionless ratio in dB to its linear value.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a dimensionless linear ratio to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a power in watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}
