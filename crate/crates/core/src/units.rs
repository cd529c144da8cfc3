//! Unit conversions used at the configuration and CSV boundary.

use std::f64::consts::PI;

/// `10^(x/10)`: decibel-milliwatts to milliwatts.
pub fn dbm_to_linear(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn linear_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// A dB ratio (such as an SINR threshold) to a linear ratio.
pub fn db_to_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Intensity of a process that places `count` points on average in a disk of
/// radius `radius_m`, in points per square meter.
pub fn intensity_per_disk(count: f64, radius_m: f64) -> f64 {
    count / (PI * radius_m * radius_m)
}
