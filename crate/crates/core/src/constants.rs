//! CODATA 2018 exact / recommended values, SI units.

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Elementary charge (C).
pub const Q_E: f64 = 1.602_176_634e-19;
/// Impedance of free space, rounded the way RF texts usually quote it (Ω).
pub const Z_AIR: f64 = 377.0;

pub const TWO_PI: f64 = std::f64::consts::TAU;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn watt_to_dbm(p: f64) -> f64 {
    linear_to_db(p / 1e-3)
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    1e-3 * db_to_linear(dbm)
}
