//! Physical constants and the global unit system (GHz, fF, flux quanta, 2e).

/// Elementary charge in coulomb (exact SI value).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Planck constant in J·s (exact SI value).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// e²/(2h) for a capacitance of 1 fF, expressed in GHz.
///
/// A charging energy matrix in GHz is this constant times the inverse
/// capacitance matrix in fF⁻¹.
pub const CHARGING_GHZ_FF: f64 =
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * PLANCK * 1e-15) / 1e9;

/// Charging energy E_C = e²/2C in GHz for a capacitance in fF.
pub fn charging_energy(capacitance_ff: f64) -> f64 {
    CHARGING_GHZ_FF / capacitance_ff
}

/// Capacitance in fF giving the charging energy `ec_ghz`.
pub fn capacitance_for_charging_energy(ec_ghz: f64) -> f64 {
    CHARGING_GHZ_FF / ec_ghz
}
