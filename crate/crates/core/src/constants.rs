//! Physical constants (CODATA 2018) and the embedded mercury line data.

use std::f64::consts::PI;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum (m/s).
pub const C: f64 = 2.997_924_58e8;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Atomic mass unit (kg).
pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;
/// Bohr radius (m).
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Atomic mass of mercury used throughout the model (u).
pub const MERCURY_MASS_U: f64 = 200.6;

/// Mercury mass in kg.
pub fn mercury_mass_kg() -> f64 {
    MERCURY_MASS_U * ATOMIC_MASS
}

/// Dipole unit `a₀·e` (C m); line strengths are tabulated in `a₀²e²`.
pub fn dipole_atomic_unit() -> f64 {
    BOHR_RADIUS * ELEMENTARY_CHARGE
}

/// Convert an ordinary frequency in Hz to an angular frequency in rad/s.
pub fn hz_to_angular(f_hz: f64) -> f64 {
    2.0 * PI * f_hz
}

/// Angular frequency (rad/s) of light with the given vacuum wavelength in nm.
pub fn angular_frequency_from_wavelength_nm(lambda_nm: f64) -> f64 {
    2.0 * PI * C / (lambda_nm * 1e-9)
}

/// Vacuum wavenumber (rad/m) for a wavelength in nm.
pub fn wavenumber_from_wavelength_nm(lambda_nm: f64) -> f64 {
    2.0 * PI / (lambda_nm * 1e-9)
}

/// Measured mercury transition data: wavelength (nm), natural linewidth
/// (rad/s), and line strength S = ⟨i‖d̂‖j⟩² (a₀²e²).
pub mod mercury_lines {
    use super::hz_to_angular;

    pub const LAMBDA_AB_NM: f64 = 253.7;
    pub const LAMBDA_CA_NM: f64 = 435.8;
    pub const LAMBDA_CD_NM: f64 = 546.1;
    pub const LAMBDA_CE_NM: f64 = 404.7;

    pub fn gamma_ab() -> f64 {
        hz_to_angular(1.27e6)
    }
    pub fn gamma_ca() -> f64 {
        hz_to_angular(8.86e6)
    }
    pub fn gamma_cd() -> f64 {
        hz_to_angular(7.75e6)
    }
    pub fn gamma_ce() -> f64 {
        hz_to_angular(3.45e6)
    }

    pub const S_AB: f64 = 0.19;
    pub const S_CA: f64 = 6.83;
    pub const S_CD: f64 = 11.8;
    pub const S_CE: f64 = 2.1;
}
