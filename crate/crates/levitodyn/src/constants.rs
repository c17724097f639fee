use serde::{Deserialize, Serialize};

/// Physical constants in SI units.
///
/// Defaults are CODATA values. The fields are configurable only so that
/// nondimensionalized test runs can set them to 1; production configs should
/// leave them at the defaults.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Speed of light, m/s.
    pub c: f64,
    /// Vacuum permittivity, F/m.
    pub epsilon_0: f64,
    /// Gravitational acceleration, m/s².
    pub g: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.054_571_817e-34,
            k_b: 1.380_649e-23,
            c: 2.997_924_58e8,
            epsilon_0: 8.854_187_8188e-12,
            g: 9.806_65,
        }
    }
}

impl PhysicalConstants {
    /// All constants set to one, with gravity off. Used by scaled test runs.
    pub fn nondimensional() -> Self {
        Self {
            hbar: 1.0,
            k_b: 1.0,
            c: 1.0,
            epsilon_0: 1.0,
            g: 0.0,
        }
    }
}
