use std::f64::consts::PI;

/// Speed of light in vacuum, m/s (exact).
pub const C0: f64 = 299_792_458.0;
/// Vacuum permeability, H/m (CODATA 2018).
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Free-space constants at one operating frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub c0: f64,
    pub eps0: f64,
    pub mu0: f64,
    pub frequency: f64,
    pub omega: f64,
    pub k0: f64,
    pub lambda0: f64,
    pub eta0: f64,
}

impl PhysicalConstants {
    pub fn at_frequency(frequency: f64) -> crate::Result<Self> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(crate::Error::InvalidArgument(format!(
                "frequency must be positive, got {frequency}"
            )));
        }
        let eps0 = 1.0 / (MU0 * C0 * C0);
        let lambda0 = C0 / frequency;
        Ok(Self {
            c0: C0,
            eps0,
            mu0: MU0,
            frequency,
            omega: 2.0 * PI * frequency,
            k0: 2.0 * PI / lambda0,
            lambda0,
            eta0: (MU0 / eps0).sqrt(),
        })
    }
}
