//! Physical constants (CODATA 2018, SI).

use std::f64::consts::PI;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const K_B: f64 = 1.380_649e-23;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of ¹⁶²Dy.
pub const DY162_MASS: f64 = 161.926_805_6 * ATOMIC_MASS_UNIT;

/// Wavelength of the 626 nm intercombination line.
pub const DY_626_WAVELENGTH: f64 = 626.0e-9;
/// Linewidth of the 626 nm line, Γ = 2π·135 kHz.
pub const DY_626_LINEWIDTH: f64 = 2.0 * PI * 135.0e3;
/// Linewidth of the 421 nm line, Γ = 2π·32.5 MHz.
pub const DY_421_LINEWIDTH: f64 = 2.0 * PI * 32.5e6;

/// Convert an ordinary frequency in Hz to an angular frequency.
#[inline]
pub fn hz_to_rad(f: f64) -> f64 {
    2.0 * PI * f
}

#[inline]
pub fn rad_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}
