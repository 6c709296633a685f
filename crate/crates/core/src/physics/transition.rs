use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{DY162_MASS, DY_626_LINEWIDTH, DY_626_WAVELENGTH, EPSILON_0, HBAR};
use crate::error::{Error, Result};

/// A closed two-level optical transition.
///
/// Only the wavelength, linewidth and mass are stored; the wavevector and the
/// dipole matrix element are derived so they can never disagree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionSpec {
    /// Wavelength (m).
    pub wavelength: f64,
    /// Natural linewidth Γ (rad/s).
    pub linewidth: f64,
    /// Atomic mass (kg).
    pub mass: f64,
}

impl Default for TransitionSpec {
    /// The 626 nm line of ¹⁶²Dy.
    fn default() -> Self {
        Self {
            wavelength: DY_626_WAVELENGTH,
            linewidth: DY_626_LINEWIDTH,
            mass: DY162_MASS,
        }
    }
}

impl TransitionSpec {
    pub fn new(wavelength: f64, linewidth: f64, mass: f64) -> Result<Self> {
        if !(wavelength > 0.0 && linewidth > 0.0 && mass > 0.0) {
            return Err(Error::domain(format!(
                "transition requires positive wavelength, linewidth and mass \
                 (got {wavelength:e}, {linewidth:e}, {mass:e})"
            )));
        }
        Ok(Self {
            wavelength,
            linewidth,
            mass,
        })
    }

    /// Wavevector magnitude k = 2π/λ (1/m).
    #[inline]
    pub fn k(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Squared dipole matrix element d0² = 3π ε0 ħ Γ / k³ (C²m²).
    #[inline]
    pub fn dipole_squared(&self) -> f64 {
        3.0 * PI * EPSILON_0 * HBAR * self.linewidth / self.k().powi(3)
    }

    /// Dipole matrix element d0 (C·m).
    #[inline]
    pub fn dipole(&self) -> f64 {
        self.dipole_squared().sqrt()
    }
}

/// Complex unit polarization vector ε̂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarization(Vector3<Complex64>);

impl Polarization {
    pub fn new(v: Vector3<Complex64>) -> Result<Self> {
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::domain("polarization vector must be non-zero"));
        }
        Ok(Self(v / Complex64::from(norm)))
    }

    /// σ⁻ polarization about `quant_axis`: (ê₁ − iê₂)/√2 with (ê₁, ê₂, q̂)
    /// right-handed. For q̂ = x̂ this is (ŷ − iẑ)/√2.
    pub fn sigma_minus(quant_axis: &Vector3<f64>) -> Result<Self> {
        let q = unit(quant_axis)?;
        let reference = if q.y.abs() < 0.9 { Vector3::y() } else { Vector3::z() };
        let e1 = (reference - q * q.dot(&reference)).normalize();
        let e2 = q.cross(&e1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = e1.map(|c| Complex64::new(c * s, 0.0)) + e2.map(|c| Complex64::new(0.0, -c * s));
        Ok(Self(v))
    }

    #[inline]
    pub fn vector(&self) -> &Vector3<Complex64> {
        &self.0
    }
}

/// Normalise a real 3-vector, rejecting zero or non-finite input.
pub(crate) fn unit(v: &Vector3<f64>) -> Result<Vector3<f64>> {
    let n = v.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::domain(format!("expected a non-zero direction, got {v:?}")));
    }
    Ok(v / n)
}
