use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use super::transition::{unit, Polarization, TransitionSpec};
use crate::constants::{EPSILON_0, HBAR};
use crate::error::{Error, Result};

/// Smallest accepted k·r. Closer pairs are rejected instead of regularised.
pub const MIN_KR: f64 = 1e-6;

/// Free-space dyadic Green's tensor, in SI units (the field of a unit dipole).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensTensor(pub Matrix3<Complex64>);

impl GreensTensor {
    /// ε̂*·G·ε̂.
    pub fn contract(&self, pol: &Polarization) -> Complex64 {
        let e = pol.vector();
        let ge = self.0 * e;
        e.iter().zip(ge.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// G·ε̂, the field direction radiated by a dipole along ε̂.
    pub fn apply(&self, pol: &Polarization) -> Vector3<Complex64> {
        self.0 * pol.vector()
    }
}

fn checked_kr(r: &Vector3<f64>, spec: &TransitionSpec) -> Result<(f64, f64)> {
    let dist = r.norm();
    let kr = spec.k() * dist;
    if !(kr >= MIN_KR) || !kr.is_finite() {
        return Err(Error::domain(format!(
            "displacement too small for the point-dipole kernel (k·r = {kr:e} < {MIN_KR:e})"
        )));
    }
    Ok((dist, kr))
}

/// G(r) = (k³/4πε0) e^{ikr} [(1/kr + i/(kr)² − 1/(kr)³) I
///                          + (−1/kr − 3i/(kr)² + 3/(kr)³) r̂⊗r̂]
pub fn green_tensor(r: &Vector3<f64>, spec: &TransitionSpec) -> Result<GreensTensor> {
    let (dist, kr) = checked_kr(r, spec)?;
    let k = spec.k();
    let prefactor = Complex64::from_polar(k.powi(3) / (4.0 * PI * EPSILON_0), kr);
    let inv = 1.0 / kr;
    let inv2 = inv * inv;
    let inv3 = inv2 * inv;
    let a = prefactor * Complex64::new(inv - inv3, inv2);
    let b = prefactor * Complex64::new(-inv + 3.0 * inv3, -3.0 * inv2);
    let rhat = r / dist;
    let m = Matrix3::from_fn(|i, j| {
        let diag = if i == j { a } else { Complex64::new(0.0, 0.0) };
        diag + b * (rhat[i] * rhat[j])
    });
    Ok(GreensTensor(m))
}

/// (v cos v − sin v)/v³ evaluated without cancellation near v = 0.
fn near_field_sine(v: f64) -> f64 {
    if v < 0.2 {
        let v2 = v * v;
        // Σ_{n≥1} (−1)^n 2n v^{2n−2} / (2n+1)!
        -1.0 / 3.0 + v2 * (1.0 / 30.0 + v2 * (-1.0 / 840.0 + v2 * (1.0 / 45_360.0 - v2 / 3_991_680.0)))
    } else {
        (v * v.cos() - v.sin()) / v.powi(3)
    }
}

/// Resonant dipole-dipole interaction between two σ⁻ dipoles separated by `r`,
/// with the quantization axis `quant_axis` (J).
///
/// V(r) = −(3Γħ/8)(e^{iv}/v)[ζ²+1 + (3ζ²−1)(i/v − 1/v²)], v = kr, ζ = cos∠(q̂, r).
///
/// The imaginary part is summed in a form that stays accurate for v → 0, so
/// that −2 Im V/ħ tends to Γ instead of drowning in round-off.
pub fn dipole_interaction(r: &Vector3<f64>, quant_axis: &Vector3<f64>, spec: &TransitionSpec) -> Result<Complex64> {
    let (dist, v) = checked_kr(r, spec)?;
    let q = unit(quant_axis)?;
    let zeta = q.dot(r) / dist;
    let z2 = zeta * zeta;
    let a = z2 + 1.0;
    let c = 3.0 * z2 - 1.0;
    let (s, co) = v.sin_cos();
    let re = a * co / v - c * (co + v * s) / v.powi(3);
    let im = a * s / v + c * near_field_sine(v);
    Ok(Complex64::new(re, im) * (-3.0 * spec.linewidth * HBAR / 8.0))
}
