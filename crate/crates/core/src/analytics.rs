//! Closed-form collective shift, first-order line shape and Ramsey fringe
//! shift. All rates are angular frequencies in rad/s.

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::physics::{coupling_matrix, CouplingMatrix, TransitionSpec};

/// Weak-drive collective shift and width change of a phased array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftPair {
    pub delta0: f64,
    pub gamma0: f64,
}

/// Parameters of the skewed Lorentzian line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineShapeParams {
    pub delta: f64,
    pub gamma: f64,
    pub rabi: f64,
    pub linewidth: f64,
}

impl LineShapeParams {
    /// Saturation-scaled parameters for a drive of Rabi frequency `rabi`.
    pub fn saturated(shift: ShiftPair, rabi: f64, linewidth: f64) -> Self {
        Self {
            delta: saturated_shift(shift.delta0, rabi, linewidth),
            gamma: saturated_shift(shift.gamma0, rabi, linewidth),
            rabi,
            linewidth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseyShiftParams {
    pub delta0: f64,
    pub pulse_area: f64,
    pub linewidth: f64,
}

/// δ⁰ and γ⁰ from the pair sum (1/Nħ) Σ_{n≠m} V(r_n − r_m) e^{−ik·(r_n − r_m)}.
///
/// `drive_direction` need not be normalised; its length is ignored.
pub fn collective_shift0(
    positions: &[Vector3<f64>],
    drive_direction: &Vector3<f64>,
    quant_axis: &Vector3<f64>,
    spec: &TransitionSpec,
) -> Result<ShiftPair> {
    if positions.is_empty() {
        return Err(Error::domain("collective shift needs at least one atom"));
    }
    let couplings = coupling_matrix(positions, quant_axis, spec)?;
    shift_from_couplings(&couplings, positions, drive_direction, spec)
}

/// Same sum as [`collective_shift0`] reusing precomputed couplings.
pub fn shift_from_couplings(
    couplings: &CouplingMatrix,
    positions: &[Vector3<f64>],
    drive_direction: &Vector3<f64>,
    spec: &TransitionSpec,
) -> Result<ShiftPair> {
    let n = positions.len();
    if n == 0 || couplings.len() != n {
        return Err(Error::domain("coupling matrix and positions disagree in size"));
    }
    let norm = drive_direction.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::domain("drive direction must be a non-zero vector"));
    }
    let kvec = drive_direction * (spec.k() / norm);
    let v = couplings.energies();
    let mut sum = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            if a != b {
                let phase = -kvec.dot(&(positions[a] - positions[b]));
                sum += v[(a, b)] * Complex64::from_polar(1.0, phase);
            }
        }
    }
    let avg = sum / (n as f64 * HBAR);
    Ok(ShiftPair {
        delta0: avg.re,
        gamma0: avg.im,
    })
}

/// δ⁰/(1 + 2Ω²/Γ²).
pub fn saturated_shift(delta0: f64, rabi: f64, linewidth: f64) -> f64 {
    delta0 / (1.0 + 2.0 * (rabi / linewidth).powi(2))
}

/// Mean excited population of the array to first order in the interaction.
pub fn line_shape(detuning: f64, p: &LineShapeParams) -> f64 {
    let g = p.linewidth;
    let x = detuning / g;
    let w2 = (p.rabi / g).powi(2);
    let s = 4.0 * x * x + 2.0 * w2;
    let denom = 1.0 + s;
    let skew = 4.0 * (1.0 + 4.0 * x * x) * (1.0 + 2.0 * w2) / (denom * denom);
    w2 / denom * (1.0 + skew * (2.0 * x * p.delta / g + p.gamma / g))
}

/// Detuning of the maximum of `line_shape` in [lo, hi]: the best of 400 grid
/// cells, refined by golden-section search.
pub fn line_peak(p: &LineShapeParams, lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain("peak search needs a finite interval lo < hi"));
    }
    const CELLS: usize = 400;
    let h = (hi - lo) / CELLS as f64;
    let f = |x: f64| line_shape(x, p);
    let best = (0..=CELLS)
        .max_by(|&i, &j| f(lo + i as f64 * h).total_cmp(&f(lo + j as f64 * h)))
        .unwrap_or(0);
    let mut a = (lo + (best as f64 - 1.0) * h).max(lo);
    let mut b = (lo + (best as f64 + 1.0) * h).min(hi);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        if b - a <= 1e-12 * (hi - lo) {
            break;
        }
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(0.5 * (a + b))
}

/// S_θ(T) = 1 − (1 − e^{−ΓT})(1 − cos θ0)/(ΓT), with S_θ(0) = cos θ0.
pub fn ramsey_factor(pulse_area: f64, linewidth: f64, wait_time: f64) -> f64 {
    let x = linewidth * wait_time;
    let avg_decay = if x == 0.0 { 1.0 } else { -(-x).exp_m1() / x };
    1.0 - avg_decay * (1.0 - pulse_area.cos())
}

/// Displacement of the central Ramsey fringe, δ⁰·S_θ(T_R).
pub fn ramsey_shift(p: &RamseyShiftParams, wait_time: f64) -> Result<f64> {
    if !(wait_time >= 0.0) {
        return Err(Error::domain("wait time must be non-negative"));
    }
    Ok(p.delta0 * ramsey_factor(p.pulse_area, p.linewidth, wait_time))
}

/// Precession rate −δ⁰ cos θ(t) with cos θ(t) = 1 − (1 − cos θ0) e^{−Γt}.
pub fn instantaneous_precession(p: &RamseyShiftParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain("time must be non-negative"));
    }
    let cos_theta = 1.0 - (1.0 - p.pulse_area.cos()) * (-p.linewidth * t).exp();
    Ok(-p.delta0 * cos_theta)
}
