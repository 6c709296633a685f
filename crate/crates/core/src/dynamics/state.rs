use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-atom excited populations and coherences at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    /// Time (s).
    pub t: f64,
    /// ρee,n.
    pub excited: Vec<f64>,
    /// ρeg,n.
    pub coherence: Vec<Complex64>,
}

impl MeanFieldState {
    /// All atoms in the ground state.
    pub fn ground(n: usize) -> Self {
        Self {
            t: 0.0,
            excited: vec![0.0; n],
            coherence: vec![Complex64::default(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.excited.len()
    }

    pub fn is_empty(&self) -> bool {
        self.excited.is_empty()
    }

    /// Check 0 ≤ ρee ≤ 1 and |ρeg|² ≤ ρee(1 − ρee) up to `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.excited.len() != self.coherence.len() {
            return Err(Error::domain("population and coherence lengths differ"));
        }
        for (n, (&p, c)) in self.excited.iter().zip(&self.coherence).enumerate() {
            if !(p >= -tol && p <= 1.0 + tol) {
                return Err(Error::domain(format!("atom {n}: ρee = {p} outside [0, 1]")));
            }
            if c.norm_sqr() > p * (1.0 - p) + tol {
                return Err(Error::domain(format!("atom {n}: coherence outside the Bloch ball")));
            }
        }
        Ok(())
    }

    /// Integrator layout: ρee,0..N (real parts) followed by ρeg,0..N.
    pub fn pack(&self) -> Vec<Complex64> {
        self.excited
            .iter()
            .map(|&p| Complex64::new(p, 0.0))
            .chain(self.coherence.iter().copied())
            .collect()
    }

    pub fn unpack(t: f64, y: &[Complex64]) -> Self {
        let n = y.len() / 2;
        Self {
            t,
            excited: y[..n].iter().map(|z| z.re).collect(),
            coherence: y[n..].to_vec(),
        }
    }

    pub fn mean_excited(&self) -> f64 {
        self.excited.iter().sum::<f64>() / self.len().max(1) as f64
    }

    /// Bloch vector of atom `n` with the drive propagation phase e^{i k·r}
    /// removed.
    pub fn bloch_vector(&self, n: usize, wavevector: &Vector3<f64>, position: &Vector3<f64>) -> BlochVector {
        let stripped = self.coherence[n] * Complex64::from_polar(1.0, -wavevector.dot(position));
        BlochVector::from_coherence(self.excited[n], stripped)
    }
}

/// (σˣ, σʸ, σᶻ) in the propagation-phase-stripped frame.
///
/// A resonant pulse of positive Ω rotates the ground state about +x towards
/// +σʸ; the lowering-operator expectation is identified with −ρeg for that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn from_coherence(excited: f64, stripped_coherence: Complex64) -> Self {
        let lowering = -stripped_coherence;
        Self {
            x: 2.0 * lowering.re,
            y: -2.0 * lowering.im,
            z: 2.0 * excited - 1.0,
        }
    }

    /// Azimuthal phase atan2(σʸ, σˣ).
    pub fn phase(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn length(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_roundtrip() {
        let s = MeanFieldState {
            t: 1.0,
            excited: vec![0.1, 0.2],
            coherence: vec![Complex64::new(0.1, -0.2), Complex64::new(0.0, 0.3)],
        };
        assert_eq!(MeanFieldState::unpack(1.0, &s.pack()), s);
    }

    #[test]
    fn bloch_ball_validation() {
        let mut s = MeanFieldState::ground(1);
        s.validate(1e-9).unwrap();
        s.excited[0] = 0.5;
        s.coherence[0] = Complex64::new(0.0, 0.5);
        s.validate(1e-9).unwrap();
        s.coherence[0] = Complex64::new(0.0, 0.6);
        assert!(s.validate(1e-9).is_err());
        s.excited[0] = 1.2;
        assert!(s.validate(1e-9).is_err());
    }

    #[test]
    fn bloch_vector_after_quarter_rotation() {
        // ρeg = i/2 sinθ for a resonant pulse of area θ = π/2.
        let b = BlochVector::from_coherence(0.5, Complex64::new(0.0, 0.5));
        assert!((b.y - 1.0).abs() < 1e-15 && b.x.abs() < 1e-15 && b.z.abs() < 1e-15);
        assert!((b.length() - 1.0).abs() < 1e-15);
        assert!((b.phase() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
