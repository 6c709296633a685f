//! Array layout, thermal disorder and reproducible position sampling.
//!
//! Positions for realization `i` of seed `s` come from a ChaCha8 stream: the
//! key is expanded from `s` with `SeedableRng::seed_from_u64` and the stream
//! number is set to `i`. Any realization can therefore be regenerated on its
//! own, in any order and on any thread.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constants::K_B;
use crate::error::{Error, Result};
use crate::physics::TransitionSpec;

/// Regular chain of tweezers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub n_atoms: usize,
    /// Site spacing (m).
    pub spacing: f64,
    /// Unit direction of the chain.
    pub axis: Vector3<f64>,
}

impl ArraySpec {
    pub fn new(n_atoms: usize, spacing: f64) -> Result<Self> {
        let spec = Self {
            n_atoms,
            spacing,
            axis: Vector3::x(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_axis(mut self, axis: Vector3<f64>) -> Result<Self> {
        self.axis = crate::physics::transition_unit(&axis)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::domain("array needs at least one atom"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::domain(format!(
                "spacing must be positive, got {:e}",
                self.spacing
            )));
        }
        if (self.axis.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::domain("array axis must be a unit vector"));
        }
        Ok(())
    }

    /// Ideal site `i`: i·d·axis.
    pub fn site(&self, i: usize) -> Vector3<f64> {
        self.axis * (i as f64 * self.spacing)
    }

    pub fn ideal_sites(&self) -> Vec<Vector3<f64>> {
        (0..self.n_atoms).map(|i| self.site(i)).collect()
    }
}

/// Harmonic trap and temperature setting the thermal position spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapSpec {
    /// Radial angular trap frequency ω_r (rad/s).
    pub radial_frequency: f64,
    /// Axial angular trap frequency ω_z (rad/s), along `tweezer_axis`.
    pub axial_frequency: f64,
    /// Temperature (K).
    pub temperature: f64,
    /// Mass (kg).
    pub mass: f64,
    /// Tweezer propagation (weak, axial) axis.
    pub tweezer_axis: Vector3<f64>,
}

impl TrapSpec {
    pub fn new(radial_frequency: f64, axial_frequency: f64, temperature: f64, mass: f64) -> Result<Self> {
        let trap = Self {
            radial_frequency,
            axial_frequency,
            temperature,
            mass,
            tweezer_axis: Vector3::z(),
        };
        trap.sigmas()?;
        Ok(trap)
    }

    /// Bare tweezers: ω_r = 2π·50 kHz, ω_z = 2π·7 kHz, T = 5.5 µK.
    pub fn tweezer_only(transition: &TransitionSpec) -> Self {
        Self {
            radial_frequency: 2.0 * std::f64::consts::PI * 50e3,
            axial_frequency: 2.0 * std::f64::consts::PI * 7e3,
            temperature: 5.5e-6,
            mass: transition.mass,
            tweezer_axis: Vector3::z(),
        }
    }

    /// Tweezers plus the shallow-angle lattice: ω_z = 2π·35 kHz, T = 8.5 µK.
    pub fn with_lattice(transition: &TransitionSpec) -> Self {
        Self {
            radial_frequency: 2.0 * std::f64::consts::PI * 50e3,
            axial_frequency: 2.0 * std::f64::consts::PI * 35e3,
            temperature: 8.5e-6,
            mass: transition.mass,
            tweezer_axis: Vector3::z(),
        }
    }

    /// (σ_radial, σ_axial) in metres.
    pub fn sigmas(&self) -> Result<(f64, f64)> {
        Ok((
            thermal_sigma(self.temperature, self.radial_frequency, self.mass)?,
            thermal_sigma(self.temperature, self.axial_frequency, self.mass)?,
        ))
    }
}

/// Width of the Boltzmann distribution exp(−mω²x²/2k_BT): sqrt(k_B T/(m ω²)).
pub fn thermal_sigma(temperature: f64, omega: f64, mass: f64) -> Result<f64> {
    if !(temperature > 0.0 && omega > 0.0 && mass > 0.0) {
        return Err(Error::domain(format!(
            "thermal width needs positive T, ω and m (got {temperature:e}, {omega:e}, {mass:e})"
        )));
    }
    Ok((K_B * temperature / mass).sqrt() / omega)
}

/// Spacing of two beams of wavelength `wavelength` crossing at ±`half_angle`.
pub fn lattice_spacing(wavelength: f64, half_angle: f64) -> Result<f64> {
    if !(half_angle > 0.0 && half_angle <= FRAC_PI_2) {
        return Err(Error::domain(format!(
            "lattice half-angle must lie in (0, π/2], got {half_angle}"
        )));
    }
    if !(wavelength > 0.0) {
        return Err(Error::domain("lattice wavelength must be positive"));
    }
    Ok(wavelength / (2.0 * half_angle.sin()))
}

/// One realization of atom positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomPositions {
    pub positions: Vec<Vector3<f64>>,
    pub seed: u64,
    pub realization: u64,
}

impl AtomPositions {
    pub fn ideal(array: &ArraySpec) -> Self {
        Self {
            positions: array.ideal_sites(),
            seed: 0,
            realization: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Shift every atom by `offset`.
    pub fn translated(&self, offset: &Vector3<f64>) -> Self {
        Self {
            positions: self.positions.iter().map(|p| p + offset).collect(),
            ..self.clone()
        }
    }

    /// CSV with columns `index,x_m,y_m,z_m`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "x_m", "y_m", "z_m"])?;
        for (i, p) in self.positions.iter().enumerate() {
            w.write_record([
                i.to_string(),
                format!("{:e}", p.x),
                format!("{:e}", p.y),
                format!("{:e}", p.z),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The RNG stream for realization `realization` of `seed`.
pub fn realization_rng(seed: u64, realization: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization);
    rng
}

/// Two unit vectors spanning the plane transverse to `axis`.
fn transverse_frame(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let reference = if axis.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (reference - axis * axis.dot(&reference)).normalize();
    let e2 = axis.cross(&e1);
    (e1, e2)
}

/// Ideal sites plus Gaussian thermal displacements: σ_r on the two axes
/// transverse to the tweezer axis and σ_z along it. `trap = None` returns the
/// ideal lattice.
///
/// Three standard normals are drawn per atom, in atom order, for
/// (transverse 1, transverse 2, axial).
pub fn sample_positions(
    array: &ArraySpec,
    trap: Option<&TrapSpec>,
    seed: u64,
    realization: u64,
) -> Result<AtomPositions> {
    array.validate()?;
    let mut positions = array.ideal_sites();
    if let Some(trap) = trap {
        let (sigma_r, sigma_z) = trap.sigmas()?;
        let axial = crate::physics::transition_unit(&trap.tweezer_axis)?;
        let (e1, e2) = transverse_frame(&axial);
        let mut rng = realization_rng(seed, realization);
        for p in positions.iter_mut() {
            let n1: f64 = rng.sample(StandardNormal);
            let n2: f64 = rng.sample(StandardNormal);
            let n3: f64 = rng.sample(StandardNormal);
            *p += e1 * (sigma_r * n1) + e2 * (sigma_r * n2) + axial * (sigma_z * n3);
        }
    }
    Ok(AtomPositions {
        positions,
        seed,
        realization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn dy() -> f64 {
        TransitionSpec::default().mass
    }

    #[test]
    fn thermal_widths_of_the_tweezers() {
        let s = thermal_sigma(5.5e-6, 2.0 * PI * 50e3, dy()).unwrap();
        assert!((s - 53e-9).abs() < 1e-9, "{s:e}");
        let s = thermal_sigma(5.5e-6, 2.0 * PI * 7e3, dy()).unwrap();
        assert!((s - 380e-9).abs() < 5e-9, "{s:e}");
        let s = thermal_sigma(8.5e-6, 2.0 * PI * 35e3, dy()).unwrap();
        assert!((s - 95e-9).abs() < 1e-9, "{s:e}");
        assert!(thermal_sigma(0.0, 1.0, 1.0).is_err());
        assert!(thermal_sigma(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn lattice_spacing_values() {
        let d = lattice_spacing(532e-9, 5f64.to_radians()).unwrap();
        assert!((d - 3.05e-6).abs() < 0.01e-6);
        assert_relative_eq!(
            lattice_spacing(532e-9, FRAC_PI_2).unwrap(),
            266e-9,
            max_relative = 1e-15
        );
        assert_relative_eq!(lattice_spacing(532e-9, PI / 6.0).unwrap(), 532e-9, max_relative = 1e-14);
        assert!(lattice_spacing(532e-9, 0.0).is_err());
        assert!(lattice_spacing(532e-9, 2.0).is_err());
    }

    #[test]
    fn no_trap_gives_ideal_lattice() {
        let a = ArraySpec::new(5, 1.25e-6).unwrap();
        let p = sample_positions(&a, None, 3, 4).unwrap();
        assert_eq!(p.positions, a.ideal_sites());
    }

    #[test]
    fn sampling_is_reproducible_and_addressable() {
        let a = ArraySpec::new(30, 1.4e-6).unwrap();
        let trap = TrapSpec::tweezer_only(&TransitionSpec::default());
        let p1 = sample_positions(&a, Some(&trap), 7, 3).unwrap();
        let p2 = sample_positions(&a, Some(&trap), 7, 3).unwrap();
        assert_eq!(p1, p2);
        let other = sample_positions(&a, Some(&trap), 7, 4).unwrap();
        assert_ne!(p1.positions, other.positions);
        let other_seed = sample_positions(&a, Some(&trap), 8, 3).unwrap();
        assert_ne!(p1.positions, other_seed.positions);
    }

    #[test]
    fn empirical_moments_match_thermal_widths() {
        let n_atoms = 1000;
        let reps = 100u64;
        let a = ArraySpec::new(n_atoms, 2e-6).unwrap();
        let trap = TrapSpec::tweezer_only(&TransitionSpec::default());
        let (sr, sz) = trap.sigmas().unwrap();
        let mut sum = Vector3::zeros();
        let mut sum_sq = Vector3::zeros();
        for r in 0..reps {
            let p = sample_positions(&a, Some(&trap), 11, r).unwrap();
            for (i, x) in p.positions.iter().enumerate() {
                let dx = x - a.site(i);
                sum += dx;
                sum_sq += dx.component_mul(&dx);
            }
        }
        let n = (n_atoms as u64 * reps) as f64;
        let sigmas = [sr, sr, sz];
        for ax in 0..3 {
            let mean = sum[ax] / n;
            let std = (sum_sq[ax] / n - mean * mean).sqrt();
            assert!(mean.abs() < 5.0 * sigmas[ax] / n.sqrt(), "axis {ax}: mean {mean:e}");
            assert!((std / sigmas[ax] - 1.0).abs() < 0.02, "axis {ax}: std {std:e}");
        }
    }

    #[test]
    fn csv_export() {
        let a = ArraySpec::new(2, 1e-6).unwrap();
        let mut buf = Vec::new();
        AtomPositions::ideal(&a).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("index,x_m,y_m,z_m"));
        assert_eq!(lines.next(), Some("0,0e0,0e0,0e0"));
        assert_eq!(lines.next(), Some("1,1e-6,0e0,0e0"));
    }
}
