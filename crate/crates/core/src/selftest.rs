//! Built-in oracle checks run by `lambshift selftest`.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::{instantaneous_precession, line_shape, ramsey_shift, LineShapeParams, RamseyShiftParams};
use crate::dynamics::{
    integrate, linear_steady_state, DipoleArray, DriveSchedule, DriveSegment, MeanFieldState, SimOptions,
};
use crate::error::Result;
use crate::fitting::{fit_line, fit_ramsey_fringes, ScanResult};
use crate::geometry::{realization_rng, ArraySpec};
use crate::physics::{dipole_interaction, green_tensor, Polarization, TransitionSpec};

/// One named oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Measured mismatch.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Largest relative difference between the closed-form potential and
/// −d0² ε̂*·G·ε̂ over `samples` random displacements with kr in [0.5, 50]
/// and random quantization axes.
pub fn green_identity_mismatch(samples: usize, seed: u64) -> Result<f64> {
    let spec = TransitionSpec::default();
    let mut rng = realization_rng(seed, 0);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let dir = random_unit(&mut rng);
        let q = random_unit(&mut rng);
        let kr = rng.random_range(0.5..50.0);
        let r = dir * (kr / spec.k());
        let v = dipole_interaction(&r, &q, &spec)?;
        let pol = Polarization::sigma_minus(&q)?;
        let via_green = -spec.dipole_squared() * green_tensor(&r, &spec)?.contract(&pol);
        worst = worst.max((v - via_green).norm() / v.norm());
    }
    Ok(worst)
}

fn random_unit<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Largest per-atom relative difference between the weakly driven mean-field
/// coherences after `gamma_t`/Γ and the dense linear solve, for an ideal
/// chain along x̂ driven along x̂ at Ω = 0.01Γ, Δ = 0.
pub fn linear_oracle_mismatch(n_atoms: usize, spacing_wavelengths: f64, gamma_t: f64) -> Result<f64> {
    let spec = TransitionSpec::default();
    let g = spec.linewidth;
    let sites = ArraySpec::new(n_atoms, spacing_wavelengths * spec.wavelength)?.ideal_sites();
    let array = DipoleArray::new(&sites, Vector3::x(), spec)?;
    let drive = DriveSegment::rectangular(0.01 * g, 0.0, Vector3::x(), gamma_t / g);
    let linear = linear_steady_state(&array, &drive, true)?;
    let traj = integrate(
        &MeanFieldState::ground(n_atoms),
        &DriveSchedule::single(drive)?,
        &array,
        &SimOptions::default(),
    )?;
    Ok(traj
        .last()
        .coherence
        .iter()
        .zip(&linear)
        .map(|(b, l)| (b - l).norm() / l.norm())
        .fold(0.0, f64::max))
}

/// Relative difference between the time average of the instantaneous
/// precession rate and minus the Ramsey fringe shift, by Simpson quadrature.
pub fn ramsey_quadrature_mismatch() -> Result<f64> {
    let mut worst = 0.0f64;
    for area in [0.25 * PI, 0.5 * PI, 0.75 * PI] {
        for gt in [0.1, 0.7, 1.5, 2.7, 5.0] {
            let p = RamseyShiftParams {
                delta0: -1.0,
                pulse_area: area,
                linewidth: 1.0,
            };
            let n = 2000;
            let h = gt / n as f64;
            let mut sum = 0.0;
            for i in 0..=n {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                sum += w * instantaneous_precession(&p, i as f64 * h)?;
            }
            let average = sum * h / 3.0 / gt;
            let shift = ramsey_shift(&p, gt)?;
            worst = worst.max((average + shift).abs() / shift.abs().max(1e-3));
        }
    }
    Ok(worst)
}

/// Absolute error (units of Γ) of δ_spectro recovered from a noise-free
/// synthetic line.
pub fn line_fit_roundtrip() -> Result<f64> {
    let truth = LineShapeParams {
        delta: 0.04,
        gamma: -0.02,
        rabi: 0.5,
        linewidth: 1.0,
    };
    let x: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
    let y: Vec<f64> = x.iter().map(|&d| line_shape(d, &truth)).collect();
    let fit = fit_line(&ScanResult::from_values(&x, &y, None)?, truth.rabi, 1.0, 4.0)?;
    Ok((fit.center - truth.delta).abs())
}

/// Relative error of the fringe centre recovered from noise-free synthetic
/// fringes.
pub fn fringe_fit_roundtrip() -> Result<f64> {
    let wait = 1.3;
    let center = 0.37;
    let half = 1.5 * TAU / wait;
    let x: Vec<f64> = (0..41).map(|i| -half + 2.0 * half * i as f64 / 40.0).collect();
    let y: Vec<f64> = x.iter().map(|&d| 0.5 + 0.3 * ((d - center) * wait).cos()).collect();
    let fit = fit_ramsey_fringes(&ScanResult::from_values(&x, &y, None)?, wait)?;
    Ok((fit.center - center).abs() / center)
}

/// Run every oracle check.
pub fn run_selftest() -> Result<SelfTestReport> {
    Ok(SelfTestReport {
        checks: vec![
            Check::new("green_identity", green_identity_mismatch(1000, 7)?, 1e-10),
            Check::new("linear_oracle", linear_oracle_mismatch(10, 2.0, 60.0)?, 1e-2),
            Check::new("ramsey_quadrature", ramsey_quadrature_mismatch()?, 1e-8),
            Check::new("line_fit_roundtrip", line_fit_roundtrip()?, 1e-3),
            Check::new("fringe_fit_roundtrip", fringe_fit_roundtrip()?, 2e-2),
        ],
    })
}
