use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::drive::DriveSegment;
use super::obe::DipoleArray;
use crate::error::{Error, Result};

fn assemble(
    array: &DipoleArray,
    drive: &DriveSegment,
    include_interactions: bool,
) -> (DMatrix<Complex64>, DVector<Complex64>) {
    let n = array.len();
    let gamma = array.transition().linewidth;
    let diag = Complex64::new(drive.detuning, 0.5 * gamma);
    let mut a = if include_interactions {
        -array.couplings().rates()
    } else {
        DMatrix::zeros(n, n)
    };
    for i in 0..n {
        a[(i, i)] = diag;
    }
    let b = DVector::from_iterator(
        n,
        array
            .drive_phases(&drive.direction)
            .into_iter()
            .map(|p| p * (-0.5 * drive.rabi)),
    );
    (a, b)
}

/// Weak-drive steady state of the coherences, treating every atom as a
/// linear dipole (ρee ≈ 0):
///
/// (Δ + iΓ/2) β_n − Σ_{m≠n} (V_nm/ħ) β_m = −Ω e^{i k·r_n} / 2
pub fn linear_steady_state(
    array: &DipoleArray,
    drive: &DriveSegment,
    include_interactions: bool,
) -> Result<Vec<Complex64>> {
    let (a, b) = assemble(array, drive, include_interactions);
    let x = a.lu().solve(&b).ok_or(Error::Singular)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(x.iter().copied().collect())
}

/// ‖Aβ − b‖ / ‖b‖ for the linear system solved by [`linear_steady_state`].
pub fn linear_residual(
    array: &DipoleArray,
    drive: &DriveSegment,
    include_interactions: bool,
    beta: &[Complex64],
) -> f64 {
    let (a, b) = assemble(array, drive, include_interactions);
    let x = DVector::from_column_slice(beta);
    (a * x - &b).norm() / b.norm()
}
