use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;

use super::green::{dipole_interaction, MIN_KR};
use super::transition::TransitionSpec;
use crate::constants::HBAR;
use crate::error::{Error, Result};

/// Pairwise resonant dipole-dipole energies V_ij (J) of an array.
///
/// The diagonal carries no physical meaning; it is stored as zero and masked
/// by the accessors.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    v: DMatrix<Complex64>,
}

impl CouplingMatrix {
    /// A matrix with every coupling switched off.
    pub fn zeros(n: usize) -> Self {
        Self {
            v: DMatrix::zeros(n, n),
        }
    }

    pub fn len(&self) -> usize {
        self.v.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// V_ij in joules, `None` on the diagonal.
    pub fn energy(&self, i: usize, j: usize) -> Option<Complex64> {
        (i != j).then(|| self.v[(i, j)])
    }

    /// Coherent exchange J_ij = Re V_ij / ħ (rad/s).
    pub fn exchange(&self, i: usize, j: usize) -> Option<f64> {
        self.energy(i, j).map(|v| v.re / HBAR)
    }

    /// Collective decay Γ_ij = −2 Im V_ij / ħ (rad/s).
    pub fn collective_decay(&self, i: usize, j: usize) -> Option<f64> {
        self.energy(i, j).map(|v| -2.0 * v.im / HBAR)
    }

    /// V/ħ as a dense matrix with zero diagonal (rad/s).
    pub fn rates(&self) -> DMatrix<Complex64> {
        self.v.map(|v| v / HBAR)
    }

    pub fn energies(&self) -> &DMatrix<Complex64> {
        &self.v
    }
}

/// Build V_ij = V_dd(r_i − r_j) for every ordered pair.
pub fn coupling_matrix(
    positions: &[Vector3<f64>],
    quant_axis: &Vector3<f64>,
    spec: &TransitionSpec,
) -> Result<CouplingMatrix> {
    let n = positions.len();
    let mut v = DMatrix::zeros(n, n);
    let k = spec.k();
    for i in 0..n {
        for j in (i + 1)..n {
            let r = positions[i] - positions[j];
            let dist = r.norm();
            if !(k * dist >= MIN_KR) {
                return Err(Error::CoincidentAtoms {
                    first: i,
                    second: j,
                    separation: dist,
                });
            }
            let vij = dipole_interaction(&r, quant_axis, spec)?;
            v[(i, j)] = vij;
            v[(j, i)] = vij;
        }
    }
    Ok(CouplingMatrix { v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{green_tensor, Polarization};
    use approx::assert_relative_eq;

    #[test]
    fn single_atom_has_no_couplings() {
        let c = coupling_matrix(&[Vector3::zeros()], &Vector3::x(), &TransitionSpec::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.energy(0, 0), None);
    }

    #[test]
    fn two_atoms_along_axis_dual_path() {
        let s = TransitionSpec::default();
        let d = 2.0 * s.wavelength;
        let pos = [Vector3::zeros(), Vector3::new(d, 0.0, 0.0)];
        let c = coupling_matrix(&pos, &Vector3::x(), &s).unwrap();
        assert_eq!(c.energy(0, 1), c.energy(1, 0));
        let pol = Polarization::sigma_minus(&Vector3::x()).unwrap();
        let via_green = -s.dipole_squared() * green_tensor(&(pos[0] - pos[1]), &s).unwrap().contract(&pol);
        let v = c.energy(0, 1).unwrap();
        assert!((v - via_green).norm() / v.norm() < 1e-10);
    }

    #[test]
    fn contact_limit_of_collective_decay() {
        let s = TransitionSpec::default();
        let pos = [Vector3::zeros(), Vector3::new(1e-3 / s.k(), 0.0, 0.0)];
        let c = coupling_matrix(&pos, &Vector3::x(), &s).unwrap();
        assert_relative_eq!(c.collective_decay(0, 1).unwrap(), s.linewidth, max_relative = 1e-4);
    }

    #[test]
    fn coincident_atoms_are_reported() {
        let s = TransitionSpec::default();
        let pos = [
            Vector3::zeros(),
            Vector3::new(1e-6, 0.0, 0.0),
            Vector3::new(1e-6, 0.0, 0.0),
        ];
        match coupling_matrix(&pos, &Vector3::x(), &s) {
            Err(Error::CoincidentAtoms { first, second, .. }) => assert_eq!((first, second), (1, 2)),
            other => panic!("expected coincident-atom error, got {other:?}"),
        }
    }

    #[test]
    fn permutation_equivariant() {
        let s = TransitionSpec::default();
        let pos = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.3e-6, 1e-8, -2e-8),
            Vector3::new(2.4e-6, -3e-8, 5e-8),
            Vector3::new(3.9e-6, 2e-8, 1e-8),
        ];
        let perm = [2usize, 0, 3, 1];
        let shuffled: Vec<_> = perm.iter().map(|&p| pos[p]).collect();
        let a = coupling_matrix(&pos, &Vector3::x(), &s).unwrap();
        let b = coupling_matrix(&shuffled, &Vector3::x(), &s).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(b.energy(i, j), a.energy(perm[i], perm[j]));
            }
        }
    }
}
