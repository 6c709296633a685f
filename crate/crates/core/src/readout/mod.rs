//! Shelving readout: detection-error model and the multilevel depump pulse.

mod clebsch;
mod confusion;
mod depump;

pub use clebsch::{clebsch_gordan, dipole_cg};
pub use confusion::{apply_confusion, correct_populations, shelving_fidelity, ConfusionMatrix, CorrectedPopulation};
pub use depump::{simulate_depump, DepumpCurve, MultilevelSpec};
