//! Transition data, the dyadic Green's tensor and resonant dipole-dipole
//! couplings.

mod coupling;
mod green;
mod transition;

pub use coupling::{coupling_matrix, CouplingMatrix};
pub use green::{dipole_interaction, green_tensor, GreensTensor, MIN_KR};
pub(crate) use transition::unit as transition_unit;
pub use transition::{Polarization, TransitionSpec};
