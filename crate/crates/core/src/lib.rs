//! Mean-field simulation of collective light scattering in one-dimensional
//! arrays of two-level atoms.
//!
//! The crate is organised bottom-up:
//!
//! * [`physics`]: transition data, the free-space Green's tensor, the resonant
//!   dipole-dipole potential and coupling matrices.
//! * [`geometry`]: array layout and seeded thermal position sampling.
//! * [`integrator`]: adaptive Dormand-Prince and fixed-step RK4 for complex
//!   state vectors.
//! * [`dynamics`]: coupled optical Bloch equations, the linear-dipole
//!   steady state and Ramsey sequences.
//! * [`analytics`]: closed-form collective shift, line shape and Ramsey shift.
//! * [`fitting`]: Levenberg-Marquardt fits of spectra and Ramsey fringes.
//! * [`readout`]: shelving readout model and the multilevel depump simulation.
//! * [`experiments`]: disorder-averaged pipelines producing plot-ready tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod geometry;
pub mod integrator;
pub mod physics;
pub mod readout;
pub mod report;
pub mod selftest;

pub use error::{Error, Result};
pub use geometry::{ArraySpec, AtomPositions, TrapSpec};
pub use physics::{CouplingMatrix, GreensTensor, Polarization, TransitionSpec};

pub use nalgebra::Vector3;
pub use num_complex::Complex64;
