//! Coupled mean-field optical Bloch equations for an array of two-level atoms.
//!
//! Per atom n, in the frame rotating at the laser frequency,
//!
//! ```text
//! dρee/dt = −Γ ρee + (i/2)(Ω_n ρeg* − Ω_n* ρeg)
//! dρeg/dt = −(Γ/2 + γ⊥ − iΔ) ρeg + (i/2) Ω_n (1 − 2ρee)
//! Ω_n     = Ω(t) e^{i k·r_n} − (2/ħ) Σ_{m≠n} V_nm ρeg,m
//! ```
//!
//! The second term of Ω_n is the field radiated by the other dipoles,
//! (d0/ħ) ε̂*·G(r_n − r_m)·ε̂ · 2ρeg,m d0, written through V = −d0² ε̂*·G·ε̂.

mod drive;
mod linear;
mod obe;
mod ramsey;
mod state;

pub use drive::{DriveSchedule, DriveSegment, Envelope};
pub use linear::{linear_residual, linear_steady_state};
pub use obe::{integrate, DipoleArray, SimOptions, Trajectory};
pub use ramsey::{ramsey_sequence, RamseyOutcome, RamseyPulses};
pub use state::{BlochVector, MeanFieldState};
