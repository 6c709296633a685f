use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::drive::{DriveSchedule, DriveSegment};
use super::obe::{integrate, DipoleArray, SimOptions};
use super::state::{BlochVector, MeanFieldState};
use crate::error::{Error, Result};

/// Two identical rectangular pulses separated by free evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseyPulses {
    /// Pulse area θ0 (rad).
    pub pulse_area: f64,
    /// Free evolution time T_R between the pulses (s).
    pub wait_time: f64,
    /// Laser detuning Δ_L (rad/s), applied throughout.
    pub detuning: f64,
    /// Rabi frequency during the pulses (rad/s).
    pub pulse_rabi: f64,
    pub direction: Vector3<f64>,
}

impl RamseyPulses {
    pub fn pulse_duration(&self) -> f64 {
        self.pulse_area / self.pulse_rabi
    }

    fn validate(&self) -> Result<()> {
        if !(self.pulse_rabi > 0.0) {
            return Err(Error::domain("Ramsey pulse Rabi frequency must be positive"));
        }
        if !(self.pulse_area >= 0.0 && self.wait_time >= 0.0) {
            return Err(Error::domain("pulse area and wait time must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyOutcome {
    pub after_first_pulse: MeanFieldState,
    /// End of the free evolution, just before the second pulse.
    pub before_second_pulse: MeanFieldState,
    pub final_state: MeanFieldState,
}

impl RamseyOutcome {
    /// Per-atom Bloch vectors at the end of the free evolution.
    pub fn mid_sequence_bloch(&self, array: &DipoleArray, direction: &Vector3<f64>) -> Vec<BlochVector> {
        let kvec = array.wavevector(direction);
        (0..array.len())
            .map(|n| self.before_second_pulse.bloch_vector(n, &kvec, &array.positions()[n]))
            .collect()
    }
}

fn run_segment(
    state: MeanFieldState,
    seg: DriveSegment,
    array: &DipoleArray,
    opts: &SimOptions,
) -> Result<MeanFieldState> {
    if seg.duration == 0.0 {
        return Ok(state);
    }
    let traj = integrate(&state, &DriveSchedule::single(seg)?, array, opts)?;
    Ok(traj.last().clone())
}

/// Pulse θ0, free evolution for T_R with interactions, pulse θ0, starting
/// from the ground state.
pub fn ramsey_sequence(pulses: &RamseyPulses, array: &DipoleArray, opts: &SimOptions) -> Result<RamseyOutcome> {
    pulses.validate()?;
    let pulse = DriveSegment::rectangular(
        pulses.pulse_rabi,
        pulses.detuning,
        pulses.direction,
        pulses.pulse_duration(),
    );
    let free = DriveSegment::free(pulses.detuning, pulses.direction, pulses.wait_time);
    let opts = SimOptions {
        sample_interval: None,
        ..*opts
    };
    let after_first_pulse = run_segment(MeanFieldState::ground(array.len()), pulse, array, &opts)?;
    let before_second_pulse = run_segment(after_first_pulse.clone(), free, array, &opts)?;
    let final_state = run_segment(before_second_pulse.clone(), pulse, array, &opts)?;
    Ok(RamseyOutcome {
        after_first_pulse,
        before_second_pulse,
        final_state,
    })
}
