use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::drive::{DriveSchedule, DriveSegment, Envelope};
use super::state::MeanFieldState;
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::integrator::{Integrator, OdeSystem, StepControl};
use crate::physics::{coupling_matrix, CouplingMatrix, TransitionSpec};

/// Atoms at fixed positions with their pairwise couplings.
#[derive(Debug, Clone)]
pub struct DipoleArray {
    transition: TransitionSpec,
    positions: Vec<Vector3<f64>>,
    quant_axis: Vector3<f64>,
    couplings: CouplingMatrix,
    /// −(2/ħ)V_nm, row-major (rad/s): field of a unit coherence on atom m
    /// expressed as a Rabi frequency at atom n.
    field: Vec<Complex64>,
}

impl DipoleArray {
    pub fn new(positions: &[Vector3<f64>], quant_axis: Vector3<f64>, transition: TransitionSpec) -> Result<Self> {
        let couplings = coupling_matrix(positions, &quant_axis, &transition)?;
        let n = positions.len();
        let v = couplings.energies();
        let mut field = vec![Complex64::default(); n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    field[i * n + j] = v[(i, j)] * (-2.0 / HBAR);
                }
            }
        }
        Ok(Self {
            transition,
            positions: positions.to_vec(),
            quant_axis,
            couplings,
            field,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn couplings(&self) -> &CouplingMatrix {
        &self.couplings
    }

    pub fn transition(&self) -> &TransitionSpec {
        &self.transition
    }

    pub fn quant_axis(&self) -> &Vector3<f64> {
        &self.quant_axis
    }

    /// Laser wavevector k·k̂ (1/m).
    pub fn wavevector(&self, direction: &Vector3<f64>) -> Vector3<f64> {
        direction * self.transition.k()
    }

    /// e^{i k_las·r_n} for every atom.
    pub fn drive_phases(&self, direction: &Vector3<f64>) -> Vec<Complex64> {
        let kvec = self.wavevector(direction);
        self.positions
            .iter()
            .map(|r| Complex64::from_polar(1.0, kvec.dot(r)))
            .collect()
    }

    /// Total Rabi frequency Ω_n seen by atom `n` at time `t` into `segment`.
    pub fn local_rabi(
        &self,
        n: usize,
        state: &MeanFieldState,
        segment: &DriveSegment,
        t: f64,
        include_interactions: bool,
    ) -> Result<Complex64> {
        let len = self.len();
        if n >= len {
            return Err(Error::IndexOutOfRange { index: n, len });
        }
        if state.len() != len {
            return Err(Error::domain(format!(
                "state has {} atoms but the array has {len}",
                state.len()
            )));
        }
        let kvec = self.wavevector(&segment.direction);
        let mut omega = Complex64::from_polar(segment.amplitude(t), kvec.dot(&self.positions[n]));
        if include_interactions {
            let row = &self.field[n * len..(n + 1) * len];
            omega += row.iter().zip(&state.coherence).map(|(f, b)| f * b).sum::<Complex64>();
        }
        Ok(omega)
    }
}

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub step: StepControl,
    /// Pure dephasing γ⊥ added to the coherence decay (rad/s).
    pub dephasing: f64,
    pub include_interactions: bool,
    /// Record the state every `sample_interval` seconds; `None` keeps only the
    /// initial and final states.
    pub sample_interval: Option<f64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            step: StepControl::default(),
            dephasing: 0.0,
            include_interactions: true,
            sample_interval: None,
        }
    }
}

impl SimOptions {
    pub fn without_interactions(mut self) -> Self {
        self.include_interactions = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.step.validate()?;
        if !(self.dephasing >= 0.0) {
            return Err(Error::domain("dephasing rate must be non-negative"));
        }
        if let Some(dt) = self.sample_interval {
            if !(dt > 0.0) {
                return Err(Error::domain("sample interval must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<MeanFieldState>,
}

impl Trajectory {
    pub fn last(&self) -> &MeanFieldState {
        self.states.last().expect("trajectory always holds the initial state")
    }

    /// CSV with columns `t_s,atom,rho_ee,re_rho_eg,im_rho_eg`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t_s", "atom", "rho_ee", "re_rho_eg", "im_rho_eg"])?;
        for s in &self.states {
            for (n, (p, c)) in s.excited.iter().zip(&s.coherence).enumerate() {
                w.write_record([
                    format!("{:e}", s.t),
                    n.to_string(),
                    format!("{p:e}"),
                    format!("{:e}", c.re),
                    format!("{:e}", c.im),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Right-hand side for one drive segment.
struct SegmentRhs<'a> {
    n: usize,
    gamma: f64,
    coherence_decay: f64,
    detuning: f64,
    rabi: f64,
    envelope: Envelope,
    t_start: f64,
    phases: Vec<Complex64>,
    field: Option<&'a [Complex64]>,
}

impl OdeSystem for SegmentRhs<'_> {
    fn rhs(&self, t: f64, y: &[Complex64], dydt: &mut [Complex64]) {
        let n = self.n;
        let (pop, coh) = y.split_at(n);
        let (dpop, dcoh) = dydt.split_at_mut(n);
        let amp = self.rabi * self.envelope.factor(t - self.t_start);
        let decay = Complex64::new(-self.coherence_decay, self.detuning);
        let half_i = Complex64::new(0.0, 0.5);
        for i in 0..n {
            let mut omega = self.phases[i] * amp;
            if let Some(field) = self.field {
                let row = &field[i * n..(i + 1) * n];
                for (f, b) in row.iter().zip(coh) {
                    omega += f * b;
                }
            }
            let rho = pop[i].re;
            let beta = coh[i];
            dpop[i] = Complex64::new(-self.gamma * rho + (omega.conj() * beta).im, 0.0);
            dcoh[i] = decay * beta + half_i * omega * (1.0 - 2.0 * rho);
        }
    }
}

/// Integrate the coupled Bloch equations through `schedule`.
pub fn integrate(
    initial: &MeanFieldState,
    schedule: &DriveSchedule,
    array: &DipoleArray,
    opts: &SimOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    if initial.len() != array.len() {
        return Err(Error::domain(format!(
            "initial state has {} atoms but the array has {}",
            initial.len(),
            array.len()
        )));
    }
    initial.validate(1e-6)?;

    let mut integrator = Integrator::new(opts.step)?;
    let mut y = initial.pack();
    let mut t = initial.t;
    let t_final = initial.t + schedule.total_duration();
    let mut states = vec![initial.clone()];
    let mut next_sample = opts.sample_interval.map(|dt| initial.t + dt);

    let gamma = array.transition.linewidth;
    let mut seg_start = initial.t;
    for segment in schedule.segments() {
        let seg_end = seg_start + segment.duration;
        let rhs = SegmentRhs {
            n: array.len(),
            gamma,
            coherence_decay: 0.5 * gamma + opts.dephasing,
            detuning: segment.detuning,
            rabi: segment.rabi,
            envelope: segment.envelope,
            t_start: seg_start,
            phases: array.drive_phases(&segment.direction),
            field: opts.include_interactions.then_some(array.field.as_slice()),
        };
        let mut stops: Vec<f64> = segment.breakpoints().iter().map(|b| seg_start + b).collect();
        stops.push(seg_end);
        for stop in stops {
            while let Some(ts) = next_sample {
                let guard = 1e-9 * opts.sample_interval.unwrap_or(0.0);
                if ts >= stop - guard || ts >= t_final - guard {
                    break;
                }
                integrator.advance(&rhs, t, &mut y, ts)?;
                t = ts;
                states.push(MeanFieldState::unpack(t, &y));
                next_sample = opts.sample_interval.map(|dt| ts + dt);
            }
            integrator.advance(&rhs, t, &mut y, stop)?;
            t = stop;
        }
        seg_start = seg_end;
    }
    states.push(MeanFieldState::unpack(t, &y));
    Ok(Trajectory { states })
}
