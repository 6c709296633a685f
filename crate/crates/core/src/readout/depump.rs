use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::clebsch::dipole_cg;
use crate::constants::DY_421_LINEWIDTH;
use crate::dynamics::Envelope;
use crate::error::{Error, Result};
use crate::integrator::{Integrator, StepControl};

/// J → J′ = J + 1 multilevel system driven by a single polarization
/// component, starting in the stretched state m_J = −J.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultilevelSpec {
    pub ground_j: i32,
    pub excited_j: i32,
    /// Excited-state decay rate (rad/s).
    pub linewidth: f64,
    /// Reduced Rabi frequency (rad/s); each transition gets it times its
    /// Clebsch-Gordan coefficient.
    pub rabi: f64,
    /// Polarization component q ∈ {−1, 0, +1}; 0 is π light.
    pub polarization: i32,
    pub pulse_duration: f64,
    pub envelope: Envelope,
    /// Optional detuning of each excited sublevel m′ = −J′..J′ (rad/s).
    pub sublevel_detuning: Option<Vec<f64>>,
    pub samples: usize,
}

impl Default for MultilevelSpec {
    fn default() -> Self {
        Self {
            ground_j: 8,
            excited_j: 9,
            linewidth: DY_421_LINEWIDTH,
            rabi: 2.0 * std::f64::consts::PI * 50e6,
            polarization: 0,
            pulse_duration: 100e-9,
            envelope: Envelope::LinearRamp { rise_time: 10e-9 },
            sublevel_detuning: None,
            samples: 101,
        }
    }
}

impl MultilevelSpec {
    pub fn ground_levels(&self) -> usize {
        (2 * self.ground_j + 1) as usize
    }

    pub fn excited_levels(&self) -> usize {
        (2 * self.excited_j + 1) as usize
    }

    pub fn dimension(&self) -> usize {
        self.ground_levels() + self.excited_levels()
    }

    fn ground_index(&self, m: i32) -> usize {
        (m + self.ground_j) as usize
    }

    fn excited_index(&self, m: i32) -> usize {
        self.ground_levels() + (m + self.excited_j) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.ground_j < 0 || self.excited_j != self.ground_j + 1 {
            return Err(Error::domain("depump model needs J′ = J + 1 with J ≥ 0"));
        }
        if !(-1..=1).contains(&self.polarization) {
            return Err(Error::domain("polarization component must be −1, 0 or +1"));
        }
        if !(self.linewidth > 0.0) || !(self.rabi >= 0.0) || !self.rabi.is_finite() {
            return Err(Error::domain("need Γ > 0 and a finite non-negative Rabi frequency"));
        }
        if !(self.pulse_duration > 0.0) || self.samples < 2 {
            return Err(Error::domain("need a positive pulse duration and at least two samples"));
        }
        if let Some(d) = &self.sublevel_detuning {
            if d.len() != self.excited_levels() {
                return Err(Error::domain("one detuning per excited sublevel"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepumpCurve {
    pub times: Vec<f64>,
    /// Population left in the initial sublevel |J, −J⟩.
    pub remaining: Vec<f64>,
    /// Population in ground sublevels m_J > −J.
    pub depumped: Vec<f64>,
    pub excited: Vec<f64>,
    /// Largest |Tr ρ − 1| seen at any sample.
    pub max_trace_error: f64,
    /// Most negative diagonal element seen at any sample.
    pub min_population: f64,
}

impl DepumpCurve {
    /// Columns `t_s,p_remain`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t_s", "p_remain"])?;
        for (t, p) in self.times.iter().zip(&self.remaining) {
            w.write_record([format!("{t:e}"), format!("{p:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sparse operator as (row, column, value) triples.
type Sparse = Vec<(usize, usize, Complex64)>;

struct Lindblad {
    dim: usize,
    /// Drive couplings (ground, excited, Ω_m/2) before the envelope.
    drive: Vec<(usize, usize, f64)>,
    /// Excited-state energies in the rotating frame (rad/s).
    energies: Vec<(usize, f64)>,
    jumps: Vec<Sparse>,
    half_gamma: f64,
    excited_start: usize,
    envelope: Envelope,
}

impl Lindblad {
    fn new(spec: &MultilevelSpec) -> Self {
        let (j, jp, q) = (spec.ground_j, spec.excited_j, spec.polarization);
        let mut drive = Vec::new();
        for m in -j..=j {
            if (m + q).abs() <= jp {
                let c = dipole_cg(j, m, q, jp);
                if c != 0.0 {
                    drive.push((spec.ground_index(m), spec.excited_index(m + q), 0.5 * spec.rabi * c));
                }
            }
        }
        let energies = spec
            .sublevel_detuning
            .as_ref()
            .map(|d| {
                (-jp..=jp)
                    .zip(d)
                    .map(|(mp, &delta)| (spec.excited_index(mp), -delta))
                    .collect()
            })
            .unwrap_or_default();
        let sqrt_g = spec.linewidth.sqrt();
        let jumps = (-1..=1)
            .map(|dq| {
                (-j..=j)
                    .filter(|m| (m + dq).abs() <= jp)
                    .filter_map(|m| {
                        let c = dipole_cg(j, m, dq, jp);
                        (c != 0.0).then(|| {
                            (
                                spec.ground_index(m),
                                spec.excited_index(m + dq),
                                Complex64::new(sqrt_g * c, 0.0),
                            )
                        })
                    })
                    .collect()
            })
            .collect();
        Self {
            dim: spec.dimension(),
            drive,
            energies,
            jumps,
            half_gamma: 0.5 * spec.linewidth,
            excited_start: spec.ground_levels(),
            envelope: spec.envelope,
        }
    }

    /// dρ/dt for column-major ρ.
    fn rhs(&self, t: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        let at = |r: usize, c: usize| rho[r + n * c];
        out.iter_mut().for_each(|x| *x = Complex64::default());
        let i = Complex64::i();
        let f = self.envelope.factor(t);

        // −i[H, ρ] with H = Σ (Ω_m/2)(|e⟩⟨g| + |g⟩⟨e|) + Σ E_e |e⟩⟨e|.
        let mut h_entries: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * self.drive.len() + self.energies.len());
        for &(g, e, w) in &self.drive {
            h_entries.push((e, g, w * f));
            h_entries.push((g, e, w * f));
        }
        h_entries.extend(self.energies.iter().map(|&(e, en)| (e, e, en)));
        for &(r, k, h) in &h_entries {
            for c in 0..n {
                // (Hρ)[r, c] and (ρH)[c, k]
                out[r + n * c] -= i * h * at(k, c);
                out[c + n * k] += i * h * at(c, r);
            }
        }

        // Σ_q L_q ρ L_q†
        for l in &self.jumps {
            for &(r1, c1, a) in l {
                for &(r2, c2, b) in l {
                    out[r1 + n * r2] += a * at(c1, c2) * b.conj();
                }
            }
        }

        // −½{Σ L†L, ρ} = −(Γ/2)(P_e ρ + ρ P_e)
        for c in 0..n {
            for r in 0..n {
                let w = (r >= self.excited_start) as u8 + (c >= self.excited_start) as u8;
                if w > 0 {
                    out[r + n * c] -= self.half_gamma * w as f64 * at(r, c);
                }
            }
        }
    }
}

/// Integrate the multilevel Lindblad equation over the pulse and record the
/// population remaining in |J, −J⟩ at `samples` evenly spaced times.
pub fn simulate_depump(spec: &MultilevelSpec) -> Result<DepumpCurve> {
    spec.validate()?;
    let model = Lindblad::new(spec);
    let n = model.dim;
    let mut rho = vec![Complex64::default(); n * n];
    let start = spec.ground_index(-spec.ground_j);
    rho[start + n * start] = Complex64::new(1.0, 0.0);

    let mut integrator = Integrator::new(StepControl::Adaptive {
        rtol: 1e-10,
        atol: 1e-13,
    })?;
    let mut stops: Vec<f64> = (0..spec.samples)
        .map(|k| spec.pulse_duration * k as f64 / (spec.samples - 1) as f64)
        .collect();
    let bps: Vec<f64> = match spec.envelope {
        Envelope::LinearRamp { rise_time } if rise_time < spec.pulse_duration => vec![rise_time],
        _ => Vec::new(),
    };

    let mut curve = DepumpCurve {
        times: Vec::with_capacity(stops.len()),
        remaining: Vec::with_capacity(stops.len()),
        depumped: Vec::with_capacity(stops.len()),
        excited: Vec::with_capacity(stops.len()),
        max_trace_error: 0.0,
        min_population: f64::INFINITY,
    };
    let record = |curve: &mut DepumpCurve, t: f64, rho: &[Complex64]| {
        let pops: Vec<f64> = (0..n).map(|k| rho[k + n * k].re).collect();
        let trace: f64 = pops.iter().sum();
        curve.times.push(t);
        curve.remaining.push(pops[start]);
        curve.depumped.push(pops[start + 1..model.excited_start].iter().sum());
        curve.excited.push(pops[model.excited_start..].iter().sum());
        curve.max_trace_error = curve.max_trace_error.max((trace - 1.0).abs());
        curve.min_population = pops.iter().copied().fold(curve.min_population, f64::min);
    };

    let sys = |t: f64, y: &[Complex64], dy: &mut [Complex64]| model.rhs(t, y, dy);
    let mut t = 0.0;
    record(&mut curve, t, &rho);
    let mut bp = bps.into_iter().peekable();
    for stop in stops.drain(1..) {
        while let Some(&b) = bp.peek() {
            if b >= stop {
                break;
            }
            integrator.advance(&sys, t, &mut rho, b)?;
            t = b;
            bp.next();
        }
        integrator.advance(&sys, t, &mut rho, stop)?;
        t = stop;
        record(&mut curve, t, &rho);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dark_pulse_leaves_population() {
        let spec = MultilevelSpec {
            rabi: 0.0,
            samples: 5,
            ..MultilevelSpec::default()
        };
        let c = simulate_depump(&spec).unwrap();
        assert!(c.remaining.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn two_level_limit() {
        // J = 0 → J′ = 1 with π light is a closed two-level system
        // (⟨0 0 1 0|1 0⟩ = 1): compare with the resonant Rabi solution
        // ρee(∞) = (Ω²/4)/(Γ²/4 + Ω²/2) at long times.
        let g = 1e6;
        let spec = MultilevelSpec {
            ground_j: 0,
            excited_j: 1,
            linewidth: g,
            rabi: 2.0 * g,
            polarization: 0,
            pulse_duration: 40.0 / g,
            envelope: Envelope::Rectangular,
            sublevel_detuning: None,
            samples: 3,
        };
        let c = simulate_depump(&spec).unwrap();
        let last = c.excited.len() - 1;
        assert_relative_eq!(c.excited[last], 1.0 / (0.25 + 2.0), epsilon = 1e-6);
        assert!(c.max_trace_error < 1e-10);
    }

    #[test]
    fn default_depump_is_trace_preserving() {
        let c = simulate_depump(&MultilevelSpec::default()).unwrap();
        assert!(c.max_trace_error < 1e-8, "{}", c.max_trace_error);
        assert!(c.min_population > -1e-8);
        assert!(*c.remaining.last().unwrap() <= 0.1);
        for w in c.remaining.windows(2) {
            assert!(w[1] <= w[0] + 1e-10);
        }
    }

    #[test]
    fn csv_has_header() {
        let spec = MultilevelSpec {
            samples: 3,
            ..MultilevelSpec::default()
        };
        let mut buf = Vec::new();
        simulate_depump(&spec).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_s,p_remain\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn invalid_specs() {
        for spec in [
            MultilevelSpec {
                excited_j: 8,
                ..MultilevelSpec::default()
            },
            MultilevelSpec {
                polarization: 2,
                ..MultilevelSpec::default()
            },
            MultilevelSpec {
                sublevel_detuning: Some(vec![0.0; 3]),
                ..MultilevelSpec::default()
            },
        ] {
            assert!(simulate_depump(&spec).is_err());
        }
    }
}
