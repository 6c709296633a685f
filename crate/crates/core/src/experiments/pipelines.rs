use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::average::{average_grid, Averaged};
use super::config::{DriveDirection, ExperimentConfig, TrapConfig};
use crate::analytics::{
    collective_shift0, line_peak, line_shape, ramsey_factor, saturated_shift, LineShapeParams, ShiftPair,
};
use crate::constants::rad_to_hz;
use crate::dynamics::{
    integrate, ramsey_sequence, DipoleArray, DriveSchedule, DriveSegment, Envelope, MeanFieldState, RamseyPulses,
    SimOptions,
};
use crate::error::Result;
use crate::fitting::{fit_line, fit_ramsey_fringes_with, FitResult, FringeOptions, ScanPoint, ScanResult};
use crate::geometry::{sample_positions, TrapSpec};
use crate::readout::simulate_depump;
use crate::report::{DataTable, LabeledFit, PipelineReport};

/// The quantization axis is the chain axis.
fn quant_axis() -> Vector3<f64> {
    Vector3::x()
}

/// Fixed physical setting shared by all tasks of one scan.
struct Setup<'a> {
    cfg: &'a ExperimentConfig,
    spacing_um: f64,
    trap: Option<TrapSpec>,
    opts: SimOptions,
}

impl<'a> Setup<'a> {
    fn new(cfg: &'a ExperimentConfig, spacing_um: f64, trap: &TrapConfig, field: &str) -> Result<Self> {
        Ok(Self {
            cfg,
            spacing_um,
            trap: trap.spec(field, &cfg.transition())?,
            opts: cfg.sim_options(),
        })
    }

    fn positions(&self, realization: u64) -> Result<Vec<Vector3<f64>>> {
        let spec = self.cfg.array_spec(self.spacing_um)?;
        Ok(sample_positions(&spec, self.trap.as_ref(), self.cfg.seed, realization)?.positions)
    }

    fn array(&self, realization: u64) -> Result<DipoleArray> {
        DipoleArray::new(&self.positions(realization)?, quant_axis(), self.cfg.transition())
    }

    /// Realizations to run: a single one without disorder.
    fn realizations(&self) -> usize {
        if self.trap.is_some() {
            self.cfg.n_realizations
        } else {
            1
        }
    }

    /// Disorder-averaged (δ⁰, γ⁰).
    fn shift0(&self, direction: DriveDirection) -> Result<Averaged> {
        let tr = self.cfg.transition();
        average_grid(1, self.realizations(), |_, r| {
            let s = collective_shift0(&self.positions(r)?, &direction.vector(), &quant_axis(), &tr)?;
            Ok(vec![s.delta0, s.gamma0])
        })
        .map(|mut v| v.remove(0))
    }

    /// State after driving from the ground state for the configured time.
    fn steady_state(
        &self,
        array: &DipoleArray,
        rabi: f64,
        detuning: f64,
        direction: DriveDirection,
        opts: &SimOptions,
    ) -> Result<MeanFieldState> {
        let d = &self.cfg.drive;
        let mut seg = DriveSegment::rectangular(rabi, detuning, direction.vector(), d.drive_time_us * 1e-6);
        if d.ramp_ns > 0.0 {
            seg = seg.with_envelope(Envelope::LinearRamp {
                rise_time: d.ramp_ns * 1e-9,
            });
        }
        let traj = integrate(
            &MeanFieldState::ground(array.len()),
            &DriveSchedule::single(seg)?,
            array,
            opts,
        )?;
        Ok(traj.last().clone())
    }
}

fn scan_from(detunings: &[f64], avg: &[Averaged]) -> Result<ScanResult> {
    let points = detunings
        .iter()
        .zip(avg)
        .map(|(&d, a)| ScanPoint {
            detuning: d,
            fraction: a.mean[0].clamp(0.0, 1.0),
            stderr: a.stderr.as_ref().map(|s| s[0]),
            samples: a.samples,
        })
        .collect();
    ScanResult::new(points)
}

/// A disorder-averaged steady-state spectrum with its line fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub scan: ScanResult,
    pub fit: FitResult,
    /// Disorder-averaged weak-drive (δ⁰, γ⁰) (rad/s).
    pub shift0: ShiftPair,
    pub rabi: f64,
    /// Maximum of the fitted curve inside the fit window (rad/s).
    pub peak: f64,
}

impl Spectrum {
    pub fn analytic_shift(&self, linewidth: f64) -> f64 {
        saturated_shift(self.shift0.delta0, self.rabi, linewidth)
    }
}

fn spectrum_at(setup: &Setup, rabi: f64, direction: DriveDirection) -> Result<Spectrum> {
    let cfg = setup.cfg;
    let detunings = cfg.scan.detunings();
    let avg = average_grid(detunings.len(), setup.realizations(), |p, r| {
        let array = setup.array(r)?;
        let s = setup.steady_state(&array, rabi, detunings[p], direction, &setup.opts)?;
        Ok(vec![s.mean_excited()])
    })?;
    let scan = scan_from(&detunings, &avg)?;
    let g = cfg.linewidth();
    let fit = fit_line(&scan, rabi, g, cfg.scan.fit_window_khz * TAU * 1e3)?;
    let s0 = setup.shift0(direction)?;
    let half = 0.5 * cfg.scan.fit_window_khz * TAU * 1e3;
    let fitted = LineShapeParams {
        delta: fit.center,
        gamma: fit.parameter("gamma").map_or(0.0, |p| p.value),
        rabi,
        linewidth: g,
    };
    let peak = line_peak(&fitted, -half, half)?;
    Ok(Spectrum {
        scan,
        fit,
        shift0: ShiftPair {
            delta0: s0.mean[0],
            gamma0: s0.mean[1],
        },
        rabi,
        peak,
    })
}

/// Steady-state spectrum at the configured spacing, drive and trap.
pub fn spectrum(cfg: &ExperimentConfig) -> Result<PipelineReport> {
    cfg.validate()?;
    let setup = Setup::new(cfg, cfg.array.spacing_um, &cfg.trap, "trap")?;
    let g = cfg.linewidth();
    let rabi = cfg.drive.rabi_gamma * g;
    let sp = spectrum_at(&setup, rabi, cfg.drive.direction)?;
    let overlay = LineShapeParams::saturated(sp.shift0, rabi, g);
    let amplitude = sp.fit.parameter("amplitude").map_or(1.0, |p| p.value);

    let mut table = DataTable::new(
        "spectrum",
        &["delta_l_hz", "fraction", "stderr", "n", "analytic_fraction"],
    );
    for p in sp.scan.points() {
        table.push(vec![
            rad_to_hz(p.detuning),
            p.fraction,
            p.stderr.unwrap_or(f64::NAN),
            p.samples as f64,
            amplitude * line_shape(p.detuning, &overlay),
        ]);
    }
    let mut report = PipelineReport::new("spectrum", cfg);
    report.summary.insert("shift_hz".into(), rad_to_hz(sp.fit.center));
    report
        .summary
        .insert("shift_err_hz".into(), rad_to_hz(sp.fit.center_uncertainty));
    report.summary.insert("peak_hz".into(), rad_to_hz(sp.peak));
    report.summary.insert("delta0_hz".into(), rad_to_hz(sp.shift0.delta0));
    report.summary.insert("gamma0_hz".into(), rad_to_hz(sp.shift0.gamma0));
    report
        .summary
        .insert("analytic_shift_hz".into(), rad_to_hz(sp.analytic_shift(g)));
    report.fits.push(LabeledFit {
        label: "line".into(),
        fit: sp.fit,
    });
    report.tables.push(table);
    Ok(report)
}

/// Fitted shift against spacing for each drive direction, with the
/// saturated analytic shift as overlay.
pub fn shift_vs_spacing(cfg: &ExperimentConfig) -> Result<PipelineReport> {
    cfg.validate()?;
    let g = cfg.linewidth();
    let rabi = cfg.drive.rabi_gamma * g;
    let lambda_um = cfg.transition().wavelength * 1e6;
    let mut shifts = DataTable::new(
        "shift",
        &[
            "spacing_um",
            "spacing_lambda",
            "parallel",
            "shift_hz",
            "shift_err_hz",
            "analytic_shift_hz",
            "delta0_hz",
        ],
    );
    let mut spectra = DataTable::new(
        "spectra",
        &["spacing_um", "parallel", "delta_l_hz", "fraction", "stderr"],
    );
    let mut report = PipelineReport::new("shift_vs_spacing", cfg);
    for &d in &cfg.spacing.spacings_um {
        let setup = Setup::new(cfg, d, &cfg.trap, "trap")?;
        for &dir in &cfg.spacing.directions {
            let sp = spectrum_at(&setup, rabi, dir)?;
            let par = (dir == DriveDirection::Parallel) as u8 as f64;
            shifts.push(vec![
                d,
                d / lambda_um,
                par,
                rad_to_hz(sp.fit.center),
                rad_to_hz(sp.fit.center_uncertainty),
                rad_to_hz(sp.analytic_shift(g)),
                rad_to_hz(sp.shift0.delta0),
            ]);
            for p in sp.scan.points() {
                spectra.push(vec![
                    d,
                    par,
                    rad_to_hz(p.detuning),
                    p.fraction,
                    p.stderr.unwrap_or(f64::NAN),
                ]);
            }
            report.fits.push(LabeledFit {
                label: format!("{d}um/{}", dir.label()),
                fit: sp.fit,
            });
        }
    }
    report.tables.push(shifts);
    report.tables.push(spectra);
    Ok(report)
}

/// Per-atom excitation normalised to the first atom the drive reaches.
pub fn position_resolved(cfg: &ExperimentConfig) -> Result<PipelineReport> {
    cfg.validate()?;
    let setup = Setup::new(cfg, cfg.position.spacing_um, &cfg.trap, "trap")?;
    let g = cfg.linewidth();
    let rabi = cfg.drive.rabi_gamma * g;
    let mut flags = vec![true];
    if cfg.position.compare_noninteracting {
        flags.push(false);
    }
    let cases: Vec<(f64, bool)> = cfg
        .position
        .detunings_gamma
        .iter()
        .flat_map(|&x| flags.iter().map(move |&f| (x, f)))
        .collect();
    let avg = average_grid(cases.len(), setup.realizations(), |c, r| {
        let (x, interacting) = cases[c];
        let array = setup.array(r)?;
        let opts = SimOptions {
            include_interactions: interacting,
            ..setup.opts
        };
        Ok(setup
            .steady_state(&array, rabi, x * g, DriveDirection::Parallel, &opts)?
            .excited)
    })?;

    let mut table = DataTable::new(
        "profile",
        &[
            "detuning_gamma",
            "interactions",
            "atom",
            "excitation",
            "stderr",
            "normalized",
            "normalized_err",
        ],
    );
    let mut report = PipelineReport::new("position_resolved", cfg);
    for (&(x, interacting), a) in cases.iter().zip(&avg) {
        let first = a.mean[0];
        let first_err = a.stderr_or_nan(0);
        for (n, &m) in a.mean.iter().enumerate() {
            let err = a.stderr_or_nan(n);
            let ratio = m / first;
            let ratio_err = ratio * ((err / m).powi(2) + (first_err / first).powi(2)).sqrt();
            table.push(vec![x, interacting as u8 as f64, n as f64, m, err, ratio, ratio_err]);
        }
        let key = format!(
            "last_over_first/{x}/{}",
            if interacting { "interacting" } else { "noninteracting" }
        );
        report.summary.insert(key, a.mean[a.mean.len() - 1] / first);
    }
    report.tables.push(table);
    Ok(report)
}

/// Fitted shift against drive strength at the configured spacing.
pub fn shift_vs_power(cfg: &ExperimentConfig) -> Result<PipelineReport> {
    cfg.validate()?;
    let g = cfg.linewidth();
    let setup = Setup::new(cfg, cfg.array.spacing_um, &cfg.trap, "trap")?;
    let mut shifts = DataTable::new(
        "shift",
        &[
            "rabi_gamma",
            "shift_hz",
            "shift_err_hz",
            "peak_hz",
            "analytic_shift_hz",
            "delta0_hz",
        ],
    );
    let mut spectra = DataTable::new("spectra", &["rabi_gamma", "delta_l_hz", "fraction", "stderr"]);
    let mut report = PipelineReport::new("shift_vs_power", cfg);
    for &w in &cfg.power.rabi_gamma {
        let sp = spectrum_at(&setup, w * g, cfg.drive.direction)?;
        shifts.push(vec![
            w,
            rad_to_hz(sp.fit.center),
            rad_to_hz(sp.fit.center_uncertainty),
            rad_to_hz(sp.peak),
            rad_to_hz(sp.analytic_shift(g)),
            rad_to_hz(sp.shift0.delta0),
        ]);
        for p in sp.scan.points() {
            spectra.push(vec![w, rad_to_hz(p.detuning), p.fraction, p.stderr.unwrap_or(f64::NAN)]);
        }
        report.fits.push(LabeledFit {
            label: format!("rabi={w}"),
            fit: sp.fit,
        });
    }
    report.tables.push(shifts);
    report.tables.push(spectra);
    Ok(report)
}

/// Detunings of a fringe scan of `periods` fringe periods centred on zero.
pub fn fringe_detunings(wait_time: f64, periods: f64, points: usize) -> Vec<f64> {
    let half = 0.5 * periods * TAU / wait_time;
    (0..points)
        .map(|i| -half + 2.0 * half * i as f64 / (points - 1) as f64)
        .collect()
}

/// Central-fringe shift against free evolution time for each pulse area,
/// with the closed-form prediction δ⁰·S_θ(T_R) as overlay.
pub fn ramsey_vs_time(cfg: &ExperimentConfig) -> Result<PipelineReport> {
    cfg.validate()?;
    let rc = &cfg.ramsey;
    let g = cfg.linewidth();
    let setup = Setup::new(cfg, rc.spacing_um, &rc.trap, "ramsey.trap")?;
    let s0 = setup.shift0(DriveDirection::Parallel)?;
    let delta0 = s0.mean[0];

    let cases: Vec<(f64, f64)> = rc
        .pulse_areas_pi
        .iter()
        .flat_map(|&a| rc.wait_gamma_t.iter().map(move |&t| (a, t)))
        .collect();
    let grids: Vec<Vec<f64>> = cases
        .iter()
        .map(|&(_, t)| fringe_detunings(t / g, rc.fringe_periods, rc.fringe_points))
        .collect();
    let points: Vec<(usize, usize)> = (0..cases.len())
        .flat_map(|c| (0..rc.fringe_points).map(move |k| (c, k)))
        .collect();
    let avg = average_grid(points.len(), setup.realizations(), |p, r| {
        let (c, k) = points[p];
        let (area, gt) = cases[c];
        let array = setup.array(r)?;
        let pulses = RamseyPulses {
            pulse_area: area * PI,
            wait_time: gt / g,
            detuning: grids[c][k],
            pulse_rabi: rc.pulse_rabi_gamma * g,
            direction: Vector3::x(),
        };
        Ok(vec![ramsey_sequence(&pulses, &array, &setup.opts)?
            .final_state
            .mean_excited()])
    })?;

    let mut fringes = DataTable::new(
        "fringes",
        &["pulse_area_pi", "gamma_t", "delta_l_hz", "fraction", "stderr"],
    );
    let mut shifts = DataTable::new(
        "shift",
        &[
            "pulse_area_pi",
            "gamma_t",
            "wait_us",
            "shift_hz",
            "shift_err_hz",
            "shift_envelope_hz",
            "shift_envelope_err_hz",
            "formula_shift_hz",
            "delta0_hz",
        ],
    );
    let mut report = PipelineReport::new("ramsey", cfg);
    report.summary.insert("delta0_hz".into(), rad_to_hz(delta0));
    for (c, &(area, gt)) in cases.iter().enumerate() {
        let chunk = &avg[c * rc.fringe_points..(c + 1) * rc.fringe_points];
        let scan = scan_from(&grids[c], chunk)?;
        for p in scan.points() {
            fringes.push(vec![
                area,
                gt,
                rad_to_hz(p.detuning),
                p.fraction,
                p.stderr.unwrap_or(f64::NAN),
            ]);
        }
        let wait = gt / g;
        let plain = fit_ramsey_fringes_with(&scan, wait, FringeOptions::default())?;
        let env = fit_ramsey_fringes_with(
            &scan,
            wait,
            FringeOptions {
                free_period: true,
                envelope: true,
            },
        )?;
        shifts.push(vec![
            area,
            gt,
            wait * 1e6,
            rad_to_hz(plain.center),
            rad_to_hz(plain.center_uncertainty),
            rad_to_hz(env.center),
            rad_to_hz(env.center_uncertainty),
            rad_to_hz(delta0 * ramsey_factor(area * PI, g, wait)),
            rad_to_hz(delta0),
        ]);
        let label = format!("area={area}pi/gamma_t={gt}");
        report.fits.push(LabeledFit {
            label: label.clone(),
            fit: plain,
        });
        report.fits.push(LabeledFit {
            label: format!("{label}/envelope"),
            fit: env,
        });
    }
    report.tables.push(shifts);
    report.tables.push(fringes);
    Ok(report)
}

/// Population left in m_J = −8 during the shelving depump pulse.
pub fn depump(cfg: &ExperimentConfig) -> Result<PipelineReport> {
    cfg.validate()?;
    let curve = simulate_depump(&cfg.depump.spec())?;
    let mut table = DataTable::new("curve", &["t_s", "p_remain", "p_depumped", "p_excited"]);
    for k in 0..curve.times.len() {
        table.push(vec![
            curve.times[k],
            curve.remaining[k],
            curve.depumped[k],
            curve.excited[k],
        ]);
    }
    let mut report = PipelineReport::new("depump", cfg);
    report
        .summary
        .insert("remaining_at_end".into(), *curve.remaining.last().unwrap_or(&f64::NAN));
    report.summary.insert("max_trace_error".into(), curve.max_trace_error);
    report.summary.insert("min_population".into(), curve.min_population);
    report.tables.push(table);
    Ok(report)
}

/// The pipelines reachable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Spectrum,
    ShiftVsSpacing,
    PositionResolved,
    ShiftVsPower,
    Ramsey,
    Depump,
}

impl Pipeline {
    pub const ALL: [Pipeline; 6] = [
        Pipeline::Spectrum,
        Pipeline::ShiftVsSpacing,
        Pipeline::PositionResolved,
        Pipeline::ShiftVsPower,
        Pipeline::Ramsey,
        Pipeline::Depump,
    ];

    pub fn run(self, cfg: &ExperimentConfig) -> Result<PipelineReport> {
        match self {
            Pipeline::Spectrum => spectrum(cfg),
            Pipeline::ShiftVsSpacing => shift_vs_spacing(cfg),
            Pipeline::PositionResolved => position_resolved(cfg),
            Pipeline::ShiftVsPower => shift_vs_power(cfg),
            Pipeline::Ramsey => ramsey_vs_time(cfg),
            Pipeline::Depump => depump(cfg),
        }
    }
}
