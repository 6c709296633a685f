use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::SimOptions;
use crate::error::{Error, Result};
use crate::geometry::{ArraySpec, TrapSpec};
use crate::integrator::StepControl;
use crate::physics::TransitionSpec;
use crate::readout::MultilevelSpec;

const KHZ: f64 = 2.0 * PI * 1e3;
const MHZ: f64 = 2.0 * PI * 1e6;

/// Drive propagation direction relative to the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveDirection {
    Parallel,
    Perpendicular,
}

impl DriveDirection {
    /// Chain along x̂, perpendicular drive along ŷ.
    pub fn vector(self) -> Vector3<f64> {
        match self {
            DriveDirection::Parallel => Vector3::x(),
            DriveDirection::Perpendicular => Vector3::y(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DriveDirection::Parallel => "parallel",
            DriveDirection::Perpendicular => "perpendicular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrapModel {
    /// Ideal positions.
    None,
    /// Bare tweezers at 5.5 µK.
    Tweezer,
    /// Tweezers plus the axial lattice at 8.5 µK.
    Lattice,
    /// Frequencies and temperature taken from the section.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrapConfig {
    pub model: TrapModel,
    pub temperature_uk: Option<f64>,
    pub radial_freq_khz: Option<f64>,
    pub axial_freq_khz: Option<f64>,
}

impl Default for TrapConfig {
    fn default() -> Self {
        Self::preset(TrapModel::Lattice)
    }
}

impl TrapConfig {
    pub fn preset(model: TrapModel) -> Self {
        Self {
            model,
            temperature_uk: None,
            radial_freq_khz: None,
            axial_freq_khz: None,
        }
    }

    /// `None` for ideal positions.
    pub fn spec(&self, field: &str, transition: &TransitionSpec) -> Result<Option<TrapSpec>> {
        let base = match self.model {
            TrapModel::None => return Ok(None),
            TrapModel::Tweezer => TrapSpec::tweezer_only(transition),
            TrapModel::Lattice => TrapSpec::with_lattice(transition),
            TrapModel::Custom => {
                let need = |v: Option<f64>, name: &str| {
                    v.ok_or_else(|| Error::config(format!("{field}.{name}"), "required when model = \"custom\""))
                };
                TrapSpec {
                    radial_frequency: need(self.radial_freq_khz, "radial_freq_khz")? * KHZ,
                    axial_frequency: need(self.axial_freq_khz, "axial_freq_khz")? * KHZ,
                    temperature: need(self.temperature_uk, "temperature_uk")? * 1e-6,
                    ..TrapSpec::tweezer_only(transition)
                }
            }
        };
        let trap = TrapSpec {
            temperature: self.temperature_uk.map_or(base.temperature, |t| t * 1e-6),
            radial_frequency: self.radial_freq_khz.map_or(base.radial_frequency, |f| f * KHZ),
            axial_frequency: self.axial_freq_khz.map_or(base.axial_frequency, |f| f * KHZ),
            ..base
        };
        trap.sigmas()
            .map_err(|e| Error::config(field.to_string(), e.to_string()))?;
        Ok(Some(trap))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub n_atoms: usize,
    pub spacing_um: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            n_atoms: 30,
            spacing_um: 1.252,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveConfig {
    /// Ω/Γ.
    pub rabi_gamma: f64,
    pub direction: DriveDirection,
    pub drive_time_us: f64,
    /// Linear turn-on time; 0 for a rectangular pulse.
    pub ramp_ns: f64,
    /// Extra coherence damping γ⊥/2π.
    pub dephasing_khz: f64,
    pub interactions: bool,
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self {
            rabi_gamma: 0.8,
            direction: DriveDirection::Parallel,
            drive_time_us: 7.0,
            ramp_ns: 100.0,
            dephasing_khz: 0.0,
            interactions: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub detuning_min_khz: f64,
    pub detuning_max_khz: f64,
    pub points: usize,
    /// Full width of the fit window centred on the bare resonance.
    pub fit_window_khz: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            detuning_min_khz: -250.0,
            detuning_max_khz: 250.0,
            points: 21,
            fit_window_khz: 500.0,
        }
    }
}

impl ScanConfig {
    /// Evenly spaced detunings (rad/s).
    pub fn detunings(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.detuning_min_khz * KHZ];
        }
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                (self.detuning_min_khz + f * (self.detuning_max_khz - self.detuning_min_khz)) * KHZ
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpacingConfig {
    pub spacings_um: Vec<f64>,
    pub directions: Vec<DriveDirection>,
}

impl Default for SpacingConfig {
    fn default() -> Self {
        Self {
            spacings_um: vec![0.7, 0.9, 1.1, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 5.0],
            directions: vec![DriveDirection::Parallel, DriveDirection::Perpendicular],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerConfig {
    pub rabi_gamma: Vec<f64>,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            rabi_gamma: vec![0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PositionConfig {
    pub spacing_um: f64,
    /// Δ_L/Γ values.
    pub detunings_gamma: Vec<f64>,
    /// Also run with interactions switched off.
    pub compare_noninteracting: bool,
}

impl Default for PositionConfig {
    fn default() -> Self {
        Self {
            spacing_um: 1.3772,
            detunings_gamma: vec![-0.5, 0.5],
            compare_noninteracting: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RamseyConfig {
    pub spacing_um: f64,
    /// Pulse areas θ0/π.
    pub pulse_areas_pi: Vec<f64>,
    /// Free evolution times ΓT_R.
    pub wait_gamma_t: Vec<f64>,
    pub pulse_rabi_gamma: f64,
    /// Total fringe scan width in periods 2π/T_R, centred on zero.
    pub fringe_periods: f64,
    pub fringe_points: usize,
    pub trap: TrapConfig,
}

impl Default for RamseyConfig {
    fn default() -> Self {
        Self {
            spacing_um: 1.3772,
            pulse_areas_pi: vec![0.25, 0.5, 0.75],
            wait_gamma_t: vec![0.7, 1.1, 1.5, 1.9, 2.3, 2.7],
            pulse_rabi_gamma: 22.0,
            fringe_periods: 3.0,
            fringe_points: 41,
            trap: TrapConfig::preset(TrapModel::Tweezer),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DepumpConfig {
    /// Ω_421/2π.
    pub rabi_mhz: f64,
    pub linewidth_mhz: f64,
    pub pulse_ns: f64,
    pub rise_ns: f64,
    pub samples: usize,
}

impl Default for DepumpConfig {
    fn default() -> Self {
        Self {
            rabi_mhz: 50.0,
            linewidth_mhz: 32.5,
            pulse_ns: 100.0,
            rise_ns: 10.0,
            samples: 101,
        }
    }
}

impl DepumpConfig {
    pub fn spec(&self) -> MultilevelSpec {
        MultilevelSpec {
            rabi: self.rabi_mhz * MHZ,
            linewidth: self.linewidth_mhz * MHZ,
            pulse_duration: self.pulse_ns * 1e-9,
            envelope: crate::dynamics::Envelope::LinearRamp {
                rise_time: self.rise_ns * 1e-9,
            },
            samples: self.samples,
            ..MultilevelSpec::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

/// Everything a pipeline needs. Physical quantities carry their unit in the
/// field name; `_gamma` fields are in units of the 626 nm linewidth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n_realizations: usize,
    pub array: ArrayConfig,
    pub trap: TrapConfig,
    pub drive: DriveConfig,
    pub scan: ScanConfig,
    pub spacing: SpacingConfig,
    pub power: PowerConfig,
    pub position: PositionConfig,
    pub ramsey: RamseyConfig,
    pub depump: DepumpConfig,
    pub numerics: NumericsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_realizations: 100,
            array: ArrayConfig::default(),
            trap: TrapConfig::default(),
            drive: DriveConfig::default(),
            scan: ScanConfig::default(),
            spacing: SpacingConfig::default(),
            power: PowerConfig::default(),
            position: PositionConfig::default(),
            ramsey: RamseyConfig::default(),
            depump: DepumpConfig::default(),
            numerics: NumericsConfig::default(),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(
            field,
            format!("must be non-negative and finite, got {v}"),
        ))
    }
}

fn non_empty<T>(field: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(Error::config(field, "must not be empty"))
    } else {
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn transition(&self) -> TransitionSpec {
        TransitionSpec::default()
    }

    pub fn linewidth(&self) -> f64 {
        self.transition().linewidth
    }

    /// Checks every field and reports the first offending one by path.
    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::config("n_realizations", "must be at least 1"));
        }
        if self.array.n_atoms == 0 {
            return Err(Error::config("array.n_atoms", "must be at least 1"));
        }
        positive("array.spacing_um", self.array.spacing_um)?;
        let tr = self.transition();
        self.trap.spec("trap", &tr)?;
        self.ramsey.trap.spec("ramsey.trap", &tr)?;

        non_negative("drive.rabi_gamma", self.drive.rabi_gamma)?;
        positive("drive.drive_time_us", self.drive.drive_time_us)?;
        non_negative("drive.ramp_ns", self.drive.ramp_ns)?;
        if self.drive.ramp_ns * 1e-3 > self.drive.drive_time_us {
            return Err(Error::config("drive.ramp_ns", "ramp is longer than the drive"));
        }
        non_negative("drive.dephasing_khz", self.drive.dephasing_khz)?;

        if self.scan.points == 0 {
            return Err(Error::config("scan.points", "must be at least 1"));
        }
        for (f, v) in [
            ("scan.detuning_min_khz", self.scan.detuning_min_khz),
            ("scan.detuning_max_khz", self.scan.detuning_max_khz),
        ] {
            if !v.is_finite() {
                return Err(Error::config(f, "must be finite"));
            }
        }
        if self.scan.points > 1 && !(self.scan.detuning_max_khz > self.scan.detuning_min_khz) {
            return Err(Error::config("scan.detuning_max_khz", "must exceed detuning_min_khz"));
        }
        positive("scan.fit_window_khz", self.scan.fit_window_khz)?;

        non_empty("spacing.spacings_um", &self.spacing.spacings_um)?;
        non_empty("spacing.directions", &self.spacing.directions)?;
        let (lo, hi) = (tr.wavelength * 1e6, 8.0 * tr.wavelength * 1e6);
        for &d in &self.spacing.spacings_um {
            if !(d >= lo * (1.0 - 1e-9) && d <= hi * (1.0 + 1e-9)) {
                return Err(Error::config(
                    "spacing.spacings_um",
                    format!("{d} µm outside [λ, 8λ] = [{lo:.3}, {hi:.3}] µm"),
                ));
            }
        }
        non_empty("power.rabi_gamma", &self.power.rabi_gamma)?;
        for &w in &self.power.rabi_gamma {
            non_negative("power.rabi_gamma", w)?;
        }

        positive("position.spacing_um", self.position.spacing_um)?;
        non_empty("position.detunings_gamma", &self.position.detunings_gamma)?;

        positive("ramsey.spacing_um", self.ramsey.spacing_um)?;
        non_empty("ramsey.pulse_areas_pi", &self.ramsey.pulse_areas_pi)?;
        non_empty("ramsey.wait_gamma_t", &self.ramsey.wait_gamma_t)?;
        for &a in &self.ramsey.pulse_areas_pi {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::config("ramsey.pulse_areas_pi", format!("{a} outside (0, 1]")));
            }
        }
        for &t in &self.ramsey.wait_gamma_t {
            positive("ramsey.wait_gamma_t", t)?;
        }
        positive("ramsey.pulse_rabi_gamma", self.ramsey.pulse_rabi_gamma)?;
        if !(self.ramsey.fringe_periods >= crate::fitting::MIN_FRINGE_PERIODS) {
            return Err(Error::config(
                "ramsey.fringe_periods",
                format!("must be at least {}", crate::fitting::MIN_FRINGE_PERIODS),
            ));
        }
        if (self.ramsey.fringe_points as f64) < 2.0 * self.ramsey.fringe_periods + 2.0 {
            return Err(Error::config(
                "ramsey.fringe_points",
                "too few points to resolve the fringes",
            ));
        }

        non_negative("depump.rabi_mhz", self.depump.rabi_mhz)?;
        positive("depump.linewidth_mhz", self.depump.linewidth_mhz)?;
        positive("depump.pulse_ns", self.depump.pulse_ns)?;
        non_negative("depump.rise_ns", self.depump.rise_ns)?;
        if self.depump.samples < 2 {
            return Err(Error::config("depump.samples", "must be at least 2"));
        }
        positive("numerics.rtol", self.numerics.rtol)?;
        positive("numerics.atol", self.numerics.atol)?;
        Ok(())
    }

    pub fn array_spec(&self, spacing_um: f64) -> Result<ArraySpec> {
        ArraySpec::new(self.array.n_atoms, spacing_um * 1e-6)
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            step: StepControl::Adaptive {
                rtol: self.numerics.rtol,
                atol: self.numerics.atol,
            },
            dephasing: self.drive.dephasing_khz * KHZ,
            include_interactions: self.drive.interactions,
            sample_interval: None,
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&json);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
