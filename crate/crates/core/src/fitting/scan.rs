use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::constants::{hz_to_rad, rad_to_hz};
use crate::error::{Error, Result};

/// One detuning of a scan, averaged over `samples` runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    /// Laser detuning Δ_L (rad/s).
    pub detuning: f64,
    pub fraction: f64,
    /// Standard error of `fraction`; `None` when a single sample was taken.
    pub stderr: Option<f64>,
    pub samples: usize,
}

/// A spectrum or fringe scan with strictly increasing detunings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScanResult {
    points: Vec<ScanPoint>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    delta_l_hz: f64,
    fraction: f64,
    stderr: Option<f64>,
    n: usize,
}

impl ScanResult {
    /// Sorts by detuning and validates the invariants.
    pub fn new(mut points: Vec<ScanPoint>) -> Result<Self> {
        points.sort_by(|a, b| a.detuning.total_cmp(&b.detuning));
        for w in points.windows(2) {
            if !(w[1].detuning > w[0].detuning) {
                return Err(Error::domain(format!(
                    "duplicate detuning {:e} rad/s in scan",
                    w[0].detuning
                )));
            }
        }
        for p in &points {
            if !p.detuning.is_finite() {
                return Err(Error::domain("scan detuning must be finite"));
            }
            if !(0.0..=1.0).contains(&p.fraction) {
                return Err(Error::domain(format!("fraction {} outside [0, 1]", p.fraction)));
            }
            if let Some(s) = p.stderr {
                if !(s >= 0.0 && s.is_finite()) {
                    return Err(Error::domain("standard error must be finite and non-negative"));
                }
            }
        }
        Ok(Self { points })
    }

    /// Build from parallel slices of detunings (rad/s) and fractions.
    pub fn from_values(detunings: &[f64], fractions: &[f64], stderr: Option<&[f64]>) -> Result<Self> {
        if detunings.len() != fractions.len() || stderr.is_some_and(|s| s.len() != detunings.len()) {
            return Err(Error::domain("scan columns differ in length"));
        }
        let points = detunings
            .iter()
            .zip(fractions)
            .enumerate()
            .map(|(i, (&d, &f))| ScanPoint {
                detuning: d,
                fraction: f,
                stderr: stderr.map(|s| s[i]),
                samples: 1,
            })
            .collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[ScanPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn detunings(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.detuning).collect()
    }

    pub fn fractions(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.fraction).collect()
    }

    /// Points with |Δ_L − center| ≤ half_width.
    pub fn window(&self, center: f64, half_width: f64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .filter(|p| (p.detuning - center).abs() <= half_width)
                .copied()
                .collect(),
        }
    }

    /// Per-point σ used as fit weights. Falls back to unit weights unless
    /// every point carries a positive standard error.
    pub(crate) fn sigmas(&self) -> Option<Vec<f64>> {
        self.points.iter().map(|p| p.stderr.filter(|&s| s > 0.0)).collect()
    }

    /// Columns `delta_l_hz,fraction,stderr,n`; an empty stderr means undefined.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut points = Vec::new();
        for row in rdr.deserialize() {
            let row: CsvRow = row?;
            points.push(ScanPoint {
                detuning: hz_to_rad(row.delta_l_hz),
                fraction: row.fraction,
                stderr: row.stderr,
                samples: row.n,
            });
        }
        Self::new(points)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            w.serialize(CsvRow {
                delta_l_hz: rad_to_hz(p.detuning),
                fraction: p.fraction,
                stderr: p.stderr,
                n: p.samples,
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    SkewedLorentzian,
    Fringe,
    FringeWithEnvelope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    pub uncertainty: f64,
}

/// Outcome of a line or fringe fit. Angular quantities are in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    /// Fitted δ_spectro or central-fringe position.
    pub center: f64,
    pub center_uncertainty: f64,
    pub parameters: Vec<FitParameter>,
    /// √(Σ weighted residual²).
    pub residual_norm: f64,
    pub points_used: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn parameter(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
