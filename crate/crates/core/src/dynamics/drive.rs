use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Turn-on shape of a drive segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    Rectangular,
    /// Linear rise to full amplitude over `rise_time` (s).
    LinearRamp {
        rise_time: f64,
    },
    /// 1 − exp(−t/τ) rise with time constant `time_constant` (s).
    ExponentialRamp {
        time_constant: f64,
    },
}

impl Envelope {
    /// Relative amplitude at time `t` after the segment starts.
    pub fn factor(&self, t: f64) -> f64 {
        match *self {
            Envelope::Rectangular => 1.0,
            Envelope::LinearRamp { rise_time } => {
                if rise_time <= 0.0 {
                    1.0
                } else {
                    (t / rise_time).clamp(0.0, 1.0)
                }
            }
            Envelope::ExponentialRamp { time_constant } => {
                if time_constant <= 0.0 {
                    1.0
                } else {
                    1.0 - (-t.max(0.0) / time_constant).exp()
                }
            }
        }
    }
}

/// A constant-frequency drive of fixed direction applied for `duration`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSegment {
    /// Peak Rabi frequency Ω0 (rad/s). Zero means free evolution.
    pub rabi: f64,
    /// Laser detuning from the bare resonance Δ_L (rad/s).
    pub detuning: f64,
    /// Unit propagation direction k̂_las.
    pub direction: Vector3<f64>,
    /// Duration (s).
    pub duration: f64,
    pub envelope: Envelope,
}

impl DriveSegment {
    pub fn rectangular(rabi: f64, detuning: f64, direction: Vector3<f64>, duration: f64) -> Self {
        Self {
            rabi,
            detuning,
            direction,
            duration,
            envelope: Envelope::Rectangular,
        }
    }

    /// Undriven evolution. The detuning still sets the rotating frame.
    pub fn free(detuning: f64, direction: Vector3<f64>, duration: f64) -> Self {
        Self::rectangular(0.0, detuning, direction, duration)
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Self {
        self.envelope = envelope;
        self
    }

    /// Ω(t) for `t` measured from the start of the segment.
    #[inline]
    pub fn amplitude(&self, t: f64) -> f64 {
        self.rabi * self.envelope.factor(t)
    }

    /// Interior times where the envelope has a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.envelope {
            Envelope::LinearRamp { rise_time } if rise_time > 0.0 && rise_time < self.duration => {
                vec![rise_time]
            }
            _ => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::domain(format!(
                "segment duration must be ≥ 0, got {}",
                self.duration
            )));
        }
        if (self.direction.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::domain("drive direction must be a unit vector"));
        }
        if !self.rabi.is_finite() || !self.detuning.is_finite() {
            return Err(Error::domain("drive amplitude and detuning must be finite"));
        }
        Ok(())
    }
}

/// Ordered drive segments applied back to back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSchedule {
    segments: Vec<DriveSegment>,
}

impl DriveSchedule {
    pub fn new(segments: Vec<DriveSegment>) -> Result<Self> {
        for s in &segments {
            s.validate()?;
        }
        let schedule = Self { segments };
        if !(schedule.total_duration() > 0.0) {
            return Err(Error::domain("drive schedule must have positive total duration"));
        }
        Ok(schedule)
    }

    pub fn single(segment: DriveSegment) -> Result<Self> {
        Self::new(vec![segment])
    }

    pub fn segments(&self) -> &[DriveSegment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelopes() {
        assert_eq!(Envelope::Rectangular.factor(0.0), 1.0);
        let lin = Envelope::LinearRamp { rise_time: 100e-9 };
        assert_eq!(lin.factor(50e-9), 0.5);
        assert_eq!(lin.factor(1e-6), 1.0);
        let exp = Envelope::ExponentialRamp { time_constant: 10e-9 };
        assert!((exp.factor(10e-9) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(exp.factor(0.0), 0.0);
    }

    #[test]
    fn schedule_validation() {
        let seg = DriveSegment::rectangular(1.0, 0.0, Vector3::x(), 0.0);
        assert!(DriveSchedule::single(seg).is_err());
        let bad = DriveSegment::rectangular(1.0, 0.0, Vector3::new(2.0, 0.0, 0.0), 1.0);
        assert!(DriveSchedule::single(bad).is_err());
        let neg = DriveSegment::rectangular(1.0, 0.0, Vector3::x(), -1.0);
        assert!(DriveSchedule::single(neg).is_err());
        let ok = DriveSchedule::new(vec![
            DriveSegment::rectangular(1.0, 0.0, Vector3::x(), 1.0),
            DriveSegment::free(0.0, Vector3::x(), 2.0),
        ])
        .unwrap();
        assert_eq!(ok.total_duration(), 3.0);
    }

    #[test]
    fn ramp_breakpoint() {
        let seg = DriveSegment::rectangular(1.0, 0.0, Vector3::x(), 1e-6)
            .with_envelope(Envelope::LinearRamp { rise_time: 1e-7 });
        assert_eq!(seg.breakpoints(), vec![1e-7]);
    }
}
