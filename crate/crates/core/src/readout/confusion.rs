use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Detection probabilities P(m_e|e) and P(m_e|g) of the shelving readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub p_me_given_e: f64,
    pub p_me_given_g: f64,
}

impl ConfusionMatrix {
    pub fn new(p_me_given_e: f64, p_me_given_g: f64) -> Result<Self> {
        let cm = Self {
            p_me_given_e,
            p_me_given_g,
        };
        cm.validate()?;
        Ok(cm)
    }

    pub fn validate(&self) -> Result<()> {
        for p in [self.p_me_given_e, self.p_me_given_g] {
            check_probability(p)?;
        }
        if !(self.p_me_given_e > self.p_me_given_g) {
            return Err(Error::domain("readout is uninformative: need P(m_e|e) > P(m_e|g)"));
        }
        Ok(())
    }

    pub fn p_mg_given_e(&self) -> f64 {
        1.0 - self.p_me_given_e
    }

    pub fn p_mg_given_g(&self) -> f64 {
        1.0 - self.p_me_given_g
    }
}

impl Default for ConfusionMatrix {
    fn default() -> Self {
        Self {
            p_me_given_e: 0.92,
            p_me_given_g: 0.05,
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("probability {p} outside [0, 1]")))
    }
}

/// Survival probability e^{−τΓ} of the excited state during a shelving pulse.
pub fn shelving_fidelity(pulse_duration: f64, linewidth: f64) -> Result<f64> {
    if !(pulse_duration >= 0.0) || !(linewidth >= 0.0) {
        return Err(Error::domain("pulse duration and linewidth must be non-negative"));
    }
    Ok((-pulse_duration * linewidth).exp())
}

/// Probability of measuring "excited" given the true excited population.
pub fn apply_confusion(p_excited: f64, cm: &ConfusionMatrix) -> Result<f64> {
    check_probability(p_excited)?;
    Ok(cm.p_me_given_e * p_excited + cm.p_me_given_g * (1.0 - p_excited))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectedPopulation {
    /// Estimate clamped to [0, 1].
    pub value: f64,
    /// Linear inversion before clamping.
    pub raw: f64,
    pub clamped: bool,
}

/// Invert [`apply_confusion`].
pub fn correct_populations(p_measured: f64, cm: &ConfusionMatrix) -> Result<CorrectedPopulation> {
    let contrast = cm.p_me_given_e - cm.p_me_given_g;
    if contrast == 0.0 || !contrast.is_finite() {
        return Err(Error::domain("degenerate confusion matrix"));
    }
    let raw = (p_measured - cm.p_me_given_g) / contrast;
    let value = raw.clamp(0.0, 1.0);
    Ok(CorrectedPopulation {
        value,
        raw,
        clamped: value != raw,
    })
}
