use super::lm::{levenberg_marquardt, LmOptions, LmOutcome};
use super::scan::{FitModel, FitParameter, FitResult, ScanResult};
use crate::analytics::{line_shape, LineShapeParams};
use crate::error::{Error, Result};

pub const MIN_LINE_POINTS: usize = 5;

/// Weighted residuals, parameter uncertainties and the covariance scale
/// shared by the line and fringe fits.
pub(super) struct Weighted {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Whether σ came from the data; otherwise the covariance is rescaled
    /// by the reduced χ².
    pub absolute: bool,
}

impl Weighted {
    pub fn new(scan: &ScanResult, x_scale: f64) -> Self {
        let sig = scan.sigmas();
        Self {
            x: scan.points().iter().map(|p| p.detuning * x_scale).collect(),
            y: scan.fractions(),
            absolute: sig.is_some(),
            sigma: sig.unwrap_or_else(|| vec![1.0; scan.len()]),
        }
    }

    pub fn residuals(&self, model: impl Fn(f64) -> f64) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.y)
            .zip(&self.sigma)
            .map(|((&x, &y), &s)| (y - model(x)) / s)
            .collect()
    }

    pub fn uncertainties(&self, out: &LmOutcome) -> Vec<f64> {
        let dof = self.x.len().saturating_sub(out.params.len());
        let scale = if self.absolute || dof == 0 {
            1.0
        } else {
            out.cost / dof as f64
        };
        (0..out.params.len())
            .map(|j| (out.covariance[(j, j)] * scale).max(0.0).sqrt())
            .collect()
    }
}

fn initial_shift(scan: &ScanResult) -> f64 {
    let mut order: Vec<_> = scan.points().iter().collect();
    order.sort_by(|a, b| b.fraction.total_cmp(&a.fraction));
    let top = order.len().div_ceil(5).max(1);
    let (sw, swx) = order[..top].iter().fold((0.0, 0.0), |(sw, swx), p| {
        (sw + p.fraction, swx + p.fraction * p.detuning)
    });
    if sw > 0.0 {
        swx / sw
    } else {
        order[0].detuning
    }
}

/// Fit the skewed Lorentzian with Ω and Γ held fixed, leaving δ_spectro,
/// γ_spectro and an overall amplitude free. Only points with
/// |Δ_L| ≤ window/2 enter the fit.
pub fn fit_line(scan: &ScanResult, rabi: f64, linewidth: f64, window: f64) -> Result<FitResult> {
    if !(linewidth > 0.0) || !(window > 0.0) || !rabi.is_finite() {
        return Err(Error::domain(
            "line fit needs Γ > 0, a positive window and a finite Rabi frequency",
        ));
    }
    let used = scan.window(0.0, 0.5 * window);
    if used.len() < MIN_LINE_POINTS {
        return Err(Error::Fit(format!(
            "{} points inside the window, need at least {MIN_LINE_POINTS}",
            used.len()
        )));
    }
    let data = Weighted::new(&used, 1.0 / linewidth);
    let shape = |x: f64, p: &[f64]| {
        p[2] * line_shape(
            x,
            &LineShapeParams {
                delta: p[0],
                gamma: p[1],
                rabi: rabi / linewidth,
                linewidth: 1.0,
            },
        )
    };
    let bare_peak = shape(0.0, &[0.0, 0.0, 1.0]);
    let peak = used.fractions().into_iter().fold(0.0, f64::max);
    if !(bare_peak > 0.0) || !(peak > 0.0) {
        return Err(Error::Fit("scan carries no signal".into()));
    }
    let p0 = [initial_shift(&used) / linewidth, 0.0, peak / bare_peak];
    let out = levenberg_marquardt(|p| data.residuals(|x| shape(x, p)), &p0, &LmOptions::default())?;
    let unc = data.uncertainties(&out);
    let names = ["delta", "gamma", "amplitude"];
    let scales = [linewidth, linewidth, 1.0];
    let parameters = (0..3)
        .map(|j| FitParameter {
            name: names[j].into(),
            value: out.params[j] * scales[j],
            uncertainty: unc[j] * scales[j],
        })
        .collect();
    Ok(FitResult {
        model: FitModel::SkewedLorentzian,
        center: out.params[0] * linewidth,
        center_uncertainty: unc[0] * linewidth,
        parameters,
        residual_norm: out.cost.sqrt(),
        points_used: used.len(),
        iterations: out.iterations,
        converged: out.converged,
    })
}
