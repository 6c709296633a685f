use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::line::Weighted;
use super::lm::{levenberg_marquardt, LmOptions};
use super::scan::{FitModel, FitParameter, FitResult, ScanResult};
use crate::error::{Error, Result};

/// Minimum scan span in fringe periods 2π/T_R.
pub const MIN_FRINGE_PERIODS: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FringeOptions {
    /// Let the fringe period float around 2π/T_R.
    pub free_period: bool,
    /// Multiply the cosine by a Gaussian envelope centred on Δ_L = 0.
    pub envelope: bool,
}

impl Default for FringeOptions {
    fn default() -> Self {
        Self {
            free_period: true,
            envelope: false,
        }
    }
}

/// Central fringe with the default options.
pub fn fit_ramsey_fringes(scan: &ScanResult, wait_time: f64) -> Result<FitResult> {
    fit_ramsey_fringes_with(scan, wait_time, FringeOptions::default())
}

fn check_sampling(x: &[f64]) -> Result<()> {
    let span = x[x.len() - 1] - x[0];
    if span < MIN_FRINGE_PERIODS * TAU {
        return Err(Error::Fit(format!(
            "scan covers {:.2} fringe periods, need at least {MIN_FRINGE_PERIODS}",
            span / TAU
        )));
    }
    let widest = x.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if widest >= PI {
        return Err(Error::Fit("scan step exceeds half a fringe period (aliasing)".into()));
    }
    Ok(())
}

/// Fixed-period linear least squares for a·cos x + b·sin x + B.
fn linear_guess(data: &Weighted) -> Result<(f64, f64, f64)> {
    let n = data.x.len();
    let mut a = DMatrix::zeros(n, 3);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let w = 1.0 / data.sigma[i];
        a[(i, 0)] = data.x[i].cos() * w;
        a[(i, 1)] = data.x[i].sin() * w;
        a[(i, 2)] = w;
        y[i] = data.y[i] * w;
    }
    let sol = a
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::Fit(e.to_string()))?;
    Ok((sol[1].atan2(sol[0]), sol[0].hypot(sol[1]), sol[2]))
}

/// Fit A·e^{−εx²/2}·cos(f·(x − c)) + B in the phase variable x = Δ_L·T_R and
/// return the maximum nearest Δ_L = 0 as the fringe centre c/T_R. Without the
/// envelope ε = 0; with a fixed period f = 1.
pub fn fit_ramsey_fringes_with(scan: &ScanResult, wait_time: f64, opts: FringeOptions) -> Result<FitResult> {
    if !(wait_time > 0.0) {
        return Err(Error::domain("fringe fit needs a positive wait time"));
    }
    let data = Weighted::new(scan, wait_time);
    let n_params = 3 + opts.free_period as usize + opts.envelope as usize;
    if data.x.len() < n_params + 2 {
        return Err(Error::Fit(format!(
            "{} points cannot constrain a fringe fit",
            data.x.len()
        )));
    }
    check_sampling(&data.x)?;
    let (c0, a0, b0) = linear_guess(&data)?;

    // Parameter layout: [c, A, B, (f), (ε)].
    let fi = opts.free_period.then_some(3);
    let ei = opts.envelope.then_some(3 + opts.free_period as usize);
    let model = |x: f64, p: &[f64]| {
        let f = fi.map_or(1.0, |i| p[i]);
        let env = ei.map_or(1.0, |i| (-0.5 * p[i] * x * x).exp());
        p[1] * env * (f * (x - p[0])).cos() + p[2]
    };
    let mut p0 = vec![c0, a0, b0];
    if fi.is_some() {
        p0.push(1.0);
    }
    if ei.is_some() {
        p0.push(0.0);
    }
    let out = levenberg_marquardt(|p| data.residuals(|x| model(x, p)), &p0, &LmOptions::default())?;
    let unc = data.uncertainties(&out);

    let mut p = out.params.clone();
    let f = fi.map_or(1.0, |i| p[i]);
    if !(f > 0.0) {
        return Err(Error::Fit("fitted fringe period is not positive".into()));
    }
    if p[1] < 0.0 {
        p[1] = -p[1];
        p[0] += PI / f;
    }
    let period = TAU / f;
    p[0] -= (p[0] / period).round() * period;

    let mut parameters = vec![
        FitParameter {
            name: "center".into(),
            value: p[0] / wait_time,
            uncertainty: unc[0] / wait_time,
        },
        FitParameter {
            name: "amplitude".into(),
            value: p[1],
            uncertainty: unc[1],
        },
        FitParameter {
            name: "offset".into(),
            value: p[2],
            uncertainty: unc[2],
        },
    ];
    if let Some(i) = fi {
        parameters.push(FitParameter {
            name: "period_ratio".into(),
            value: p[i],
            uncertainty: unc[i],
        });
    }
    if let Some(i) = ei {
        parameters.push(FitParameter {
            name: "envelope_curvature".into(),
            value: p[i],
            uncertainty: unc[i],
        });
    }
    Ok(FitResult {
        model: if opts.envelope {
            FitModel::FringeWithEnvelope
        } else {
            FitModel::Fringe
        },
        center: p[0] / wait_time,
        center_uncertainty: unc[0] / wait_time,
        parameters,
        residual_norm: out.cost.sqrt(),
        points_used: data.x.len(),
        iterations: out.iterations,
        converged: out.converged,
    })
}
