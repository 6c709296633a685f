use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Stopping rules for [`levenberg_marquardt`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Converged once every |Δp_j| ≤ tol·(|p_j| + tol).
    pub relative_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            relative_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// (JᵀJ)⁻¹ of the weighted residuals at the solution.
    pub covariance: DMatrix<f64>,
    /// Sum of squared weighted residuals.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn cost_of(r: &DVector<f64>) -> f64 {
    r.norm_squared()
}

fn eval<F: Fn(&[f64]) -> Vec<f64>>(f: &F, p: &[f64]) -> Option<DVector<f64>> {
    let r = DVector::from_vec(f(p));
    r.iter().all(|x| x.is_finite()).then_some(r)
}

/// Central-difference Jacobian of the residual vector.
fn jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: &F, p: &[f64], m: usize) -> Result<DMatrix<f64>> {
    let mut jac = DMatrix::zeros(m, p.len());
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let h = 6e-6 * p[j].abs().max(1e-3);
        q[j] = p[j] + h;
        let up = eval(f, &q);
        q[j] = p[j] - h;
        let down = eval(f, &q);
        q[j] = p[j];
        let (Some(up), Some(down)) = (up, down) else {
            return Err(Error::Fit(format!("residuals not finite near parameter {j}")));
        };
        jac.set_column(j, &((up - down) / (2.0 * h)));
    }
    Ok(jac)
}

/// Minimise Σ r_i(p)² with Marquardt's diagonal damping.
///
/// `residuals` must return weighted residuals (data − model)/σ of a fixed
/// length. Hitting the iteration cap is reported through `converged = false`
/// together with the best parameters found.
pub fn levenberg_marquardt<F>(residuals: F, p0: &[f64], opts: &LmOptions) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let np = p0.len();
    let mut p = p0.to_vec();
    let mut r = eval(&residuals, &p).ok_or_else(|| Error::Fit("residuals not finite at the initial guess".into()))?;
    let m = r.len();
    if m < np {
        return Err(Error::Fit(format!("{m} residuals cannot constrain {np} parameters")));
    }
    let mut cost = cost_of(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = jacobian(&residuals, &p, m)?;

    while iterations < opts.max_iterations {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        if cost == 0.0 || grad.amax() <= f64::MIN_POSITIVE {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for j in 0..np {
                a[(j, j)] += lambda * jtj[(j, j)].max(1e-12);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&grad))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            match eval(&residuals, &trial) {
                Some(rt) if cost_of(&rt) <= cost => {
                    let small = step
                        .iter()
                        .zip(&p)
                        .all(|(s, v)| s.abs() <= opts.relative_tolerance * (v.abs() + opts.relative_tolerance));
                    p = trial;
                    cost = cost_of(&rt);
                    r = rt;
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    converged = small;
                    break;
                }
                _ => lambda *= 10.0,
            }
        }
        if !accepted {
            // No downhill step at any damping: the minimum is resolved to
            // machine precision.
            converged = true;
            break;
        }
        jac = jacobian(&residuals, &p, m)?;
        if converged {
            break;
        }
    }

    let jtj = jac.transpose() * &jac;
    let covariance = jtj
        .try_inverse()
        .ok_or_else(|| Error::Fit("normal matrix is singular at the solution".into()))?;
    Ok(LmOutcome {
        params: p,
        covariance,
        cost,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.2).collect();
        let model = |p: &[f64], x: f64| p[0] * (-p[1] * x).exp() + p[2];
        let truth = [2.5, 0.8, 0.3];
        let ys: Vec<f64> = xs.iter().map(|&x| model(&truth, x)).collect();
        let out = levenberg_marquardt(
            |p| xs.iter().zip(&ys).map(|(&x, &y)| y - model(p, x)).collect(),
            &[1.0, 0.3, 0.0],
            &LmOptions::default(),
        )
        .unwrap();
        assert!(out.converged);
        for (a, b) in out.params.iter().zip(truth) {
            assert_relative_eq!(*a, b, max_relative = 1e-8);
        }
    }

    #[test]
    fn linear_model_covariance() {
        // y = a + b x with unit weights: cov = (XᵀX)⁻¹.
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.1, 4.9, 7.2];
        let out = levenberg_marquardt(
            |p| xs.iter().zip(&ys).map(|(x, y)| y - p[0] - p[1] * x).collect(),
            &[0.0, 0.0],
            &LmOptions::default(),
        )
        .unwrap();
        let (sx, sxx, n) = (6.0, 14.0, 4.0);
        let det = n * sxx - sx * sx;
        assert_relative_eq!(out.covariance[(0, 0)], sxx / det, max_relative = 1e-6);
        assert_relative_eq!(out.covariance[(1, 1)], n / det, max_relative = 1e-6);
    }

    #[test]
    fn iteration_cap_reports_best_so_far() {
        let out = levenberg_marquardt(
            |p| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]],
            &[-1.2, 1.0],
            &LmOptions {
                max_iterations: 2,
                ..LmOptions::default()
            },
        )
        .unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 2);
        assert!(out.cost < 24.2);
    }

    #[test]
    fn underdetermined_is_an_error() {
        assert!(levenberg_marquardt(|p| vec![p[0] + p[1]], &[0.0, 0.0], &LmOptions::default()).is_err());
    }
}
