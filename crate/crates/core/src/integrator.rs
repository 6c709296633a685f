//! Explicit Runge-Kutta integration of complex ODE systems.
//!
//! [`Integrator::advance`] moves a state from `t` to `t_end` exactly, so
//! callers split a run at drive discontinuities and sample points. The
//! adaptive scheme is Dormand-Prince 5(4) with FSAL; the fixed scheme is
//! classical RK4 with the interval divided into equal steps.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Right-hand side of dy/dt = f(t, y).
pub trait OdeSystem {
    fn rhs(&self, t: f64, y: &[Complex64], dydt: &mut [Complex64]);
}

impl<F> OdeSystem for F
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    fn rhs(&self, t: f64, y: &[Complex64], dydt: &mut [Complex64]) {
        self(t, y, dydt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum StepControl {
    /// Embedded error control with per-component tolerance atol + rtol·|y|.
    Adaptive { rtol: f64, atol: f64 },
    /// Fixed step no larger than `dt`.
    Fixed { dt: f64 },
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::Adaptive {
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepControl::Adaptive { rtol, atol } => rtol > 0.0 && atol > 0.0,
            StepControl::Fixed { dt } => dt > 0.0 && dt.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid step control {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone)]
pub struct Integrator {
    control: StepControl,
    /// Upper bound on step size; `None` means the full interval.
    pub max_step: Option<f64>,
    pub max_steps: usize,
    /// Step size carried between calls to `advance`.
    h_hint: Option<f64>,
    pub stats: Stats,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// b5 − b4
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Integrator {
    pub fn new(control: StepControl) -> Result<Self> {
        control.validate()?;
        Ok(Self {
            control,
            max_step: None,
            max_steps: 5_000_000,
            h_hint: None,
            stats: Stats::default(),
        })
    }

    pub fn control(&self) -> StepControl {
        self.control
    }

    /// Integrate `y` in place from `t` to `t_end`.
    pub fn advance<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, y: &mut [Complex64], t_end: f64) -> Result<()> {
        if t_end < t {
            return Err(Error::domain("integration interval must run forward in time"));
        }
        if t_end - t <= 1e-15 * t_end.abs() {
            return Ok(());
        }
        match self.control {
            StepControl::Fixed { dt } => self.advance_rk4(sys, t, y, t_end, dt),
            StepControl::Adaptive { rtol, atol } => self.advance_dopri(sys, t, y, t_end, rtol, atol),
        }
    }

    fn advance_rk4<S: OdeSystem + ?Sized>(
        &mut self,
        sys: &S,
        t0: f64,
        y: &mut [Complex64],
        t_end: f64,
        dt: f64,
    ) -> Result<()> {
        let dt = self.max_step.map_or(dt, |m| dt.min(m));
        let n_steps = ((t_end - t0) / dt).ceil().max(1.0) as usize;
        let h = (t_end - t0) / n_steps as f64;
        let n = y.len();
        let mut k1 = vec![Complex64::default(); n];
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();
        let mut tmp = k1.clone();
        for step in 0..n_steps {
            let t = t0 + step as f64 * h;
            sys.rhs(t, y, &mut k1);
            for i in 0..n {
                tmp[i] = y[i] + k1[i] * (0.5 * h);
            }
            sys.rhs(t + 0.5 * h, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + k2[i] * (0.5 * h);
            }
            sys.rhs(t + 0.5 * h, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + k3[i] * h;
            }
            sys.rhs(t + h, &tmp, &mut k4);
            for i in 0..n {
                y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            }
            if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Integration {
                    t: t + h,
                    reason: "non-finite state".into(),
                    last_state: y.to_vec(),
                });
            }
            self.stats.accepted += 1;
            self.stats.rhs_evals += 4;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn advance_dopri<S: OdeSystem + ?Sized>(
        &mut self,
        sys: &S,
        t0: f64,
        y: &mut [Complex64],
        t_end: f64,
        rtol: f64,
        atol: f64,
    ) -> Result<()> {
        let n = y.len();
        let span = t_end - t0;
        let h_max = self.max_step.map_or(span, |m| m.min(span));
        let mut h = self.h_hint.unwrap_or(span / 100.0).min(h_max);
        let mut t = t0;
        let mut k: [Vec<Complex64>; 7] = std::array::from_fn(|_| vec![Complex64::default(); n]);
        let mut stage = vec![Complex64::default(); n];
        let mut y_new = vec![Complex64::default(); n];
        sys.rhs(t, y, &mut k[0]);
        self.stats.rhs_evals += 1;
        let mut steps = 0usize;
        let mut last_rejected = false;

        while t < t_end {
            if steps >= self.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: format!("exceeded {} steps", self.max_steps),
                    last_state: y.to_vec(),
                });
            }
            let remaining = t_end - t;
            let h_proposed = h;
            let final_step = h >= remaining * (1.0 - 1e-12);
            if final_step {
                h = remaining;
            }
            if h <= 1e-14 * t.abs().max(span) {
                return Err(Error::Integration {
                    t,
                    reason: format!("step size underflow (h = {h:e})"),
                    last_state: y.to_vec(),
                });
            }

            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        let a = A[s][j];
                        if a != 0.0 {
                            acc += kj[i] * (a * h);
                        }
                    }
                    stage[i] = acc;
                }
                let (done, rest) = k.split_at_mut(s);
                let _ = done;
                sys.rhs(t + C[s] * h, &stage, &mut rest[0]);
            }
            self.stats.rhs_evals += 6;
            // Stage 7 was evaluated at the 5th-order solution (FSAL).
            y_new.copy_from_slice(&stage);

            let mut err_sq = 0.0;
            for i in 0..n {
                let mut e = Complex64::default();
                for (j, kj) in k.iter().enumerate() {
                    if E[j] != 0.0 {
                        e += kj[i] * (E[j] * h);
                    }
                }
                let scale = atol + rtol * y[i].norm().max(y_new[i].norm());
                err_sq += (e.norm() / scale).powi(2);
            }
            let err = (err_sq / n.max(1) as f64).sqrt();

            if !err.is_finite() {
                h *= 0.1;
                last_rejected = true;
                self.stats.rejected += 1;
                continue;
            }

            if err <= 1.0 {
                t = if final_step { t_end } else { t + h };
                y.copy_from_slice(&y_new);
                k.swap(0, 6);
                steps += 1;
                self.stats.accepted += 1;
                let mut factor = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
                factor = factor.clamp(0.2, 5.0);
                if last_rejected {
                    factor = factor.min(1.0);
                }
                last_rejected = false;
                let h_next = h * factor;
                if final_step {
                    // A step clipped to the interval end says little about
                    // the natural step size; keep the larger proposal.
                    self.h_hint = Some(h_next.max(h_proposed));
                } else {
                    h = h_next.min(h_max);
                    self.h_hint = Some(h);
                }
            } else {
                self.stats.rejected += 1;
                last_rejected = true;
                h *= (0.9 * err.powf(-0.2)).max(0.1);
            }
        }
        Ok(())
    }
}
