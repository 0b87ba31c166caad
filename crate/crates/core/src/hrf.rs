//! Hemodynamic response: damped-oscillator response, compact-support
//! mollifier, and the regulation term alpha(t) = beta(t) r(t) with its
//! analytic time derivative.
//!
//! The oscillator r'' + kappa r' + gamma r = zeta starts from rest
//! (r(0) = r'(0) = 0) and is propagated with the exact 2x2 matrix
//! exponential per step, so sampling is the only approximation.

use crate::error::{Error, Result};
use crate::vasculature::VesselParams;

/// Sampled oscillator response and its derivative on the time grid.
#[derive(Debug, Clone)]
pub struct OscillatorSeries {
    pub times: Vec<f64>,
    pub r: Vec<f64>,
    pub r_dot: Vec<f64>,
}

/// Sampled regulation term and the pieces it is built from.
#[derive(Debug, Clone)]
pub struct HrfSeries {
    /// Sample instants on [0, T], spacing dt.
    pub times: Vec<f64>,
    /// Oscillator response samples.
    pub r: Vec<f64>,
    /// Mollifier samples in [0, 1].
    pub beta: Vec<f64>,
    /// Regulation term alpha = beta r.
    pub alpha: Vec<f64>,
    /// Analytic derivative d(alpha)/dt = beta' r + beta r'.
    pub alpha_dot: Vec<f64>,
}

/// 2x2 propagator of the oscillator state (r, r') over a step of `dt`,
/// together with the affine part from the constant drive.
struct Propagator {
    e: [[f64; 2]; 2],
    affine: [f64; 2],
}

impl Propagator {
    fn new(kappa: f64, gamma: f64, zeta: f64, dt: f64) -> Self {
        // A = [[0, 1], [-gamma, -kappa]] = mu I + B with mu = -kappa/2;
        // B^2 = (kappa^2/4 - gamma) I, which selects the trig regime.
        let mu = -kappa / 2.0;
        let disc = kappa * kappa / 4.0 - gamma;
        let b = [[kappa / 2.0, 1.0], [-gamma, -kappa / 2.0]];
        let emu = (mu * dt).exp();
        let (c0, c1) = if disc < 0.0 {
            let w = (-disc).sqrt();
            ((w * dt).cos(), (w * dt).sin() / w)
        } else if disc > 0.0 {
            let s = disc.sqrt();
            ((s * dt).cosh(), (s * dt).sinh() / s)
        } else {
            (1.0, dt)
        };
        let mut e = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                e[i][j] = emu * (c0 * id + c1 * b[i][j]);
            }
        }
        // steady state (zeta/gamma, 0); y_{k+1} = steady + E (y_k - steady)
        let steady = [zeta / gamma, 0.0];
        let affine = [
            steady[0] - (e[0][0] * steady[0] + e[0][1] * steady[1]),
            steady[1] - (e[1][0] * steady[0] + e[1][1] * steady[1]),
        ];
        Propagator { e, affine }
    }

    fn step(&self, y: [f64; 2]) -> [f64; 2] {
        [
            self.e[0][0] * y[0] + self.e[0][1] * y[1] + self.affine[0],
            self.e[1][0] * y[0] + self.e[1][1] * y[1] + self.affine[1],
        ]
    }
}

/// Solves the oscillator from rest over [0, t_end] with spacing dt.
pub fn solve_balloon(p: &VesselParams) -> Result<OscillatorSeries> {
    if !(p.dt > 0.0) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    if !(p.t_end > 0.0) {
        return Err(Error::invalid("T", "must be positive"));
    }
    if !(p.signal_decay > 0.0 && p.flow_elimination > 0.0) {
        return Err(Error::invalid(
            "kappa/gamma",
            "oscillator constants must be positive",
        ));
    }
    let n = (p.t_end / p.dt).round() as usize;
    let prop = Propagator::new(p.signal_decay, p.flow_elimination, p.neural_drive, p.dt);
    let mut times = Vec::with_capacity(n + 1);
    let mut r = Vec::with_capacity(n + 1);
    let mut r_dot = Vec::with_capacity(n + 1);
    let mut y = [0.0, 0.0];
    for k in 0..=n {
        times.push(k as f64 * p.dt);
        r.push(y[0]);
        r_dot.push(y[1]);
        y = prop.step(y);
    }
    Ok(OscillatorSeries { times, r, r_dot })
}

/// Compact-support mollifier on [0, T]:
/// `beta(t) = exp(1 - 1 / (1 - ((2t - T)/T)^2))`, zero outside (0, T).
pub fn mollifier(t: f64, t_end: f64) -> f64 {
    if t <= 0.0 || t >= t_end {
        return 0.0;
    }
    let u = (2.0 * t - t_end) / t_end;
    let w = 1.0 - u * u;
    let exponent = 1.0 - 1.0 / w;
    if exponent < -700.0 {
        return 0.0; // exp underflows
    }
    exponent.exp()
}

/// Analytic derivative of the mollifier: `beta * (-4u / (T w^2))` with
/// `u = (2t - T)/T`, `w = 1 - u^2`; zero outside (0, T).
pub fn mollifier_deriv(t: f64, t_end: f64) -> f64 {
    if t <= 0.0 || t >= t_end {
        return 0.0;
    }
    let u = (2.0 * t - t_end) / t_end;
    let w = 1.0 - u * u;
    let exponent = 1.0 - 1.0 / w;
    if exponent < -700.0 {
        return 0.0;
    }
    exponent.exp() * (-4.0 * u) / (t_end * w * w)
}

/// Builds the regulation term from an oscillator series. When
/// `amplitude_target` is set the series is rescaled uniformly so the
/// maximum of alpha equals the target.
pub fn hrf_alpha(
    osc: &OscillatorSeries,
    t_end: f64,
    amplitude_target: Option<f64>,
) -> Result<HrfSeries> {
    let n = osc.times.len();
    let mut beta = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    let mut alpha_dot = Vec::with_capacity(n);
    for k in 0..n {
        let t = osc.times[k];
        let b = mollifier(t, t_end);
        let bd = mollifier_deriv(t, t_end);
        beta.push(b);
        alpha.push(b * osc.r[k]);
        alpha_dot.push(bd * osc.r[k] + b * osc.r_dot[k]);
    }
    if let Some(target) = amplitude_target {
        let max = alpha.iter().fold(0.0_f64, |m, &a| m.max(a));
        if !(max > 0.0) {
            return Err(Error::invalid(
                "amplitude_target",
                "regulation term is identically zero and cannot be rescaled",
            ));
        }
        let s = target / max;
        for v in alpha.iter_mut().chain(alpha_dot.iter_mut()) {
            *v *= s;
        }
    }
    Ok(HrfSeries {
        times: osc.times.clone(),
        r: osc.r.clone(),
        beta,
        alpha,
        alpha_dot,
    })
}

/// Convenience: oscillator plus mollified regulation term in one call.
pub fn build_series(p: &VesselParams, amplitude_target: Option<f64>) -> Result<HrfSeries> {
    let osc = solve_balloon(p)?;
    hrf_alpha(&osc, p.t_end, amplitude_target)
}

impl HrfSeries {
    /// alpha_dot at step index `k` (zero past the end of the grid).
    pub fn alpha_dot_at(&self, k: usize) -> f64 {
        self.alpha_dot.get(k).copied().unwrap_or(0.0)
    }
}
