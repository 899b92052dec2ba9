//! Peak extraction and damped least-squares fitting of spectra.
//!
//! Lorentzian model: `f(ω) = offset + Σᵢ Aᵢ wᵢ² / ((ω − cᵢ)² + wᵢ²)` with
//! half-widths `wᵢ`. Thermal oscillator model:
//! `S_x(ω) = (2 k_B T γ / m) / ((ω_m² − ω²)² + γ² ω²)`.
//!
//! Both are solved by the same Levenberg–Marquardt engine on normalised
//! coordinates; widths, amplitudes, masses and damping rates are fitted in log
//! space so they stay positive.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::params::K_B;

/// A nonlinear least-squares problem with an analytic Jacobian.
pub trait LeastSquares {
    fn num_params(&self) -> usize;
    fn num_residuals(&self) -> usize;
    fn residuals(&self, params: &[f64], out: &mut [f64]);
    /// Row-major `num_residuals × num_params`.
    fn jacobian(&self, params: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmConfig {
    pub lambda0: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    /// Stop once `‖δ‖ ≤ xtol·(‖x‖ + xtol)`.
    pub xtol: f64,
    pub max_iterations: usize,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            lambda0: 1e-3,
            lambda_up: 10.0,
            lambda_down: 10.0,
            xtol: 1e-10,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub params: Vec<f64>,
    /// `½‖r‖²`
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

const LAMBDA_MAX: f64 = 1e16;

fn half_norm_sq(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|x| x * x).sum::<f64>()
}

pub fn levenberg_marquardt<P: LeastSquares>(problem: &P, x0: &[f64], cfg: &LmConfig) -> LmReport {
    let n = problem.num_params();
    let m = problem.num_residuals();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; m];
    let mut r_trial = vec![0.0; m];
    let mut jac = vec![0.0; m * n];
    problem.residuals(&x, &mut r);
    let mut cost = half_norm_sq(&r);
    let mut lambda = cfg.lambda0;
    let mut x_trial = vec![0.0; n];

    if !cost.is_finite() {
        return LmReport { params: x, cost, iterations: 0, converged: false };
    }

    for iteration in 1..=cfg.max_iterations {
        problem.jacobian(&x, &mut jac);
        let mut jtj = vec![0.0; n * n];
        let mut grad = vec![0.0; n];
        for row in 0..m {
            let jr = &jac[row * n..(row + 1) * n];
            for a in 0..n {
                grad[a] += jr[a] * r[row];
                for b in a..n {
                    jtj[a * n + b] += jr[a] * jr[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                jtj[a * n + b] = jtj[b * n + a];
            }
        }
        let diag_floor = (0..n).map(|a| jtj[a * n + a]).fold(0.0, f64::max) * 1e-15;

        loop {
            let mut lhs = jtj.clone();
            for a in 0..n {
                lhs[a * n + a] += lambda * jtj[a * n + a].max(diag_floor);
            }
            let mut step: Vec<f64> = grad.iter().map(|g| -g).collect();
            if solve_dense(&mut lhs, &mut step, n).is_ok() {
                for a in 0..n {
                    x_trial[a] = x[a] + step[a];
                }
                problem.residuals(&x_trial, &mut r_trial);
                let trial_cost = half_norm_sq(&r_trial);
                if trial_cost.is_finite() && trial_cost < cost {
                    let step_norm = libm::sqrt(step.iter().map(|s| s * s).sum::<f64>());
                    let x_norm = libm::sqrt(x_trial.iter().map(|s| s * s).sum::<f64>());
                    x.copy_from_slice(&x_trial);
                    core::mem::swap(&mut r, &mut r_trial);
                    cost = trial_cost;
                    lambda = (lambda / cfg.lambda_down).max(1e-300);
                    if step_norm <= cfg.xtol * (x_norm + cfg.xtol) {
                        return LmReport { params: x, cost, iterations: iteration, converged: true };
                    }
                    break;
                }
            }
            lambda *= cfg.lambda_up;
            if lambda > LAMBDA_MAX {
                // no descent direction left at working precision
                return LmReport { params: x, cost, iterations: iteration, converged: true };
            }
        }
    }
    LmReport {
        params: x,
        cost,
        iterations: cfg.max_iterations,
        converged: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub center: f64,
    pub height: f64,
}

/// Interior local maxima refined by a three-point parabola, sorted by height
/// (ties: lower frequency first).
pub fn extract_peaks(x: &[f64], y: &[f64]) -> Vec<Peak> {
    let len = x.len().min(y.len());
    let mut peaks = Vec::new();
    for i in 1..len.saturating_sub(1) {
        let (l, c, r) = (y[i - 1], y[i], y[i + 1]);
        if !(c > l && c >= r) {
            continue;
        }
        let curvature = l - 2.0 * c + r;
        let (offset, height) = if curvature < 0.0 {
            let delta = 0.5 * (l - r) / curvature;
            (delta, c - 0.25 * (l - r) * delta)
        } else {
            (0.0, c)
        };
        let h_left = x[i] - x[i - 1];
        let h_right = x[i + 1] - x[i];
        let step = if offset < 0.0 { h_left } else { h_right };
        peaks.push(Peak {
            center: x[i] + offset * step,
            height,
        });
    }
    peaks.sort_by(|a, b| b.height.total_cmp(&a.height).then(a.center.total_cmp(&b.center)));
    peaks
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub centers: Vec<f64>,
    /// Half-widths at half maximum.
    pub widths: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub offset: f64,
    /// Root-mean-square residual in data units.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn fwhm(&self) -> Vec<f64> {
        self.widths.iter().map(|w| 2.0 * w).collect()
    }

    /// Absolute separation of the first two centres.
    pub fn separation(&self) -> Option<f64> {
        match self.centers.as_slice() {
            [a, b, ..] => Some((a - b).abs()),
            _ => None,
        }
    }

    pub fn evaluate(&self, omega: f64) -> f64 {
        self.offset
            + self
                .centers
                .iter()
                .zip(&self.widths)
                .zip(&self.amplitudes)
                .map(|((c, w), a)| lorentzian(omega, *c, *w, *a))
                .sum::<f64>()
    }
}

#[inline]
pub fn lorentzian(omega: f64, center: f64, width: f64, amplitude: f64) -> f64 {
    let d = omega - center;
    amplitude * width * width / (d * d + width * width)
}

/// Caller-supplied starting point for [`fit_lorentzian`].
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzianGuess {
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub offset: f64,
}

struct Normalization {
    x_mid: f64,
    x_scale: f64,
    y_scale: f64,
}

impl Normalization {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let (lo, hi) = (x[0], x[x.len() - 1]);
        let y_scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        Normalization {
            x_mid: 0.5 * (lo + hi),
            x_scale: 0.5 * (hi - lo),
            y_scale: if y_scale > 0.0 { y_scale } else { 1.0 },
        }
    }
}

/// Parameters: `[offset, c₁, ln w₁, ln A₁, c₂, …]` in normalised units.
struct LorentzianProblem {
    u: Vec<f64>,
    v: Vec<f64>,
    peaks: usize,
}

impl LorentzianProblem {
    fn model(&self, p: &[f64], u: f64) -> f64 {
        let mut f = p[0];
        for k in 0..self.peaks {
            let c = p[1 + 3 * k];
            let w = libm::exp(p[2 + 3 * k]);
            let a = libm::exp(p[3 + 3 * k]);
            f += lorentzian(u, c, w, a);
        }
        f
    }
}

impl LeastSquares for LorentzianProblem {
    fn num_params(&self) -> usize {
        1 + 3 * self.peaks
    }

    fn num_residuals(&self) -> usize {
        self.u.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for (i, (&u, &v)) in self.u.iter().zip(&self.v).enumerate() {
            out[i] = self.model(p, u) - v;
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut [f64]) {
        let n = self.num_params();
        for (i, &u) in self.u.iter().enumerate() {
            let row = &mut out[i * n..(i + 1) * n];
            row[0] = 1.0;
            for k in 0..self.peaks {
                let c = p[1 + 3 * k];
                let w = libm::exp(p[2 + 3 * k]);
                let a = libm::exp(p[3 + 3 * k]);
                let d = u - c;
                let q = d * d + w * w;
                let shape = w * w / q;
                row[1 + 3 * k] = a * shape * 2.0 * d / q;
                row[2 + 3 * k] = 2.0 * a * shape * d * d / q;
                row[3 + 3 * k] = a * shape;
            }
        }
    }
}

fn check_axis(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() || x.len() < 2 || x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid);
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid);
    }
    let first = y[0];
    if y.iter().all(|&v| v == first) {
        return Err(Error::DegenerateWindow);
    }
    Ok(())
}

/// Half-width estimate by walking out from sample `i` to half height above
/// `base`.
fn half_width_at(x: &[f64], y: &[f64], i: usize, base: f64) -> f64 {
    let half = base + 0.5 * (y[i] - base);
    let mut left = None;
    for j in (0..i).rev() {
        if y[j] <= half {
            left = Some(x[i] - x[j]);
            break;
        }
    }
    let mut right = None;
    for j in (i + 1)..x.len() {
        if y[j] <= half {
            right = Some(x[j] - x[i]);
            break;
        }
    }
    let span = x[x.len() - 1] - x[0];
    match (left, right) {
        (Some(l), Some(r)) => 0.5 * (l + r),
        (Some(w), None) | (None, Some(w)) => w,
        (None, None) => 0.25 * span,
    }
}

fn nearest_index(x: &[f64], target: f64) -> usize {
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if (v - target).abs() < (x[best] - target).abs() {
            best = i;
        }
    }
    best
}

fn initial_guess(x: &[f64], y: &[f64], peaks: usize) -> LorentzianGuess {
    let base = y.iter().copied().fold(f64::INFINITY, f64::min);
    let found = extract_peaks(x, y);
    let mut centers = Vec::new();
    let mut widths = Vec::new();
    let mut amplitudes = Vec::new();
    for pk in found.iter().take(peaks) {
        let i = nearest_index(x, pk.center);
        centers.push(pk.center);
        widths.push(half_width_at(x, y, i, base));
        amplitudes.push((pk.height - base).max(f64::MIN_POSITIVE));
    }
    if centers.is_empty() {
        let (i, _) = y
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        centers.push(x[i]);
        widths.push(half_width_at(x, y, i, base));
        amplitudes.push((y[i] - base).max(f64::MIN_POSITIVE));
    }
    while centers.len() < peaks {
        // split the dominant peak symmetrically
        let (c, w, a) = (centers[0], widths[0], amplitudes[0]);
        centers[0] = c - 0.5 * w;
        widths[0] = 0.5 * w;
        centers.push(c + 0.5 * w);
        widths.push(0.5 * w);
        amplitudes.push(a);
    }
    LorentzianGuess {
        centers,
        widths,
        amplitudes,
        offset: base,
    }
}

/// Fits one or two Lorentzian peaks plus a constant background.
pub fn fit_lorentzian(
    x: &[f64],
    y: &[f64],
    n_peaks: usize,
    init: Option<&LorentzianGuess>,
) -> Result<FitResult> {
    fit_lorentzian_with(x, y, n_peaks, init, &LmConfig::default())
}

pub fn fit_lorentzian_with(
    x: &[f64],
    y: &[f64],
    n_peaks: usize,
    init: Option<&LorentzianGuess>,
    cfg: &LmConfig,
) -> Result<FitResult> {
    if !(1..=2).contains(&n_peaks) {
        return Err(Error::InvalidParameter {
            name: "n_peaks",
            value: n_peaks as f64,
        });
    }
    let required = 8 * (3 * n_peaks + 1);
    if x.len() < required {
        return Err(Error::WindowTooSmall {
            samples: x.len(),
            required,
        });
    }
    check_axis(x, y)?;
    let guess = match init {
        Some(g) => g.clone(),
        None => initial_guess(x, y, n_peaks),
    };
    if guess.centers.len() != n_peaks
        || guess.widths.len() != n_peaks
        || guess.amplitudes.len() != n_peaks
    {
        return Err(Error::InvalidParameter {
            name: "init",
            value: guess.centers.len() as f64,
        });
    }

    let norm = Normalization::new(x, y);
    let problem = LorentzianProblem {
        u: x.iter().map(|v| (v - norm.x_mid) / norm.x_scale).collect(),
        v: y.iter().map(|v| v / norm.y_scale).collect(),
        peaks: n_peaks,
    };
    let mut p0 = vec![guess.offset / norm.y_scale];
    for k in 0..n_peaks {
        p0.push((guess.centers[k] - norm.x_mid) / norm.x_scale);
        p0.push(libm::log((guess.widths[k] / norm.x_scale).max(1e-12)));
        p0.push(libm::log((guess.amplitudes[k] / norm.y_scale).max(1e-300)));
    }
    let report = levenberg_marquardt(&problem, &p0, cfg);
    let p = &report.params;

    let mut fit = FitResult {
        centers: Vec::with_capacity(n_peaks),
        widths: Vec::with_capacity(n_peaks),
        amplitudes: Vec::with_capacity(n_peaks),
        offset: p[0] * norm.y_scale,
        residual_norm: 0.0,
        converged: report.converged,
        iterations: report.iterations,
    };
    for k in 0..n_peaks {
        fit.centers.push(norm.x_mid + p[1 + 3 * k] * norm.x_scale);
        fit.widths.push(libm::exp(p[2 + 3 * k]) * norm.x_scale);
        fit.amplitudes.push(libm::exp(p[3 + 3 * k]) * norm.y_scale);
    }
    let mut order: Vec<usize> = (0..n_peaks).collect();
    order.sort_by(|&a, &b| fit.centers[a].total_cmp(&fit.centers[b]));
    fit.centers = order.iter().map(|&k| fit.centers[k]).collect();
    fit.widths = order.iter().map(|&k| fit.widths[k]).collect();
    fit.amplitudes = order.iter().map(|&k| fit.amplitudes[k]).collect();
    let sq: f64 = x
        .iter()
        .zip(y)
        .map(|(&w, &v)| {
            let r = fit.evaluate(w) - v;
            r * r
        })
        .sum();
    fit.residual_norm = libm::sqrt(sq / x.len() as f64);
    Ok(fit)
}

/// Thermal displacement spectrum of a damped oscillator.
pub fn thermal_spectrum(omega: f64, mass: f64, omega_m: f64, gamma: f64, temperature: f64) -> f64 {
    let detune = omega_m * omega_m - omega * omega;
    2.0 * K_B * temperature * gamma / mass / (detune * detune + gamma * gamma * omega * omega)
}

/// Whether a thermal-model parameter is held fixed or fitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermalParam {
    Fixed(f64),
    /// Fitted, optionally from a caller-supplied starting value.
    Free(Option<f64>),
}

impl ThermalParam {
    fn is_free(&self) -> bool {
        matches!(self, ThermalParam::Free(_))
    }

    fn value_or(&self, fallback: f64) -> f64 {
        match *self {
            ThermalParam::Fixed(v) | ThermalParam::Free(Some(v)) => v,
            ThermalParam::Free(None) => fallback,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalModelSpec {
    pub mass: ThermalParam,
    pub omega_m: ThermalParam,
    pub gamma: ThermalParam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalFit {
    pub mass_fit: f64,
    pub omega_m_fit: f64,
    pub gamma_fit: f64,
    pub temperature_assumed: f64,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Two-sided window area of the data over the equipartition value
    /// `k_B T / (m ω_m²)`.
    pub area_ratio: f64,
    pub area_within_5pct: bool,
}

/// Thermal fit in reduced coordinates: `ln(m/m₀)`, `(ω_m − ω₀)/γ₀`,
/// `ln(γ/γ₀)` for whichever are free.
struct ThermalProblem<'a> {
    x: &'a [f64],
    y_norm: Vec<f64>,
    y_scale: f64,
    temperature: f64,
    base: [f64; 3],
    free: [bool; 3],
}

impl ThermalProblem<'_> {
    fn unpack(&self, p: &[f64]) -> [f64; 3] {
        let mut it = p.iter();
        let mut take = |free: bool| if free { *it.next().unwrap_or(&0.0) } else { 0.0 };
        let lm = take(self.free[0]);
        let dw = take(self.free[1]);
        let lg = take(self.free[2]);
        [
            self.base[0] * libm::exp(lm),
            self.base[1] + dw * self.base[2],
            self.base[2] * libm::exp(lg),
        ]
    }
}

impl LeastSquares for ThermalProblem<'_> {
    fn num_params(&self) -> usize {
        self.free.iter().filter(|f| **f).count()
    }

    fn num_residuals(&self) -> usize {
        self.x.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        let [m, wm, g] = self.unpack(p);
        for (i, &w) in self.x.iter().enumerate() {
            out[i] = thermal_spectrum(w, m, wm, g, self.temperature) / self.y_scale - self.y_norm[i];
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut [f64]) {
        let [m, wm, g] = self.unpack(p);
        let n = self.num_params();
        for (i, &w) in self.x.iter().enumerate() {
            let s = thermal_spectrum(w, m, wm, g, self.temperature) / self.y_scale;
            let detune = wm * wm - w * w;
            let q = detune * detune + g * g * w * w;
            let mut col = 0;
            let row = &mut out[i * n..(i + 1) * n];
            if self.free[0] {
                row[col] = -s;
                col += 1;
            }
            if self.free[1] {
                row[col] = -s * 4.0 * wm * detune / q * self.base[2];
                col += 1;
            }
            if self.free[2] {
                row[col] = s * (1.0 - 2.0 * g * g * w * w / q);
            }
        }
    }
}

/// Fits the thermal oscillator spectrum at a known temperature.
pub fn fit_thermal_spectrum(
    x: &[f64],
    y: &[f64],
    temperature: f64,
    spec: &ThermalModelSpec,
) -> Result<ThermalFit> {
    check_axis(x, y)?;
    let free = [spec.mass.is_free(), spec.omega_m.is_free(), spec.gamma.is_free()];
    let n_free = free.iter().filter(|f| **f).count();
    if n_free == 3 && x.len() < 32 {
        return Err(Error::Unidentifiable { samples: x.len() });
    }
    if x.len() < 8 * n_free.max(1) {
        return Err(Error::WindowTooSmall {
            samples: x.len(),
            required: 8 * n_free.max(1),
        });
    }
    if !(temperature > 0.0) {
        return Err(Error::InvalidParameter {
            name: "temperature",
            value: temperature,
        });
    }

    // data-driven starting values
    let (peak_i, peak_y) = y
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let base = y.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    let omega0 = spec.omega_m.value_or(x[peak_i]);
    let gamma0 = spec.gamma.value_or(2.0 * half_width_at(x, y, peak_i, base));
    let mass0 = spec.mass.value_or(2.0 * K_B * temperature / (gamma0 * omega0 * omega0 * peak_y));

    let y_scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let problem = ThermalProblem {
        x,
        y_norm: y.iter().map(|v| v / y_scale).collect(),
        y_scale,
        temperature,
        base: [mass0, omega0, gamma0],
        free,
    };
    let (mass_fit, omega_m_fit, gamma_fit, converged, iterations) = if n_free == 0 {
        (mass0, omega0, gamma0, true, 0)
    } else {
        let report = levenberg_marquardt(&problem, &vec![0.0; n_free], &LmConfig::default());
        let [m, w, g] = problem.unpack(&report.params);
        (m, w, g, report.converged, report.iterations)
    };

    let sq: f64 = x
        .iter()
        .zip(y)
        .map(|(&w, &v)| {
            let r = thermal_spectrum(w, mass_fit, omega_m_fit, gamma_fit, temperature) - v;
            r * r
        })
        .sum();
    let area: f64 = x
        .windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (ys[0] + ys[1]) * (xs[1] - xs[0]))
        .sum::<f64>()
        * 2.0
        / (2.0 * PI);
    let area_ratio = area / (K_B * temperature / (mass_fit * omega_m_fit * omega_m_fit));
    Ok(ThermalFit {
        mass_fit,
        omega_m_fit,
        gamma_fit,
        temperature_assumed: temperature,
        residual_norm: libm::sqrt(sq / x.len() as f64),
        converged,
        iterations,
        area_ratio,
        area_within_5pct: (area_ratio - 1.0).abs() <= 0.05,
    })
}
