//! Time-domain check of the analytic spectrum.
//!
//! The linear Langevin equations are integrated as classical stochastic
//! differential equations by Euler–Maruyama,
//! `R ← R + A·R·dt − √(2D)·dW − √(2D̄)·dW̄`, with Gaussian increments of
//! variance `N·dt` per channel (½ for vacuum, n̄ + ½ for the thermal bath).
//! The output field `√(2D)·R + R_in` is then Welch-averaged with a Hann
//! window.
//!
//! Gaussian variates come from xoshiro256++ (`rand_xoshiro`) through the
//! ziggurat sampler of `rand_distr`. Trajectory `i` of an ensemble starts
//! `i` jumps (2¹²⁸ draws each) into the sequence of the shared seed.

use std::sync::Arc;

use nms_core::covariance::steady_state_covariance;
use nms_core::dynamics::{damped_eigenvalues, DriftModel};
use nms_core::fitting::{extract_peaks, fit_lorentzian, levenberg_marquardt, FitResult, LeastSquares, LmConfig};
use nms_core::linalg::Mat4;
use nms_core::spectrum::{nps, sideband_pair, spectrum_on_axis, GridSpec, NoiseModel, SpectrumGrid};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, SimError};

/// Upper bound on `dt · max|λ|`.
pub const STEP_GUARD: f64 = 0.1;
pub const MIN_STEPS: usize = 1 << 14;
pub const MIN_SEGMENT: usize = 1024;
/// A trajectory is abandoned once any component exceeds this multiple of the
/// steady-state amplitude.
pub const BLOWUP_FACTOR: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    /// Integration step (s).
    pub dt: f64,
    /// Total steps including burn-in.
    pub n_steps: usize,
    /// Welch segments (50 % overlap).
    pub n_segments: usize,
    pub seed: u64,
    /// Leading steps discarded.
    pub burn_in: usize,
    /// Consecutive steps averaged into one stored sample.
    pub decimation: usize,
    /// Brownian sub-increments summed per step. A run with `dt` and `k`
    /// sub-increments follows the same noise path as a run with `dt/k` and
    /// one.
    pub noise_substeps: usize,
    /// Jump count into the seeded sequence; trajectory `i` of an ensemble
    /// uses `stream + i`.
    pub stream: u64,
    /// Multiplies every noise increment; 0 gives the deterministic flow.
    pub noise_scale: f64,
    pub initial_state: [f64; 4],
}

impl Default for TrajectoryConfig {
    /// 0.1 s of recorded motion at 0.5 ns steps, stored at 20 MHz.
    fn default() -> Self {
        TrajectoryConfig {
            dt: 5e-10,
            n_steps: 200_040_000,
            n_segments: 975,
            seed: 42,
            burn_in: 40_000,
            decimation: 100,
            noise_substeps: 1,
            stream: 0,
            noise_scale: 1.0,
            initial_state: [0.0; 4],
        }
    }
}

impl TrajectoryConfig {
    pub fn sample_interval(&self) -> f64 {
        self.dt * self.decimation as f64
    }

    pub fn recorded_samples(&self) -> usize {
        self.n_steps.saturating_sub(self.burn_in) / self.decimation.max(1)
    }

    /// Segment length implied by `n_segments` with 50 % overlap.
    pub fn segment_len(&self) -> usize {
        segment_len(self.recorded_samples(), self.n_segments)
    }

    /// Checks the step-size guard against the drift and the structural
    /// invariants.
    pub fn validate(&self, d: &DriftModel) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SimError::Usage(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_steps < MIN_STEPS {
            return Err(SimError::Usage(format!(
                "n_steps = {} is below the minimum {MIN_STEPS}",
                self.n_steps
            )));
        }
        if self.burn_in >= self.n_steps || self.decimation == 0 || self.noise_substeps == 0 {
            return Err(SimError::Usage(
                "need burn_in < n_steps, decimation ≥ 1 and noise_substeps ≥ 1".into(),
            ));
        }
        if self.n_segments == 0 {
            return Err(SimError::Usage("n_segments must be at least 1".into()));
        }
        let radius = damped_eigenvalues(d)?.spectral_radius();
        if self.dt * radius >= STEP_GUARD {
            return Err(SimError::OracleGuard(format!(
                "dt·max|λ| = {:.3e} exceeds {STEP_GUARD} (dt = {:e} s, max|λ| = {:.4e} rad/s)",
                self.dt * radius,
                self.dt,
                radius
            )));
        }
        Ok(())
    }
}

fn segment_len(samples: usize, segments: usize) -> usize {
    let len = if segments <= 1 {
        samples
    } else {
        2 * samples / (segments + 1)
    };
    len & !1
}

/// A simulated record. `states` and `inputs` hold block averages over
/// `decimation` steps of `R` and of the input noise `R_in` that drives the
/// `D` channels.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub sample_interval: f64,
    pub states: Vec<[f64; 4]>,
    pub inputs: Vec<[f64; 4]>,
    pub final_state: [f64; 4],
    second_moment: Mat4,
    first_moment: [f64; 4],
    moment_count: usize,
}

impl Trajectory {
    /// Sample covariance of the instantaneous state, taken at the end of
    /// every block after burn-in.
    pub fn covariance(&self) -> Mat4 {
        let n = self.moment_count.max(1) as f64;
        let mean = self.first_moment.map(|s| s / n);
        let mut c = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                c[i][j] = self.second_moment[i][j] / n - mean[i] * mean[j];
            }
        }
        c
    }

    pub fn mean(&self) -> [f64; 4] {
        let n = self.moment_count.max(1) as f64;
        self.first_moment.map(|s| s / n)
    }
}

fn steady_scale(d: &DriftModel, n: &NoiseModel, cfg: &TrajectoryConfig) -> f64 {
    let noise = steady_state_covariance(d, n)
        .map(|c| (0..4).map(|i| c[i][i]).fold(0.0, f64::max).sqrt())
        .unwrap_or(1.0)
        * cfg.noise_scale;
    let start = cfg.initial_state.iter().map(|x| x.abs()).fold(0.0, f64::max);
    noise.max(start).max(f64::MIN_POSITIVE)
}

pub fn simulate_trajectory(d: &DriftModel, n: &NoiseModel, cfg: &TrajectoryConfig) -> Result<Trajectory> {
    damped_eigenvalues(d)?.require_stable()?;
    cfg.validate(d)?;

    let a = d.drift;
    let dd = d.d_diag();
    let db = d.d_bar_diag();
    let dt = cfg.dt;
    let fine = dt / cfg.noise_substeps as f64;
    let port_amp = dd.map(|x| (2.0 * x).sqrt());
    let mirror_amp = db.map(|x| (2.0 * x).sqrt());
    let port_sd: [f64; 4] = std::array::from_fn(|i| (n.n_matrix[i] * fine).sqrt() * cfg.noise_scale);
    let mirror_sd: [f64; 4] = std::array::from_fn(|i| (n.n_bar_matrix[i] * fine).sqrt() * cfg.noise_scale);
    let port_on = dd.map(|x| x > 0.0);
    let mirror_on = db.map(|x| x > 0.0);
    let limit = BLOWUP_FACTOR * steady_scale(d, n, cfg);

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.seed);
    for _ in 0..cfg.stream {
        rng.jump();
    }

    let samples = cfg.recorded_samples();
    let mut traj = Trajectory {
        sample_interval: cfg.sample_interval(),
        states: Vec::with_capacity(samples),
        inputs: Vec::with_capacity(samples),
        final_state: cfg.initial_state,
        second_moment: [[0.0; 4]; 4],
        first_moment: [0.0; 4],
        moment_count: 0,
    };

    let mut r = cfg.initial_state;
    let step = |r: &mut [f64; 4], rng: &mut Xoshiro256PlusPlus| -> [f64; 4] {
        let mut dw = [0.0; 4];
        let mut dwb = [0.0; 4];
        for _ in 0..cfg.noise_substeps {
            for i in 0..4 {
                if port_on[i] {
                    let xi: f64 = rng.sample(StandardNormal);
                    dw[i] += port_sd[i] * xi;
                }
                if mirror_on[i] {
                    let xi: f64 = rng.sample(StandardNormal);
                    dwb[i] += mirror_sd[i] * xi;
                }
            }
        }
        let mut next = *r;
        for i in 0..4 {
            let ar = a[i][0] * r[0] + a[i][1] * r[1] + a[i][2] * r[2] + a[i][3] * r[3];
            next[i] += ar * dt - port_amp[i] * dw[i] - mirror_amp[i] * dwb[i];
        }
        *r = next;
        dw
    };

    let guard = |r: &[f64; 4]| -> Result<()> {
        if r.iter().all(|x| x.abs() <= limit) {
            Ok(())
        } else {
            Err(SimError::OracleGuard(format!(
                "trajectory diverged: |R| exceeded {limit:.3e}"
            )))
        }
    };

    for k in 0..cfg.burn_in {
        step(&mut r, &mut rng);
        if k % 4096 == 0 {
            guard(&r)?;
        }
    }

    let inv_dec = 1.0 / cfg.decimation as f64;
    let inv_block = 1.0 / (cfg.decimation as f64 * dt);
    for _ in 0..samples {
        let mut acc_state = [0.0; 4];
        let mut acc_in = [0.0; 4];
        for _ in 0..cfg.decimation {
            let before = r;
            let dw = step(&mut r, &mut rng);
            for i in 0..4 {
                acc_state[i] += before[i];
                acc_in[i] += dw[i];
            }
        }
        guard(&r)?;
        traj.states.push(acc_state.map(|x| x * inv_dec));
        traj.inputs.push(acc_in.map(|x| x * inv_block));
        for i in 0..4 {
            traj.first_moment[i] += r[i];
            for j in 0..4 {
                traj.second_moment[i][j] += r[i] * r[j];
            }
        }
        traj.moment_count += 1;
    }
    traj.final_state = r;
    Ok(traj)
}

/// Which pair of output quadratures the periodogram is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputPort {
    /// `(X_c, P_c)` leaving through the input coupler.
    #[default]
    Cavity,
    /// `(X_m, P_m)` leaving into the mechanical bath. Without coupling this
    /// port is all-pass and flat.
    Mechanics,
    /// The emitted part `√(2γ_m⁰)(X_m, P_m)` of the mechanical output, without
    /// the reflected bath input; shows the bare thermal resonance.
    MechanicsEmitted,
}

impl OutputPort {
    fn channels(self) -> (usize, usize) {
        match self {
            OutputPort::Cavity => (0, 1),
            OutputPort::Mechanics | OutputPort::MechanicsEmitted => (2, 3),
        }
    }
}

/// Periodogram state shared between trajectories of one ensemble.
struct Welch {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    window_power: f64,
}

impl Welch {
    fn new(len: usize) -> Self {
        let window: Vec<f64> = (0..len)
            .map(|j| 0.5 * (1.0 - (std::f64::consts::TAU * j as f64 / len as f64).cos()))
            .collect();
        let window_power = window.iter().map(|w| w * w).sum();
        Welch {
            len,
            fft: FftPlanner::new().plan_fft_forward(len),
            window,
            window_power,
        }
    }

    /// Averaged `|Z(ω_k)|²` under the `e^{+iωt}` convention for
    /// `k = 0..=len/2`, returned as (positive ω, negative ω).
    fn average(&self, z: &[Complex64], segments: usize) -> (Vec<f64>, Vec<f64>) {
        let half = self.len / 2;
        let hop = if segments <= 1 { self.len } else { self.len / 2 };
        let mut pos = vec![0.0; half + 1];
        let mut neg = vec![0.0; half + 1];
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for s in 0..segments {
            let start = s * hop;
            for (j, slot) in buf.iter_mut().enumerate() {
                *slot = z[start + j] * self.window[j];
            }
            self.fft.process(&mut buf);
            for k in 0..=half {
                // forward FFT uses e^{-iωt}: +ω sits in bin len − k
                pos[k] += buf[(self.len - k) % self.len].norm_sqr();
                neg[k] += buf[k].norm_sqr();
            }
        }
        let norm = 1.0 / segments as f64;
        (pos.into_iter().map(|x| x * norm).collect(), neg.into_iter().map(|x| x * norm).collect())
    }
}

fn output_field(traj: &Trajectory, d: &DriftModel, port: OutputPort) -> Vec<Complex64> {
    let (a, b) = port.channels();
    let dd = d.d_diag();
    let (ka, kb) = ((2.0 * dd[a]).sqrt(), (2.0 * dd[b]).sqrt());
    let reflect = if port == OutputPort::MechanicsEmitted { 0.0 } else { 1.0 };
    traj.states
        .iter()
        .zip(&traj.inputs)
        .map(|(s, r_in)| Complex64::new(ka * s[a] + reflect * r_in[a], kb * s[b] + reflect * r_in[b]))
        .collect()
}

fn check_segments(samples: usize, cfg: &TrajectoryConfig) -> Result<usize> {
    let len = segment_len(samples, cfg.n_segments);
    if len < MIN_SEGMENT {
        return Err(SimError::Usage(format!(
            "segment length {len} is below {MIN_SEGMENT} ({samples} samples over {} segments)",
            cfg.n_segments
        )));
    }
    Ok(len)
}

fn to_grid(pos: Vec<f64>, neg: Vec<f64>, len: usize, sample_interval: f64, scale: f64) -> SpectrumGrid {
    let df = std::f64::consts::TAU / (len as f64 * sample_interval);
    let omega_axis = (0..pos.len()).map(|k| k as f64 * df).collect();
    let s_values: Vec<f64> = pos.into_iter().map(|x| x * scale).collect();
    let s_neg_values: Vec<f64> = neg.into_iter().map(|x| x * scale).collect();
    let s_nps_values = s_values.iter().zip(&s_neg_values).map(|(p, n)| nps(*p, *n)).collect();
    SpectrumGrid {
        omega_axis,
        s_values,
        s_neg_values,
        s_nps_values,
    }
}

/// Welch estimate of `S(±ω)` and `S_NPS` for the output of one trajectory,
/// normalised like the analytic spectrum (vacuum at one half).
pub fn output_periodogram(
    traj: &Trajectory,
    d: &DriftModel,
    cfg: &TrajectoryConfig,
    port: OutputPort,
) -> Result<SpectrumGrid> {
    let len = check_segments(traj.states.len(), cfg)?;
    let welch = Welch::new(len);
    let (pos, neg) = welch.average(&output_field(traj, d, port), cfg.n_segments);
    let scale = 0.5 * traj.sample_interval / welch.window_power;
    Ok(to_grid(pos, neg, len, traj.sample_interval, scale))
}

/// Periodogram and state covariance averaged over independent trajectories.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub spectrum: SpectrumGrid,
    pub covariance: Mat4,
    pub trajectories: usize,
}

/// Runs `n_trajectories` independent streams in parallel (on the current
/// rayon pool) and averages their periodograms and covariances. Only one
/// trajectory per worker is held in memory at a time.
pub fn simulate_ensemble(
    d: &DriftModel,
    n: &NoiseModel,
    cfg: &TrajectoryConfig,
    n_trajectories: usize,
    port: OutputPort,
) -> Result<EnsembleResult> {
    if n_trajectories == 0 {
        return Err(SimError::Usage("need at least one trajectory".into()));
    }
    damped_eigenvalues(d)?.require_stable()?;
    cfg.validate(d)?;
    let len = check_segments(cfg.recorded_samples(), cfg)?;
    let welch = Welch::new(len);
    let parts: Vec<(Vec<f64>, Vec<f64>, Mat4)> = (0..n_trajectories as u64)
        .into_par_iter()
        .map(|i| {
            let cfg_i = TrajectoryConfig {
                stream: cfg.stream + i,
                ..*cfg
            };
            let traj = simulate_trajectory(d, n, &cfg_i)?;
            let (pos, neg) = welch.average(&output_field(&traj, d, port), cfg.n_segments);
            Ok((pos, neg, traj.covariance()))
        })
        .collect::<Result<_>>()?;

    let m = parts.len() as f64;
    let half = len / 2 + 1;
    let mut pos = vec![0.0; half];
    let mut neg = vec![0.0; half];
    let mut cov = [[0.0; 4]; 4];
    for (p, q, c) in &parts {
        for k in 0..half {
            pos[k] += p[k] / m;
            neg[k] += q[k] / m;
        }
        for i in 0..4 {
            for j in 0..4 {
                cov[i][j] += c[i][j] / m;
            }
        }
    }
    let sample_interval = cfg.sample_interval();
    let scale = 0.5 * sample_interval / welch.window_power;
    Ok(EnsembleResult {
        spectrum: to_grid(pos, neg, len, sample_interval, scale),
        covariance: cov,
        trajectories: n_trajectories,
    })
}

/// Analytic `S_NPS` local maxima inside `[lo, hi]`, highest `n_peaks` kept,
/// returned in ascending frequency.
pub fn analytic_peaks(d: &DriftModel, n: &NoiseModel, lo: f64, hi: f64, n_peaks: usize) -> Result<Vec<f64>> {
    let grid = GridSpec {
        start: lo,
        stop: hi,
        points: 4001,
    };
    grid.validate()?;
    let s = spectrum_on_axis(d, n, &grid.axis())?;
    let mut peaks: Vec<f64> = extract_peaks(&s.omega_axis, &s.s_nps_values)
        .into_iter()
        .take(n_peaks)
        .map(|p| p.center)
        .collect();
    peaks.sort_by(f64::total_cmp);
    Ok(peaks)
}

/// Fits `y(ω) ≈ a·T(c + (ω − c − δ)/s) + b` where `T` is the analytic
/// `S_NPS` and `c` the midpoint of its peaks. A peak of `T` at `ω_k` then
/// sits at `c + δ + s·(ω_k − c)` in the data, so shift and stretch move the
/// two peaks independently.
struct Registration<'a> {
    x: &'a [f64],
    y: Vec<f64>,
    d: &'a DriftModel,
    n: &'a NoiseModel,
    center: f64,
    template_scale: f64,
    shift_scale: f64,
}

impl Registration<'_> {
    fn template(&self, omega: f64) -> f64 {
        sideband_pair(self.d, self.n, omega)
            .map(|(p, q)| nps(p, q) / self.template_scale)
            .unwrap_or(f64::NAN)
    }

    fn map(&self, p: &[f64], omega: f64) -> f64 {
        self.center + (omega - self.center - p[1] * self.shift_scale) / p[2]
    }
}

impl LeastSquares for Registration<'_> {
    fn num_params(&self) -> usize {
        4
    }

    fn num_residuals(&self) -> usize {
        self.x.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for (i, &w) in self.x.iter().enumerate() {
            out[i] = p[0] * self.template(self.map(p, w)) + p[3] - self.y[i];
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut [f64]) {
        let m = self.x.len();
        let mut plus = vec![0.0; m];
        let mut minus = vec![0.0; m];
        for k in 0..4 {
            let h = 1e-6 * p[k].abs().max(1.0);
            let mut q = p.to_vec();
            q[k] = p[k] + h;
            self.residuals(&q, &mut plus);
            q[k] = p[k] - h;
            self.residuals(&q, &mut minus);
            for i in 0..m {
                out[i * 4 + k] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
    }
}

/// Oracle peak positions located by registering the analytic `S_NPS` shape
/// onto the periodogram.
#[derive(Debug, Clone)]
pub struct PeakComparison {
    /// Analytic `S_NPS` maxima (rad/s), ascending.
    pub analytic_peaks: Vec<f64>,
    /// Corresponding maxima of the registered periodogram (rad/s).
    pub oracle_peaks: Vec<f64>,
    /// `oracle − analytic` (rad/s).
    pub center_deltas: Vec<f64>,
    /// Registration shift `δ` (rad/s) and stretch `s`.
    pub shift: f64,
    pub stretch: f64,
    pub converged: bool,
    /// Independent double-Lorentzian fits of both spectra over the window,
    /// used for the width comparison.
    pub oracle_fit: Option<FitResult>,
    pub analytic_fit: Option<FitResult>,
}

impl PeakComparison {
    pub fn max_center_delta(&self) -> f64 {
        self.center_deltas.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    /// `oracle / analytic − 1` for each fitted half-width.
    pub fn width_ratios(&self) -> Option<Vec<f64>> {
        let (o, a) = (self.oracle_fit.as_ref()?, self.analytic_fit.as_ref()?);
        Some(o.widths.iter().zip(&a.widths).map(|(x, y)| x / y - 1.0).collect())
    }
}

pub fn compare_peaks(
    oracle: &SpectrumGrid,
    d: &DriftModel,
    n: &NoiseModel,
    lo: f64,
    hi: f64,
    n_peaks: usize,
) -> Result<PeakComparison> {
    let analytic_peaks = analytic_peaks(d, n, lo, hi, n_peaks)?;
    if analytic_peaks.is_empty() {
        return Err(SimError::Usage("analytic spectrum has no peak in the comparison window".into()));
    }
    let (axis, oracle_nps) = oracle.nps_window(lo, hi);
    if axis.len() < 16 {
        return Err(SimError::Usage(format!(
            "only {} periodogram bins inside the comparison window",
            axis.len()
        )));
    }
    let y_scale = oracle_nps.iter().copied().fold(0.0, f64::max);
    let center = analytic_peaks.iter().sum::<f64>() / analytic_peaks.len() as f64;
    let (tp, tq) = sideband_pair(d, n, analytic_peaks[0])?;
    let problem = Registration {
        x: &axis,
        y: oracle_nps.iter().map(|v| v / y_scale).collect(),
        d,
        n,
        center,
        template_scale: nps(tp, tq),
        shift_scale: (hi - lo) * 1e-3,
    };
    let report = levenberg_marquardt(&problem, &[1.0, 0.0, 1.0, 0.0], &LmConfig::default());
    let p = &report.params;
    let shift = p[1] * problem.shift_scale;
    let stretch = p[2];
    let oracle_peaks: Vec<f64> = analytic_peaks
        .iter()
        .map(|w| center + shift + stretch * (w - center))
        .collect();
    let center_deltas = oracle_peaks.iter().zip(&analytic_peaks).map(|(o, a)| o - a).collect();

    let analytic_grid = spectrum_on_axis(d, n, &axis)?;
    let analytic_fit = fit_lorentzian(&axis, &analytic_grid.s_nps_values, n_peaks, None).ok();
    let oracle_fit = fit_lorentzian(&axis, &oracle_nps, n_peaks, None).ok();
    Ok(PeakComparison {
        analytic_peaks,
        oracle_peaks,
        center_deltas,
        shift,
        stretch,
        converged: report.converged,
        oracle_fit,
        analytic_fit,
    })
}

/// `max_ij |C_ij − C⁰_ij| / √(C⁰_ii C⁰_jj)`
pub fn covariance_deviation(simulated: &Mat4, reference: &Mat4) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let scale = (reference[i][i] * reference[j][j]).sqrt();
            worst = worst.max((simulated[i][j] - reference[i][j]).abs() / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use nms_core::dynamics::build_drift;
    use nms_core::params::{hz, SystemParams};

    fn short(dt: f64) -> TrajectoryConfig {
        TrajectoryConfig {
            dt,
            n_steps: MIN_STEPS * 4,
            n_segments: 1,
            burn_in: 0,
            decimation: 1,
            ..TrajectoryConfig::default()
        }
    }

    #[test]
    fn guard_trips_on_coarse_step() {
        let p = SystemParams::reference();
        let d = build_drift(&p, hz(321e3));
        let cfg = short(1e-7);
        let err = simulate_trajectory(&d, &NoiseModel::from_params(&p), &cfg).unwrap_err();
        assert!(matches!(err, SimError::OracleGuard(_)));
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn structural_checks() {
        let p = SystemParams::reference();
        let d = build_drift(&p, hz(321e3));
        let n = NoiseModel::from_params(&p);
        let few = TrajectoryConfig { n_steps: 1000, ..short(1e-9) };
        assert!(matches!(simulate_trajectory(&d, &n, &few), Err(SimError::Usage(_))));
        let traj = simulate_trajectory(&d, &n, &short(1e-9)).unwrap();
        let many = TrajectoryConfig { n_segments: 200, ..short(1e-9) };
        assert!(matches!(
            output_periodogram(&traj, &d, &many, OutputPort::Cavity),
            Err(SimError::Usage(_))
        ));
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let p = SystemParams::reference();
        let d = build_drift(&p, hz(321e3));
        let n = NoiseModel::from_params(&p);
        let cfg = short(1e-9);
        let a = simulate_trajectory(&d, &n, &cfg).unwrap();
        let b = simulate_trajectory(&d, &n, &cfg).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.inputs, b.inputs);
        let c = simulate_trajectory(&d, &n, &TrajectoryConfig { seed: 7, ..cfg }).unwrap();
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn segment_lengths() {
        assert_eq!(segment_len(4096, 1), 4096);
        assert_eq!(segment_len(4096, 3), 2048);
        assert_eq!(segment_len(4097, 1), 4096);
    }
}
