//! Parameter sweeps over detuning or drive power.
//!
//! Points are evaluated in parallel and reassembled in sweep order; mode
//! labels are then assigned sequentially by continuity.

use nms_core::dynamics::{build_drift, damped_eigenvalues};
use nms_core::fitting::fit_lorentzian;
use nms_core::normal_modes::track_modes;
use nms_core::params::{driven_coupling, hz, to_hz, SystemParams};
use nms_core::spectrum::{noise_power_spectrum, GridSpec};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::csv_io::Cell;
use crate::error::{Result, SimError};

pub const MAX_POINTS: usize = 100_000;

/// Environment variable capping worker threads (0 or unset: all cores).
pub const THREADS_ENV: &str = "NMS_SIM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Swept in Hz.
    Detuning,
    /// Swept in W.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub n_points: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(SimError::Usage(format!(
                "sweep needs start < stop, got {} .. {}",
                self.start, self.stop
            )));
        }
        if !(2..=MAX_POINTS).contains(&self.n_points) {
            return Err(SimError::Usage(format!(
                "sweep points must be in 2..={MAX_POINTS}, got {}",
                self.n_points
            )));
        }
        if self.variable == SweepVariable::Power && self.start < 0.0 {
            return Err(SimError::Usage("power sweep must start at P ≥ 0".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let h = (self.stop - self.start) / (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|k| if k + 1 == self.n_points { self.stop } else { self.start + k as f64 * h })
            .collect()
    }

    /// Parameters at sweep coordinate `x`; `g` follows from the new operating
    /// point.
    pub fn apply(&self, p: &SystemParams, x: f64) -> SystemParams {
        match self.variable {
            SweepVariable::Detuning => p.with_detuning(hz(x)),
            SweepVariable::Power => p.with_power(x),
        }
    }
}

/// Builds the worker pool honouring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map_err(|_| SimError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`")))?,
        _ => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SimError::Usage(format!("thread pool: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSweepRow {
    pub x: f64,
    /// Continuity-labelled `(+, −)` upper-half-plane drift eigenvalues.
    pub pair: Option<[Complex64; 2]>,
}

impl ModeSweepRow {
    pub fn omega_gap(&self) -> Option<f64> {
        self.pair.map(|[a, b]| (a.im - b.im).abs())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut row = vec![Some(self.x)];
        match self.pair {
            Some([plus, minus]) => row.extend([
                Some(to_hz(plus.im)),
                Some(to_hz(minus.im)),
                Some(to_hz(-plus.re)),
                Some(to_hz(-minus.re)),
            ]),
            None => row.extend([None; 4]),
        }
        row
    }
}

pub const MODE_HEADER: [&str; 5] = [
    "x",
    "omega_plus_hz",
    "omega_minus_hz",
    "gamma_plus_hz",
    "gamma_minus_hz",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome<R> {
    pub rows: Vec<R>,
    pub failures: usize,
}

/// Damped normal modes along the sweep. Failed points are kept as empty rows
/// and skipped by the tracker.
pub fn sweep_modes(p: &SystemParams, spec: &SweepSpec) -> Result<SweepOutcome<ModeSweepRow>> {
    spec.validate()?;
    let raw: Vec<(f64, Option<[Complex64; 2]>)> = spec
        .values()
        .into_par_iter()
        .map(|x| {
            let q = spec.apply(p, x);
            let pair = q
                .validate()
                .and_then(|_| damped_eigenvalues(&build_drift(&q, driven_coupling(&q))))
                .and_then(|ev| ev.require_stable().map(|_| ev.upper_pair()))
                .ok();
            (x, pair)
        })
        .collect();

    let mut previous = None;
    let mut failures = 0;
    let rows = raw
        .into_iter()
        .map(|(x, pair)| {
            let pair = pair.map(|pr| {
                let labeled = track_modes(&[pr], previous)[0];
                previous = Some(labeled);
                labeled
            });
            if pair.is_none() {
                failures += 1;
            }
            ModeSweepRow { x, pair }
        })
        .collect();
    Ok(SweepOutcome { rows, failures })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakSweepRow {
    pub x: f64,
    /// Fitted double-Lorentzian centres (rad/s), lower first.
    pub centers: Option<[f64; 2]>,
    /// Fitted half-widths (rad/s).
    pub widths: Option<[f64; 2]>,
}

impl PeakSweepRow {
    pub fn cells(&self) -> Vec<Cell> {
        let mut row = vec![Some(self.x)];
        match (self.centers, self.widths) {
            (Some(c), Some(w)) => row.extend([c[0], c[1], w[0], w[1]].map(|v| Some(to_hz(v)))),
            _ => row.extend([None; 4]),
        }
        row
    }
}

pub const PEAK_HEADER: [&str; 5] = [
    "x",
    "center_low_hz",
    "center_high_hz",
    "hwhm_low_hz",
    "hwhm_high_hz",
];

/// Double-Lorentzian fit of `S_NPS` at every sweep point.
pub fn sweep_spectrum_peaks(
    p: &SystemParams,
    spec: &SweepSpec,
    grid: &GridSpec,
) -> Result<SweepOutcome<PeakSweepRow>> {
    spec.validate()?;
    grid.validate()?;
    let rows: Vec<PeakSweepRow> = spec
        .values()
        .into_par_iter()
        .map(|x| {
            let q = spec.apply(p, x);
            let fit = q
                .validate()
                .and_then(|_| noise_power_spectrum(&q, driven_coupling(&q), grid))
                .and_then(|s| fit_lorentzian(&s.omega_axis, &s.s_nps_values, 2, None))
                .ok()
                .filter(|f| f.centers.iter().chain(&f.widths).all(|v| v.is_finite()));
            PeakSweepRow {
                x,
                centers: fit.as_ref().map(|f| [f.centers[0], f.centers[1]]),
                widths: fit.as_ref().map(|f| [f.widths[0], f.widths[1]]),
            }
        })
        .collect();
    let failures = rows.iter().filter(|r| r.centers.is_none()).count();
    Ok(SweepOutcome { rows, failures })
}
