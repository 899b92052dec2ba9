//! Stationary output spectrum of the cavity field.
//!
//! The output correlation matrix `Γ(ω)` collects the input-port vacuum and
//! thermal noise propagated through the resolvent `(iω + JM − D − D̄)⁻¹`,
//! plus the vacuum entering through the second mirror.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dynamics::{build_drift, damped_eigenvalues, DriftModel};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat4};
use crate::params::{thermal_occupation, SystemParams};

/// Level of `S(ω)` for a cavity that sees only vacuum noise. The noise
/// correlations are symmetrised, so the vacuum contributes one half.
pub const VACUUM_LEVEL: f64 = 0.5;

/// Diagonal noise correlations for the input-coupler/bath channels (`N`) and
/// the second-mirror channels (`N̄`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub n_matrix: [f64; 4],
    pub n_bar_matrix: [f64; 4],
}

impl NoiseModel {
    pub fn thermal(n_bar: f64) -> Self {
        NoiseModel {
            n_matrix: [0.5, 0.5, n_bar + 0.5, n_bar + 0.5],
            n_bar_matrix: [0.5, 0.5, 0.0, 0.0],
        }
    }

    pub fn from_params(p: &SystemParams) -> Self {
        Self::thermal(thermal_occupation(p))
    }
}

fn sqrt2(d: [f64; 4]) -> [f64; 4] {
    d.map(|x| libm::sqrt(2.0 * x))
}

fn resolvent(d: &DriftModel, omega: f64) -> Result<CMat4> {
    let mut a = linalg::to_complex(&d.drift);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += Complex64::new(0.0, omega);
    }
    linalg::cinverse(&a)
}

/// Output spectral correlation matrix `Γ(ω)`.
pub fn gamma_matrix(d: &DriftModel, n: &NoiseModel, omega: f64) -> Result<CMat4> {
    let s = sqrt2(d.d_diag());
    let s_bar = sqrt2(d.d_bar_diag());
    let r_pos = resolvent(d, omega)?;
    let r_neg = resolvent(d, -omega)?;

    let mut t_pos = linalg::cdiag_sandwich(&s, &r_pos, &s);
    let mut t_neg = linalg::cdiag_sandwich(&s, &r_neg, &s);
    for i in 0..4 {
        t_pos[i][i] += 1.0;
        t_neg[i][i] += 1.0;
    }
    let b_pos = linalg::cdiag_sandwich(&s, &r_pos, &s_bar);
    // the input-output relation puts √(2D̄) on the input side of both factors
    let b_neg = linalg::cdiag_sandwich(&s, &r_neg, &s_bar);

    let ones = [1.0; 4];
    let port = linalg::cmul(
        &linalg::cdiag_sandwich(&ones, &t_pos, &n.n_matrix),
        &linalg::ctranspose(&t_neg),
    );
    let mirror = linalg::cmul(
        &linalg::cdiag_sandwich(&ones, &b_pos, &n.n_bar_matrix),
        &linalg::ctranspose(&b_neg),
    );
    let mut gamma = port;
    for i in 0..4 {
        for j in 0..4 {
            gamma[i][j] += mirror[i][j];
        }
    }
    Ok(gamma)
}

/// `S = ½[Γ₁₁ + Γ₂₂ + i(Γ₁₂ − Γ₂₁)]`; the imaginary residue of a Hermitian
/// `Γ` vanishes and is dropped.
pub fn spectral_density(gamma: &CMat4) -> f64 {
    let i = Complex64::i();
    let s = 0.5 * (gamma[0][0] + gamma[1][1] + i * (gamma[0][1] - gamma[1][0]));
    debug_assert!(s.im.abs() <= 1e-8 * s.norm().max(1.0));
    s.re
}

/// `‖Γ − Γᴴ‖∞ / ‖Γ‖∞`
pub fn hermiticity_defect(gamma: &CMat4) -> f64 {
    let adj = linalg::cadjoint(gamma);
    let mut diff = *gamma;
    for i in 0..4 {
        for j in 0..4 {
            diff[i][j] -= adj[i][j];
        }
    }
    linalg::cnorm_inf(&diff) / linalg::cnorm_inf(gamma)
}

/// `(S(ω), S(−ω))` for one sideband frequency.
pub fn sideband_pair(d: &DriftModel, n: &NoiseModel, omega: f64) -> Result<(f64, f64)> {
    let pos = spectral_density(&gamma_matrix(d, n, omega)?);
    let neg = spectral_density(&gamma_matrix(d, n, -omega)?);
    Ok((pos, neg))
}

/// `√(S(ω)² + S(−ω)²)`
pub fn nps(pos: f64, neg: f64) -> f64 {
    libm::hypot(pos, neg)
}

/// Uniform sideband-frequency grid (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridSpec {
    pub const DEFAULT_POINTS: usize = 4096;

    /// 4096 points spanning `[0.5 ω_m, 1.5 ω_m]`.
    pub fn around_mechanics(p: &SystemParams) -> Self {
        GridSpec {
            start: 0.5 * p.omega_m,
            stop: 1.5 * p.omega_m,
            points: Self::DEFAULT_POINTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.start.is_finite()
            && self.stop.is_finite()
            && self.start >= 0.0
            && self.stop > self.start
            && self.points >= 2;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGrid)
        }
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn axis(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points).map(|k| self.start + k as f64 * h).collect()
    }
}

/// Sampled spectrum. `s_values` holds `S(ω)`, `s_neg_values` holds `S(−ω)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectrumGrid {
    pub omega_axis: Vec<f64>,
    pub s_values: Vec<f64>,
    pub s_neg_values: Vec<f64>,
    pub s_nps_values: Vec<f64>,
}

impl SpectrumGrid {
    pub fn len(&self) -> usize {
        self.omega_axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega_axis.is_empty()
    }

    /// Samples of `S_NPS` with `lo ≤ ω ≤ hi`.
    pub fn nps_window(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        self.omega_axis
            .iter()
            .zip(&self.s_nps_values)
            .filter(|(w, _)| **w >= lo && **w <= hi)
            .map(|(w, s)| (*w, *s))
            .unzip()
    }
}

/// Evaluates `S(±ω)` and `S_NPS` on a grid for the given drift.
pub fn spectrum_on_axis(d: &DriftModel, n: &NoiseModel, axis: &[f64]) -> Result<SpectrumGrid> {
    damped_eigenvalues(d)?.require_stable()?;
    let mut grid = SpectrumGrid {
        omega_axis: axis.to_vec(),
        s_values: Vec::with_capacity(axis.len()),
        s_neg_values: Vec::with_capacity(axis.len()),
        s_nps_values: Vec::with_capacity(axis.len()),
    };
    for &w in axis {
        let (pos, neg) = sideband_pair(d, n, w)?;
        grid.s_values.push(pos);
        grid.s_neg_values.push(neg);
        grid.s_nps_values.push(nps(pos, neg));
    }
    Ok(grid)
}

/// Homodyne-observable noise power spectrum for the device at coupling `g`.
pub fn noise_power_spectrum(p: &SystemParams, g: f64, grid: &GridSpec) -> Result<SpectrumGrid> {
    grid.validate()?;
    let d = build_drift(p, g);
    spectrum_on_axis(&d, &NoiseModel::from_params(p), &grid.axis())
}
