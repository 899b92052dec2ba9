//! Linear Langevin dynamics of the canonical vector `R = (X_c, P_c, X_m, P_m)`.
//!
//! `dR/dt = (J·M − D − D̄)·R − √(2D)·R_in − √(2D̄)·R̄_in`

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat4};
use crate::params::SystemParams;

/// Symplectic form for two canonical pairs.
pub const J: Mat4 = [
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftModel {
    /// Quadratic form of `H = (ħ/2) Rᵀ M R`.
    pub m_matrix: Mat4,
    pub j_matrix: Mat4,
    /// Diagonal `(κ, κ, γ_m⁰, γ_m⁰)`.
    pub d_matrix: Mat4,
    /// Diagonal `(κ̄, κ̄, 0, 0)`.
    pub d_bar_matrix: Mat4,
    pub drift: Mat4,
}

/// Quadratic-form matrix with the `−ħ g X_c X_m` coupling.
pub fn quadratic_form(detuning: f64, omega_m: f64, g: f64) -> Mat4 {
    let mut m = linalg::diag(&[detuning, detuning, omega_m, omega_m]);
    m[0][2] = -g;
    m[2][0] = -g;
    m
}

pub fn build_drift(p: &SystemParams, g: f64) -> DriftModel {
    let m_matrix = quadratic_form(p.detuning, p.omega_m, g);
    let d_matrix = linalg::diag(&[p.kappa, p.kappa, p.gamma_m0, p.gamma_m0]);
    let d_bar_matrix = linalg::diag(&[p.kappa_bar, p.kappa_bar, 0.0, 0.0]);
    DriftModel::from_parts(m_matrix, d_matrix, d_bar_matrix)
}

impl DriftModel {
    pub fn from_parts(m_matrix: Mat4, d_matrix: Mat4, d_bar_matrix: Mat4) -> Self {
        let jm = linalg::mul(&J, &m_matrix);
        let drift = linalg::sub(&linalg::sub(&jm, &d_matrix), &d_bar_matrix);
        DriftModel {
            m_matrix,
            j_matrix: J,
            d_matrix,
            d_bar_matrix,
            drift,
        }
    }

    /// Same Hamiltonian with every decay rate multiplied by `factor`.
    pub fn with_damping_scaled(&self, factor: f64) -> Self {
        DriftModel::from_parts(
            self.m_matrix,
            linalg::scale(&self.d_matrix, factor),
            linalg::scale(&self.d_bar_matrix, factor),
        )
    }

    pub fn d_diag(&self) -> [f64; 4] {
        core::array::from_fn(|i| self.d_matrix[i][i])
    }

    pub fn d_bar_diag(&self) -> [f64; 4] {
        core::array::from_fn(|i| self.d_bar_matrix[i][i])
    }
}

/// Eigenvalues `λ` of the drift matrix. Mode frequencies are `Im λ` and mode
/// damping rates are `−Re λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSet {
    /// Sorted by imaginary part descending; near-ties by real part ascending
    /// (the more strongly damped root first).
    pub eigenvalues: [Complex64; 4],
}

impl EigenSet {
    pub fn from_unsorted(mut eigenvalues: [Complex64; 4]) -> Self {
        let scale = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tie = 1e-9 * scale;
        eigenvalues.sort_by(|a, b| {
            if (a.im - b.im).abs() <= tie {
                a.re.total_cmp(&b.re)
            } else {
                b.im.total_cmp(&a.im)
            }
        });
        EigenSet { eigenvalues }
    }

    /// The two eigenvalues with the largest imaginary parts.
    pub fn upper_pair(&self) -> [Complex64; 2] {
        [self.eigenvalues[0], self.eigenvalues[1]]
    }

    /// The same spectrum expressed as eigenvalues of `i·drift`.
    pub fn of_i_drift(&self) -> [Complex64; 4] {
        self.eigenvalues.map(|z| Complex64::i() * z)
    }

    pub fn max_growth_rate(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_stable(&self) -> bool {
        self.max_growth_rate() < 0.0
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn require_stable(&self) -> Result<()> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(Error::DynamicInstability {
                growth_rate: self.max_growth_rate(),
            })
        }
    }
}

pub fn damped_eigenvalues(d: &DriftModel) -> Result<EigenSet> {
    linalg::eigenvalues(&d.drift).map(EigenSet::from_unsorted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::hz;

    #[test]
    fn matrix_structure() {
        let p = SystemParams::reference();
        let g = hz(300e3);
        let d = build_drift(&p, g);
        assert_eq!(d.m_matrix, linalg::transpose(&d.m_matrix));
        assert_eq!(d.m_matrix[0][2], -g);
        let jj = linalg::mul(&d.j_matrix, &d.j_matrix);
        assert_eq!(jj, linalg::scale(&linalg::identity(), -1.0));
        // (P_c, X_m) slot of J·M is −M[0][2] = +g
        assert_eq!(d.drift[1][2], g);
        assert_eq!(d.d_diag(), [p.kappa, p.kappa, p.gamma_m0, p.gamma_m0]);
        assert_eq!(d.d_bar_diag(), [p.kappa_bar, p.kappa_bar, 0.0, 0.0]);
    }

    #[test]
    fn uncoupled_drift_is_block_diagonal() {
        let p = SystemParams::reference();
        let d = build_drift(&p, 0.0);
        for i in 0..2 {
            for j in 2..4 {
                assert_eq!(d.drift[i][j], 0.0);
                assert_eq!(d.drift[j][i], 0.0);
            }
        }
        let ev = damped_eigenvalues(&d).unwrap();
        let kt = p.kappa_total();
        let expected = [
            Complex64::new(-kt, p.detuning),
            Complex64::new(-p.gamma_m0, p.omega_m),
        ];
        for e in expected {
            let hit = ev.eigenvalues.iter().any(|z| (z - e).norm() < 1e-9 * e.norm());
            let hit_conj = ev.eigenvalues.iter().any(|z| (z - e.conj()).norm() < 1e-9 * e.norm());
            assert!(hit && hit_conj, "{e} missing from {:?}", ev.eigenvalues);
        }
        // Δ = ω_m tie broken towards the cavity-like (more damped) root
        assert!((ev.eigenvalues[0].re + kt).abs() < 1e-6 * kt);
    }

    #[test]
    fn undamped_spectrum_is_imaginary() {
        let p = SystemParams::reference();
        let d = build_drift(&p, hz(250e3)).with_damping_scaled(0.0);
        let ev = damped_eigenvalues(&d).unwrap();
        let max_im = ev.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        for z in ev.eigenvalues {
            assert!(z.re.abs() <= 1e-9 * max_im, "{z}");
        }
    }

    #[test]
    fn ordering_is_descending_in_frequency() {
        let p = SystemParams::reference();
        let ev = damped_eigenvalues(&build_drift(&p, hz(321e3))).unwrap();
        assert!(ev.eigenvalues.windows(2).all(|w| w[0].im >= w[1].im));
        assert!(ev.is_stable());
        assert_eq!(ev.of_i_drift()[0], Complex64::i() * ev.eigenvalues[0]);
    }
}
