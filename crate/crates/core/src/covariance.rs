//! Steady-state covariance of the linear Langevin system.
//!
//! Solves `A C + C Aᵀ + Q = 0` with `Q = 2 D N + 2 D̄ N̄` for the symmetric
//! covariance `C` of `R`.

use crate::dynamics::{damped_eigenvalues, DriftModel};
use crate::error::Result;
use crate::linalg::{self, Mat4, N};
use crate::spectrum::NoiseModel;

const UNKNOWNS: usize = N * (N + 1) / 2;

/// Diagonal of the diffusion matrix `2 D N + 2 D̄ N̄`.
pub fn diffusion_diag(d: &DriftModel, n: &NoiseModel) -> [f64; 4] {
    let dd = d.d_diag();
    let db = d.d_bar_diag();
    core::array::from_fn(|i| 2.0 * dd[i] * n.n_matrix[i] + 2.0 * db[i] * n.n_bar_matrix[i])
}

fn packed(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * N - a * (a + 1) / 2 + b
}

/// Stationary covariance; fails on an unstable drift.
pub fn steady_state_covariance(d: &DriftModel, n: &NoiseModel) -> Result<Mat4> {
    damped_eigenvalues(d)?.require_stable()?;
    let a = &d.drift;
    let q = diffusion_diag(d, n);
    let mut lhs = [0.0; UNKNOWNS * UNKNOWNS];
    let mut rhs = [0.0; UNKNOWNS];
    for i in 0..N {
        for j in i..N {
            let row = packed(i, j);
            // (A C)_ij + (C Aᵀ)_ij = Σ_k A_ik C_kj + C_ik A_jk
            for k in 0..N {
                lhs[row * UNKNOWNS + packed(k, j)] += a[i][k];
                lhs[row * UNKNOWNS + packed(i, k)] += a[j][k];
            }
            rhs[row] = if i == j { -q[i] } else { 0.0 };
        }
    }
    linalg::solve_dense(&mut lhs, &mut rhs, UNKNOWNS)?;
    let mut c = linalg::zeros();
    for i in 0..N {
        for j in 0..N {
            c[i][j] = rhs[packed(i, j)];
        }
    }
    Ok(c)
}

/// `‖A C + C Aᵀ + Q‖∞ / ‖Q‖∞`
pub fn lyapunov_residual(d: &DriftModel, n: &NoiseModel, c: &Mat4) -> f64 {
    let q = diffusion_diag(d, n);
    let ac = linalg::mul(&d.drift, c);
    let mut r = linalg::zeros();
    for i in 0..N {
        for j in 0..N {
            r[i][j] = ac[i][j] + ac[j][i] + if i == j { q[i] } else { 0.0 };
        }
    }
    let q_norm = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    linalg::norm_inf(&r) / q_norm
}
