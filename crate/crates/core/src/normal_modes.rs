//! Normal modes of the coupled cavity–mechanics system.
//!
//! Undamped frequencies come from the closed-form biquadratic roots; damped
//! frequencies and rates come from the drift spectrum. The symplectic
//! transform is built numerically from a Cholesky factor of `M` and an
//! orthogonal block-diagonalisation of the resulting antisymmetric form.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dynamics::{build_drift, damped_eigenvalues, quadratic_form, J};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat4};
use crate::params::{driven_coupling, SystemParams, TWO_PI};

/// Relative eigenvalue separation below which two modes are reported as a
/// merged (degenerate) pair.
pub const DEGENERACY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModes {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// `omega_plus − omega_minus`
    pub splitting: f64,
    /// Set when the two eigenvalues coincide to within [`DEGENERACY_TOL`].
    pub degenerate: bool,
}

impl NormalModes {
    /// Builds the mode record from labelled upper-half-plane drift eigenvalues.
    pub fn from_pair(plus: Complex64, minus: Complex64) -> Self {
        let scale = plus.norm().max(minus.norm());
        NormalModes {
            omega_plus: plus.im,
            omega_minus: minus.im,
            gamma_plus: -plus.re,
            gamma_minus: -minus.re,
            splitting: plus.im - minus.im,
            degenerate: (plus - minus).norm() <= DEGENERACY_TOL * scale,
        }
    }

    pub fn damping_difference(&self) -> f64 {
        self.gamma_plus - self.gamma_minus
    }
}

/// Closed-form undamped normal-mode frequencies `(ω₊, ω₋)`.
pub fn undamped_frequencies(p: &SystemParams, g: f64) -> Result<(f64, f64)> {
    let d = p.detuning;
    let w = p.omega_m;
    let sum = d * d + w * w;
    let product = d * d * w * w - g * g * w * d;
    let disc = (d * d - w * w) * (d * d - w * w) + 4.0 * g * g * w * d;
    if disc < 0.0 {
        return Err(Error::StaticInstability {
            omega_minus_sq: 0.5 * sum,
        });
    }
    let plus_sq = 0.5 * (sum + libm::sqrt(disc));
    // product form avoids cancellation in the lower root
    let minus_sq = if plus_sq > 0.0 { product / plus_sq } else { 0.0 };
    if minus_sq < 0.0 {
        return Err(Error::StaticInstability {
            omega_minus_sq: minus_sq,
        });
    }
    Ok((libm::sqrt(plus_sq), libm::sqrt(minus_sq)))
}

/// Damped mode frequencies and rates, labelled by frequency.
pub fn damped_modes(p: &SystemParams, g: f64) -> Result<NormalModes> {
    let ev = damped_eigenvalues(&build_drift(p, g))?;
    let [plus, minus] = ev.upper_pair();
    Ok(NormalModes::from_pair(plus, minus))
}

/// Labels a sequence of upper-half-plane eigenvalue pairs by continuity.
///
/// Each step is matched to the previous labelled pair by the assignment with
/// the smaller total distance in the complex plane. Without a `previous`
/// pair the first step is labelled by frequency (larger imaginary part is
/// `+`).
pub fn track_modes(
    sweep: &[[Complex64; 2]],
    previous: Option<[Complex64; 2]>,
) -> Vec<[Complex64; 2]> {
    let mut prev = previous;
    let mut out = Vec::with_capacity(sweep.len());
    for &[a, b] in sweep {
        let labeled = match prev {
            None => {
                if a.im >= b.im {
                    [a, b]
                } else {
                    [b, a]
                }
            }
            Some([q_plus, q_minus]) => {
                let keep = (a - q_plus).norm() + (b - q_minus).norm();
                let swap = (b - q_plus).norm() + (a - q_minus).norm();
                if keep <= swap {
                    [a, b]
                } else {
                    [b, a]
                }
            }
        };
        out.push(labeled);
        prev = Some(labeled);
    }
    out
}

/// `|ω₊ − ω₋| − |γ₊ − γ₋|`: negative while the damping rates are split and
/// the frequencies merged, positive once the frequencies separate.
pub fn splitting_excess(p: &SystemParams, g: f64) -> Result<f64> {
    let m = damped_modes(p, g)?;
    Ok(m.splitting.abs() - m.damping_difference().abs())
}

/// Coupling at which the damped normal-mode frequencies start to separate,
/// located by bisection to 1 Hz. `None` when no crossing exists below the
/// static stability limit.
pub fn threshold_coupling(p: &SystemParams) -> Result<Option<f64>> {
    if p.detuning <= 0.0 {
        return Ok(None);
    }
    let mut lo = 0.0;
    if splitting_excess(p, lo)? >= 0.0 {
        return Ok(Some(0.0));
    }
    let mut hi = 0.999 * libm::sqrt(p.detuning * p.omega_m);
    if splitting_excess(p, hi)? < 0.0 {
        return Ok(None);
    }
    while hi - lo > TWO_PI {
        let mid = 0.5 * (lo + hi);
        if splitting_excess(p, mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Drive power at which [`driven_coupling`] reaches the threshold coupling.
pub fn threshold_power(p: &SystemParams) -> Result<Option<f64>> {
    let g_unit = driven_coupling(&p.with_power(1.0));
    Ok(threshold_coupling(p)?.map(|g| (g / g_unit) * (g / g_unit)))
}

/// Linear map `R_nm = S·R` to the normal-mode quadratures
/// `(X₊, P₊, X₋, P₋)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticTransform {
    pub s_matrix: Mat4,
    pub omega_plus: f64,
    pub omega_minus: f64,
}

impl SymplecticTransform {
    /// `diag(ω₊, ω₊, ω₋, ω₋)`
    pub fn frequencies(&self) -> Mat4 {
        linalg::diag(&[self.omega_plus, self.omega_plus, self.omega_minus, self.omega_minus])
    }

    /// `‖S J Sᵀ − J‖∞`
    pub fn symplectic_defect(&self) -> f64 {
        let s = &self.s_matrix;
        let sjst = linalg::mul(&linalg::mul(s, &J), &linalg::transpose(s));
        linalg::norm_inf(&linalg::sub(&sjst, &J))
    }

    /// `‖Sᵀ Λ S − M‖∞`
    pub fn diagonalization_defect(&self, m: &Mat4) -> f64 {
        let s = &self.s_matrix;
        let back = linalg::mul(&linalg::mul(&linalg::transpose(s), &self.frequencies()), s);
        linalg::norm_inf(&linalg::sub(&back, m))
    }
}

pub fn symplectic_transform(p: &SystemParams, g: f64) -> Result<SymplecticTransform> {
    williamson(&quadratic_form(p.detuning, p.omega_m, g))
}

fn normalize(v: &mut [f64; 4]) -> f64 {
    let n = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn column(m: &Mat4, j: usize) -> [f64; 4] {
    core::array::from_fn(|i| m[i][j])
}

/// Williamson normal form of a positive-definite quadratic form.
pub fn williamson(m: &Mat4) -> Result<SymplecticTransform> {
    let l = linalg::cholesky(m).ok_or(Error::NotPositiveDefinite)?;
    // A = Lᵀ J L is antisymmetric with eigenvalues ±iω±.
    let a = linalg::mul(&linalg::mul(&linalg::transpose(&l), &J), &l);
    let a2 = linalg::mul(&a, &a);
    let mut neg_a2 = linalg::zeros();
    for i in 0..4 {
        for j in 0..4 {
            neg_a2[i][j] = -0.5 * (a2[i][j] + a2[j][i]);
        }
    }
    let (_, vecs) = linalg::symmetric_eigen(&neg_a2);

    let mut o = [[0.0; 4]; 4]; // columns stored as rows here, transposed below
    let mut freqs = [0.0; 2];
    for (mode, &source) in [3usize, 0].iter().enumerate() {
        let mut first = column(&vecs, source);
        // orthogonalise against the pair already built
        for prev in o.iter().take(2 * mode) {
            let dot: f64 = first.iter().zip(prev).map(|(x, y)| x * y).sum();
            first.iter_mut().zip(prev).for_each(|(x, y)| *x -= dot * y);
        }
        normalize(&mut first);
        let mut second = linalg::mul_vec(&a, &first);
        second.iter_mut().for_each(|x| *x = -*x);
        let omega = normalize(&mut second);
        o[2 * mode] = first;
        o[2 * mode + 1] = second;
        freqs[mode] = omega;
    }
    let (omega_plus, omega_minus) = (freqs[0], freqs[1]);

    // S = Λ^{-1/2} Oᵀ Lᵀ, with the rows of `o` already being Oᵀ.
    let lt = linalg::transpose(&l);
    let mut s = linalg::mul(&o, &lt);
    let inv_sqrt = [omega_plus, omega_plus, omega_minus, omega_minus].map(|w| 1.0 / libm::sqrt(w));
    for (row, f) in s.iter_mut().zip(inv_sqrt) {
        row.iter_mut().for_each(|x| *x *= f);
    }
    fix_gauge(&mut s);
    Ok(SymplecticTransform {
        s_matrix: s,
        omega_plus,
        omega_minus,
    })
}

/// Removes the per-mode phase freedom: each `X` row is rotated (together with
/// its `P` partner) until it carries no momentum components, then the pair is
/// flipped so the first nonzero entry of the `X` row is positive.
fn fix_gauge(s: &mut Mat4) {
    for mode in 0..2 {
        let (rx, rp) = (2 * mode, 2 * mode + 1);
        let j = if s[rx][1].abs() + s[rp][1].abs() >= s[rx][3].abs() + s[rp][3].abs() {
            1
        } else {
            3
        };
        let theta = libm::atan2(-s[rx][j], s[rp][j]);
        let (sin, cos) = (libm::sin(theta), libm::cos(theta));
        for k in 0..4 {
            let x = s[rx][k];
            let y = s[rp][k];
            s[rx][k] = cos * x + sin * y;
            s[rp][k] = -sin * x + cos * y;
        }
        let scale = s[rx].iter().map(|x| x.abs()).fold(0.0, f64::max);
        let lead = s[rx].iter().copied().find(|x| x.abs() > 1e-12 * scale);
        if lead.is_some_and(|x| x < 0.0) {
            for k in 0..4 {
                s[rx][k] = -s[rx][k];
                s[rp][k] = -s[rp][k];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::hz;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn uncoupled_frequencies() {
        let p = SystemParams::reference().with_detuning(hz(1.2e6));
        let (wp, wm) = undamped_frequencies(&p, 0.0).unwrap();
        assert_eq!((wp, wm), (p.detuning, p.omega_m));
        let low = p.with_detuning(hz(0.8e6));
        let (wp, wm) = undamped_frequencies(&low, 0.0).unwrap();
        assert!(rel(wp, low.omega_m) < 1e-15 && rel(wm, low.detuning) < 1e-15);
    }

    #[test]
    fn resonant_reduction() {
        let p = SystemParams::reference();
        let g = hz(321e3);
        let (wp, wm) = undamped_frequencies(&p, g).unwrap();
        let w = p.omega_m;
        assert!(rel(wp, w * (1.0 + g / w).sqrt()) < 1e-14);
        assert!(rel(wm, w * (1.0 - g / w).sqrt()) < 1e-13);
    }

    #[test]
    fn static_instability_reported() {
        let p = SystemParams::reference();
        let g = 1.01 * (p.detuning * p.omega_m).sqrt();
        assert!(matches!(
            undamped_frequencies(&p, g),
            Err(Error::StaticInstability { .. })
        ));
        assert_eq!(symplectic_transform(&p, g), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn uncoupled_damped_labels() {
        let p = SystemParams::reference();
        let m = damped_modes(&p, 0.0).unwrap();
        assert!(rel(m.gamma_plus, p.kappa_total()) < 1e-9);
        assert!(rel(m.gamma_minus, p.gamma_m0) < 1e-6);
    }

    #[test]
    fn vanishing_damping_matches_closed_form() {
        let p = SystemParams::reference().with_detuning(hz(1.0e6));
        let g = hz(200e3);
        let ev = damped_eigenvalues(&build_drift(&p, g).with_damping_scaled(0.0)).unwrap();
        let (wp, wm) = undamped_frequencies(&p, g).unwrap();
        assert!(rel(ev.eigenvalues[0].im, wp) < 1e-9);
        assert!(rel(ev.eigenvalues[1].im, wm) < 1e-9);
    }

    #[test]
    fn identity_transform_when_uncoupled() {
        let p = SystemParams::reference().with_detuning(hz(1.3e6));
        let t = symplectic_transform(&p, 0.0).unwrap();
        assert!(linalg::norm_inf(&linalg::sub(&t.s_matrix, &linalg::identity())) < 1e-12);
        // Δ < ω_m: the mechanical pair is the upper mode
        let p = p.with_detuning(hz(0.7e6));
        let t = symplectic_transform(&p, 0.0).unwrap();
        let mut swapped = linalg::zeros();
        swapped[0][2] = 1.0;
        swapped[1][3] = 1.0;
        swapped[2][0] = 1.0;
        swapped[3][1] = 1.0;
        assert!(linalg::norm_inf(&linalg::sub(&t.s_matrix, &swapped)) < 1e-12);
    }

    #[test]
    fn resonant_quadratures_closed_form() {
        // Δ = ω_m with −g coupling: X₊ ∝ (X_c − X_m), X₋ ∝ (X_c + X_m), and
        // canonical normalisation fixes the X weight to ((ω ± g)/ω)^{1/4}/√2.
        let p = SystemParams::reference();
        let w = p.omega_m;
        for g in [1e-3 * w, 0.05 * w, 0.3 * w] {
            let s = symplectic_transform(&p, g).unwrap().s_matrix;
            let xp = ((w + g) / w).powf(0.25) / 2f64.sqrt();
            let xm = ((w - g) / w).powf(0.25) / 2f64.sqrt();
            let expected = [
                [xp, 0.0, -xp, 0.0],
                [0.0, 0.5 / xp, 0.0, -0.5 / xp],
                [xm, 0.0, xm, 0.0],
                [0.0, 0.5 / xm, 0.0, 0.5 / xm],
            ];
            assert!(linalg::norm_inf(&linalg::sub(&s, &expected)) < 1e-12, "{s:?}");
        }
    }

    #[test]
    fn tracking_follows_continuity() {
        // two branches whose frequencies cross at t = 0.5 but whose damping
        // rates stay distinct
        let sweep: Vec<[Complex64; 2]> = (0..11)
            .map(|k| {
                let t = k as f64 / 10.0;
                let a = Complex64::new(-1.0, 1.0 + t);
                let b = Complex64::new(-3.0, 2.0 - t);
                [a, b]
            })
            .collect();
        let labeled = track_modes(&sweep, None);
        assert_eq!(labeled[0][0].re, -3.0);
        assert!(labeled.iter().all(|[plus, _]| plus.re == -3.0));
        // single point: magnitude ordering
        let single = track_modes(&[[Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0)]], None);
        assert_eq!(single[0][0].im, 2.0);
    }

    #[test]
    fn threshold_near_total_decay() {
        let p = SystemParams::reference();
        let g_th = threshold_coupling(&p).unwrap().unwrap();
        let kt = p.kappa_total();
        assert!(g_th > 0.8 * kt && g_th < 1.2 * kt, "{} vs {}", g_th, kt);
        let p_th = threshold_power(&p).unwrap().unwrap();
        assert!(rel(driven_coupling(&p.with_power(p_th)), g_th) < 1e-12);
        assert_eq!(threshold_coupling(&p.with_detuning(-p.omega_m)).unwrap(), None);
    }
}
