//! Fixed-size 4×4 dense linear algebra.
//!
//! Everything here works on stack arrays: the models in this crate never need
//! more than four canonical coordinates, so there is no general-N machinery.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const N: usize = 4;

pub type Mat4 = [[f64; N]; N];
pub type CMat4 = [[Complex64; N]; N];
pub type Vec4 = [f64; N];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Iteration cap per eigenvalue for the shifted QR sweep.
pub const QR_MAX_ITERATIONS: usize = 200;

pub fn zeros() -> Mat4 {
    [[0.0; N]; N]
}

pub fn identity() -> Mat4 {
    diag(&[1.0; N])
}

pub fn diag(d: &Vec4) -> Mat4 {
    let mut m = zeros();
    for i in 0..N {
        m[i][i] = d[i];
    }
    m
}

pub fn transpose(a: &Mat4) -> Mat4 {
    let mut t = zeros();
    for i in 0..N {
        for j in 0..N {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = zeros();
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..N {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn mul_vec(a: &Mat4, x: &Vec4) -> Vec4 {
    let mut y = [0.0; N];
    for i in 0..N {
        y[i] = (0..N).map(|j| a[i][j] * x[j]).sum();
    }
    y
}

pub fn sub(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = *a;
    for i in 0..N {
        for j in 0..N {
            c[i][j] -= b[i][j];
        }
    }
    c
}

pub fn scale(a: &Mat4, s: f64) -> Mat4 {
    let mut c = *a;
    c.iter_mut().flatten().for_each(|x| *x *= s);
    c
}

pub fn trace(a: &Mat4) -> f64 {
    (0..N).map(|i| a[i][i]).sum()
}

/// Maximum absolute row sum.
pub fn norm_inf(a: &Mat4) -> f64 {
    a.iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn cnorm_inf(a: &CMat4) -> f64 {
    a.iter()
        .map(|row| row.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn to_complex(a: &Mat4) -> CMat4 {
    let mut c = [[ZERO; N]; N];
    for i in 0..N {
        for j in 0..N {
            c[i][j] = Complex64::new(a[i][j], 0.0);
        }
    }
    c
}

pub fn cidentity() -> CMat4 {
    let mut c = [[ZERO; N]; N];
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = ONE;
    }
    c
}

pub fn cmul(a: &CMat4, b: &CMat4) -> CMat4 {
    let mut c = [[ZERO; N]; N];
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            for j in 0..N {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn ctranspose(a: &CMat4) -> CMat4 {
    let mut t = [[ZERO; N]; N];
    for i in 0..N {
        for j in 0..N {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn cadjoint(a: &CMat4) -> CMat4 {
    let mut t = [[ZERO; N]; N];
    for i in 0..N {
        for j in 0..N {
            t[j][i] = a[i][j].conj();
        }
    }
    t
}

/// Scales row `i` by `left[i]` and column `j` by `right[j]`, i.e. computes
/// `diag(left) · a · diag(right)`.
pub fn cdiag_sandwich(left: &Vec4, a: &CMat4, right: &Vec4) -> CMat4 {
    let mut c = *a;
    for i in 0..N {
        for j in 0..N {
            c[i][j] *= left[i] * right[j];
        }
    }
    c
}

/// Solves `a · x = b` for a matrix right-hand side by LU with partial
/// pivoting.
pub fn csolve(a: &CMat4, b: &CMat4) -> Result<CMat4> {
    let mut a = *a;
    let mut x = *b;
    for k in 0..N {
        let pivot = (k..N)
            .max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm()))
            .unwrap_or(k);
        if a[pivot][k].norm() == 0.0 {
            return Err(Error::SingularMatrix);
        }
        a.swap(k, pivot);
        x.swap(k, pivot);
        let inv = ONE / a[k][k];
        for i in (k + 1)..N {
            let factor = a[i][k] * inv;
            if factor == ZERO {
                continue;
            }
            for j in k..N {
                let akj = a[k][j];
                a[i][j] -= factor * akj;
            }
            for j in 0..N {
                let xkj = x[k][j];
                x[i][j] -= factor * xkj;
            }
        }
    }
    for k in (0..N).rev() {
        let inv = ONE / a[k][k];
        for j in 0..N {
            let mut s = x[k][j];
            for i in (k + 1)..N {
                s -= a[k][i] * x[i][j];
            }
            x[k][j] = s * inv;
        }
    }
    Ok(x)
}

pub fn cinverse(a: &CMat4) -> Result<CMat4> {
    csolve(a, &cidentity())
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(a: &Mat4) -> f64 {
    let mut a = *a;
    let mut det = 1.0;
    for k in 0..N {
        let pivot = (k..N)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap_or(k);
        if a[pivot][k] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            a.swap(k, pivot);
            det = -det;
        }
        det *= a[k][k];
        for i in (k + 1)..N {
            let f = a[i][k] / a[k][k];
            for j in k..N {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// Solves `a · x = b` for a real system of any small size stored row-major.
/// Used by the Lyapunov and least-squares solvers.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
            .unwrap_or(k);
        if a[pivot * n + k] == 0.0 {
            return Err(Error::SingularMatrix);
        }
        if pivot != k {
            for j in 0..n {
                a.swap(k * n + j, pivot * n + j);
            }
            b.swap(k, pivot);
        }
        for i in (k + 1)..n {
            let f = a[i * n + k] / a[k * n + k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i * n + j] -= f * a[k * n + j];
            }
            b[i] -= f * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in (k + 1)..n {
            s -= a[k * n + j] * b[j];
        }
        b[k] = s / a[k * n + k];
    }
    Ok(())
}

/// Lower-triangular Cholesky factor `L` with `a = L·Lᵀ`; `None` unless `a`
/// is symmetric positive definite.
pub fn cholesky(a: &Mat4) -> Option<Mat4> {
    let mut l = zeros();
    for i in 0..N {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][i] = libm::sqrt(d);
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix by forward substitution.
pub fn lower_inverse(l: &Mat4) -> Mat4 {
    let mut inv = zeros();
    for col in 0..N {
        for i in col..N {
            let rhs = if i == col { 1.0 } else { 0.0 };
            let s: f64 = (col..i).map(|k| l[i][k] * inv[k][col]).sum();
            inv[i][col] = (rhs - s) / l[i][i];
        }
    }
    inv
}

/// Cyclic Jacobi eigen-decomposition of a real symmetric matrix. Returns
/// eigenvalues in ascending order and the matching eigenvectors as columns.
pub fn symmetric_eigen(a: &Mat4) -> (Vec4, Mat4) {
    let mut a = *a;
    let mut v = identity();
    for _sweep in 0..64 {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = a.iter().flatten().map(|x| x * x).sum();
        if off <= 1e-32 * scale || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..N {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order = [0, 1, 2, 3];
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let mut vals = [0.0; N];
    let mut vecs = zeros();
    for (dst, &src) in order.iter().enumerate() {
        vals[dst] = a[src][src];
        for k in 0..N {
            vecs[k][dst] = v[k][src];
        }
    }
    (vals, vecs)
}

/// Parlett–Reinsch balancing with radix-2 scaling. Similarity-preserving, so
/// the spectrum is unchanged while row and column norms are equalised.
pub fn balance(a: &mut Mat4) {
    const RADIX: f64 = 2.0;
    const RADIX_SQ: f64 = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..N {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..N {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX_SQ;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX_SQ;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..N {
                    a[i][j] *= g;
                }
                for j in 0..N {
                    a[j][i] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Householder reduction to upper Hessenberg form (in place).
pub fn hessenberg(a: &mut Mat4) {
    for k in 0..N.saturating_sub(2) {
        let mut v = [0.0; N];
        let mut norm_sq = 0.0;
        for i in (k + 1)..N {
            v[i] = a[i][k];
            norm_sq += v[i] * v[i];
        }
        let norm = libm::sqrt(norm_sq);
        if norm == 0.0 {
            continue;
        }
        let alpha = if v[k + 1] > 0.0 { -norm } else { norm };
        v[k + 1] -= alpha;
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        // H = I − 2 v vᵀ / |v|², applied from both sides.
        for j in 0..N {
            let s: f64 = ((k + 1)..N).map(|i| v[i] * a[i][j]).sum::<f64>() * 2.0 / vnorm_sq;
            for i in (k + 1)..N {
                a[i][j] -= s * v[i];
            }
        }
        for i in 0..N {
            let s: f64 = ((k + 1)..N).map(|j| a[i][j] * v[j]).sum::<f64>() * 2.0 / vnorm_sq;
            for j in (k + 1)..N {
                a[i][j] -= s * v[j];
            }
        }
        for i in (k + 2)..N {
            a[i][k] = 0.0;
        }
    }
}

fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Rotation `[[c, s], [-conj(s), c]]` with real `c` that maps `(a, b)` onto
/// `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = libm::hypot(na, nb);
    let phase = a / na;
    (na / r, phase * b.conj() / r)
}

/// Eigenvalue of the trailing 2×2 block closest to its last diagonal entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let mu1 = half_tr + disc;
    let mu2 = half_tr - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// All eigenvalues of a real 4×4 matrix: balancing, Hessenberg reduction, then
/// single-shift QR in complex arithmetic with Wilkinson shifts.
pub fn eigenvalues(a: &Mat4) -> Result<[Complex64; N]> {
    let mut work = *a;
    balance(&mut work);
    hessenberg(&mut work);
    let mut h = to_complex(&work);
    let mut eig = [ZERO; N];

    let mut hi = N - 1;
    loop {
        if hi == 0 {
            eig[0] = h[0][0];
            break;
        }
        let mut iterations = 0;
        loop {
            // Locate the start of the active unreduced block.
            let mut lo = hi;
            while lo > 0 {
                let scale = abs1(h[lo - 1][lo - 1]) + abs1(h[lo][lo]);
                let scale = if scale == 0.0 { cnorm_inf(&h) } else { scale };
                if abs1(h[lo][lo - 1]) <= f64::EPSILON * scale {
                    h[lo][lo - 1] = ZERO;
                    break;
                }
                lo -= 1;
            }
            if lo == hi {
                eig[hi] = h[hi][hi];
                break;
            }
            iterations += 1;
            if iterations > QR_MAX_ITERATIONS {
                return Err(Error::NoConvergence {
                    index: hi,
                    iterations: QR_MAX_ITERATIONS,
                });
            }
            let mu = if iterations % 10 == 0 {
                // exceptional shift to break cycles
                h[hi][hi] + Complex64::new(0.75 * abs1(h[hi][hi - 1]), 0.0)
            } else {
                wilkinson_shift(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
            };
            for i in lo..=hi {
                h[i][i] -= mu;
            }
            let mut rotations = [(1.0, ZERO); N];
            for k in lo..hi {
                let (c, s) = givens(h[k][k], h[k + 1][k]);
                rotations[k] = (c, s);
                for j in k..=hi {
                    let x = h[k][j];
                    let y = h[k + 1][j];
                    h[k][j] = x * c + s * y;
                    h[k + 1][j] = -s.conj() * x + y * c;
                }
            }
            for k in lo..hi {
                let (c, s) = rotations[k];
                let last = (k + 2).min(hi);
                for row in h.iter_mut().take(last + 1).skip(lo) {
                    let x = row[k];
                    let y = row[k + 1];
                    row[k] = x * c + y * s.conj();
                    row[k + 1] = -x * s + y * c;
                }
            }
            for i in lo..=hi {
                h[i][i] += mu;
            }
        }
        hi -= 1;
    }
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn companion(coeffs: [f64; 4]) -> Mat4 {
        // x^4 + c3 x^3 + c2 x^2 + c1 x + c0
        let mut m = zeros();
        for i in 1..N {
            m[i][i - 1] = 1.0;
        }
        for i in 0..N {
            m[i][N - 1] = -coeffs[i];
        }
        m
    }

    fn sorted(mut v: [Complex64; 4]) -> [Complex64; 4] {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn companion_roots() {
        // roots 1, 2, 3, 4
        let m = companion([24.0, -50.0, 35.0, -10.0]);
        let ev = sorted(eigenvalues(&m).unwrap());
        for (k, z) in ev.iter().enumerate() {
            assert!((z.re - (k + 1) as f64).abs() < 1e-10, "{ev:?}");
            assert!(z.im.abs() < 1e-10);
        }
    }

    #[test]
    fn complex_pairs_from_rotation_blocks() {
        let mut m = zeros();
        m[0][1] = 3.0;
        m[1][0] = -3.0;
        m[0][0] = -0.5;
        m[1][1] = -0.5;
        m[2][3] = 1.0;
        m[3][2] = -1.0;
        let ev = sorted(eigenvalues(&m).unwrap());
        assert!((ev[0] - Complex64::new(-0.5, -3.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(-0.5, 3.0)).norm() < 1e-12);
        assert!((ev[2] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[3] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_matrix_has_zero_spectrum() {
        let ev = eigenvalues(&zeros()).unwrap();
        assert!(ev.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn solve_and_inverse_agree() {
        let a = [
            [4.0, 1.0, 0.5, 0.0],
            [1.0, 3.0, 0.0, 0.2],
            [0.5, 0.0, 2.0, 0.1],
            [0.0, 0.2, 0.1, 1.0],
        ];
        let mut c = to_complex(&a);
        c[0][1] += Complex64::new(0.0, 0.7);
        let inv = cinverse(&c).unwrap();
        let prod = cmul(&c, &inv);
        for i in 0..N {
            for j in 0..N {
                let expected = if i == j { ONE } else { ZERO };
                assert!((prod[i][j] - expected).norm() < 1e-13);
            }
        }
        let l = cholesky(&a).unwrap();
        let back = mul(&l, &transpose(&l));
        assert!(norm_inf(&sub(&back, &a)) < 1e-14);
        let li = lower_inverse(&l);
        assert!(norm_inf(&sub(&mul(&l, &li), &identity())) < 1e-14);
        assert!((determinant(&a) - determinant(&transpose(&a))).abs() < 1e-12);
    }

    #[test]
    fn singular_solve_is_reported() {
        let c = [[ZERO; N]; N];
        assert_eq!(cinverse(&c), Err(Error::SingularMatrix));
        assert!(cholesky(&diag(&[1.0, -1.0, 1.0, 1.0])).is_none());
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = [
            [2.0, 0.3, 0.0, 0.1],
            [0.3, 1.0, 0.2, 0.0],
            [0.0, 0.2, 3.0, 0.4],
            [0.1, 0.0, 0.4, 0.5],
        ];
        let (vals, vecs) = symmetric_eigen(&a);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let back = mul(&mul(&vecs, &diag(&vals)), &transpose(&vecs));
        assert!(norm_inf(&sub(&back, &a)) < 1e-13);
    }
}
