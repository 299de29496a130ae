//! Small dense Hermitian linear algebra helpers on top of `faer`.
//!
//! Everything here runs sequentially (`faer` is built without its rayon
//! feature) so results are bit-for-bit reproducible regardless of how many
//! worker threads the caller uses.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Mat<Complex64>;

/// Hermitian eigendecomposition. Returns `(eigenvalues, eigenvectors)` with
/// the k-th column of the vector matrix belonging to the k-th eigenvalue.
pub fn eigh(mat: &CMat) -> Result<(Vec<f64>, CMat)> {
    let evd = mat
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let vals = (0..s.nrows()).map(|k| s[k].re).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Rebuild `sum_k f(lambda_k) u_k u_k^H` from an eigendecomposition.
pub fn from_eigh(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for (k, &lam) in vals.iter().enumerate() {
        let w = Complex64::new(f(lam), 0.0);
        for i in 0..n {
            scaled[(i, k)] *= w;
        }
    }
    let out = &scaled * vecs.adjoint();
    hermitize(&out)
}

/// Projection onto the positive semidefinite cone. Returns the projection and
/// the smallest eigenvalue of the input.
pub fn psd_project(mat: &CMat) -> Result<(CMat, f64)> {
    let (vals, vecs) = eigh(mat)?;
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if min >= 0.0 {
        return Ok((mat.clone(), min));
    }
    Ok((from_eigh(&vals, &vecs, |l| l.max(0.0)), min))
}

/// Relative threshold below which eigenvalues count as numerical zeros of an
/// exactly singular matrix. Square roots amplify eigensolver noise on zero
/// eigenvalues (sqrt(1e-16) = 1e-8 per eigenvalue), so they must be clipped
/// before `sum sqrt(lambda)`-style functions.
pub const ZERO_EIG_REL: f64 = 1e-13;

/// Principal square root of a PSD matrix. Eigenvalues in `[-neg_floor, 0)` are
/// clipped to zero; anything below `-neg_floor` is rejected as unphysical.
pub fn sqrt_psd(mat: &CMat, neg_floor: f64) -> Result<CMat> {
    let (vals, vecs) = eigh(mat)?;
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -neg_floor {
        return Err(Error::UnphysicalState {
            min_eigenvalue: min,
        });
    }
    let floor = ZERO_EIG_REL * vals.iter().copied().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(from_eigh(
        &vals,
        &vecs,
        |l| if l <= floor { 0.0 } else { l.sqrt() },
    ))
}

/// Uhlmann fidelity `Tr sqrt(sqrt(a) b sqrt(a))` on raw Hermitian matrices,
/// clamped to [0, 1]. `neg_floor` bounds how negative input eigenvalues may
/// be before the input counts as unphysical.
pub fn uhlmann_fidelity(a: &CMat, b: &CMat, neg_floor: f64) -> Result<f64> {
    let sqrt_a = sqrt_psd(a, neg_floor)?;
    let inner = &sqrt_a * b * &sqrt_a;
    let inner = hermitize(&inner);
    let (vals, _) = eigh(&inner)?;
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -neg_floor {
        return Err(Error::UnphysicalState {
            min_eigenvalue: min,
        });
    }
    // Numerical zeros must not leak through the square root.
    let floor = ZERO_EIG_REL * vals.iter().copied().fold(0.0f64, |a, v| a.max(v.abs()));
    let f: f64 = vals
        .iter()
        .map(|l| if *l <= floor { 0.0 } else { l.sqrt() })
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Supergradient of `S -> Tr sqrt(sqrt(T) S sqrt(T))` at `S`, namely
/// `0.5 sqrt(T) X^{-1/2} sqrt(T)` with `X = sqrt(T) S sqrt(T)` and the
/// inverse square root taken on the numerical support of `X`.
pub fn fidelity_gradient(target: &CMat, s: &CMat, neg_floor: f64) -> Result<CMat> {
    let sqrt_t = sqrt_psd(target, neg_floor)?;
    let x = hermitize(&(&sqrt_t * s * &sqrt_t));
    let (vals, vecs) = eigh(&x)?;
    let floor = ZERO_EIG_REL * vals.iter().copied().fold(0.0f64, |a, v| a.max(v.abs()));
    let inv_sqrt = from_eigh(&vals, &vecs, |l| {
        if l <= floor {
            0.0
        } else {
            0.5 / l.sqrt()
        }
    });
    Ok(hermitize(&(&sqrt_t * &inv_sqrt * &sqrt_t)))
}

/// `(A + A^H) / 2`, forcing exact Hermitian symmetry.
pub fn hermitize(mat: &CMat) -> CMat {
    let n = mat.nrows();
    Mat::from_fn(n, n, |i, j| 0.5 * (mat[(i, j)] + mat[(j, i)].conj()))
}

pub fn max_asymmetry(mat: &CMat) -> f64 {
    let n = mat.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(mat: &CMat) -> Complex64 {
    (0..mat.nrows()).map(|i| mat[(i, i)]).sum()
}

/// Real Hilbert-Schmidt inner product `Re Tr(A^H B)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> f64 {
    let (n, m) = (a.nrows(), a.ncols());
    let mut acc = 0.0;
    for j in 0..m {
        for i in 0..n {
            acc += (a[(i, j)].conj() * b[(i, j)]).re;
        }
    }
    acc
}

pub fn frob_norm_sqr(mat: &CMat) -> f64 {
    hs_inner(mat, mat)
}

/// Kronecker product with row-major composite indexing:
/// entry `((i1*nb + i2), (j1*nb + j2)) = a[(i1, j1)] * b[(i2, j2)]`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (na, nb) = (a.nrows(), b.nrows());
    let (ma, mb) = (a.ncols(), b.ncols());
    Mat::from_fn(na * nb, ma * mb, |i, j| {
        a[(i / nb, j / mb)] * b[(i % nb, j % mb)]
    })
}

/// Kronecker product of column vectors (length `na * nb`, index `i1*nb + i2`).
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigh_reconstructs_hermitian_matrix() {
        let a = Mat::from_fn(4, 4, |i, j| {
            if i == j {
                c(i as f64 + 1.0, 0.0)
            } else if i < j {
                c(0.1 * (i + j) as f64, 0.05 * (j - i) as f64)
            } else {
                c(0.1 * (i + j) as f64, -0.05 * (i - j) as f64)
            }
        });
        let (vals, vecs) = eigh(&a).unwrap();
        let rec = from_eigh(&vals, &vecs, |l| l);
        for i in 0..4 {
            for j in 0..4 {
                assert!((rec[(i, j)] - a[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn psd_project_clips_negative_part() {
        let a = Mat::from_fn(2, 2, |i, j| if i == j { c(if i == 0 { 1.0 } else { -0.5 }, 0.0) } else { c(0.0, 0.0) });
        let (p, min) = psd_project(&a).unwrap();
        assert!((min + 0.5).abs() < 1e-14);
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(p[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn sqrt_rejects_clearly_negative_eigenvalues() {
        let a = Mat::from_fn(2, 2, |i, j| if i == j { c(if i == 0 { 1.0 } else { -1e-6 }, 0.0) } else { c(0.0, 0.0) });
        assert!(matches!(
            sqrt_psd(&a, 1e-8),
            Err(Error::UnphysicalState { .. })
        ));
    }

    // Flattening convention sanity: kron is associative on 2x2 blocks.
    #[test]
    fn kron_associative_on_dim2() {
        let mk = |s: f64| Mat::from_fn(2, 2, |i, j| c(s + (i * 2 + j) as f64, s * 0.1));
        let (a, b, d) = (mk(1.0), mk(2.0), mk(3.0));
        let left = kron(&kron(&a, &b), &d);
        let right = kron(&a, &kron(&b, &d));
        for i in 0..8 {
            for j in 0..8 {
                assert!((left[(i, j)] - right[(i, j)]).norm() < 1e-13);
            }
        }
    }
}
