//! Floating-point matrix helpers shared by the numerical modules.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn frob(m: &CMat) -> f64 {
    Float::sqrt(m.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest absolute column sum.
pub fn norm1(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Frobenius (Hodge-metric) inner product `tr(X^* Y)`.
pub fn inner(x: &CMat, y: &CMat) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let norm = norm1(a);
    if !norm.is_finite() || norm > 700.0 {
        return Err(Error::ExpRange(norm));
    }
    let mut s = 0u32;
    if norm > 0.25 {
        s = Float::ceil(Float::log2(norm / 0.25)) as u32;
    }
    let scaled = a.map(|z| z / Float::powi(2.0f64, s as i32));
    let mut sum = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..40 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
        if frob(&term) <= 1e-18 * frob(&sum) {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn hermitian_min_eig(m: &CMat) -> f64 {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn symmetric_max_eig(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Real coordinates `(re, im)` of all entries, column-major.
pub fn realify(m: &CMat) -> DVector<f64> {
    let mut v = DVector::zeros(2 * m.len());
    for (i, z) in m.iter().enumerate() {
        v[2 * i] = z.re;
        v[2 * i + 1] = z.im;
    }
    v
}

fn columns_matrix(cols: &[DVector<f64>], nrows: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(nrows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        a.set_column(j, col);
    }
    a
}

/// Rank of a real matrix from its singular values, relative cutoff.
pub fn real_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Dimension of the real span of a family of complex matrices.
pub fn real_span_dim(mats: &[CMat], rel_tol: f64) -> usize {
    let Some(first) = mats.first() else {
        return 0;
    };
    let cols: Vec<_> = mats.iter().map(realify).collect();
    real_rank(&columns_matrix(&cols, 2 * first.len()), rel_tol)
}

/// Orthonormal basis of the right null space of `a`.
pub fn real_nullspace(a: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let ncols = a.ncols();
    let nrows = a.nrows().max(ncols);
    let mut padded = DMatrix::zeros(nrows, ncols);
    padded.view_mut((0, 0), (a.nrows(), ncols)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = if smax == 0.0 { 0.5 } else { rel_tol * smax };
    (0..ncols)
        .filter(|&i| svd.singular_values[i] <= cutoff)
        .map(|i| v_t.row(i).transpose())
        .collect()
}

/// Least-squares solution of `a x = b` via SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let ncols = a.ncols();
    let nrows = a.nrows().max(ncols);
    let mut padded = DMatrix::zeros(nrows, ncols);
    padded.view_mut((0, 0), (a.nrows(), ncols)).copy_from(a);
    let mut rhs = DVector::zeros(nrows);
    rhs.rows_mut(0, b.len()).copy_from(b);
    let svd = padded.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(&rhs, 1e-13 * smax.max(1e-300))
        .unwrap_or_else(|_| DVector::zeros(ncols))
}
