//! Exact Gaussian-rational scalars, sparse structural matrices and
//! fraction-free linear algebra helpers.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use num_rational::Ratio;
use num_traits::{Num, ToPrimitive, Zero};

pub type Rational = Ratio<i64>;
/// Gaussian rational `a + b i` with `a, b` rational.
pub type Gq = Complex<Rational>;
pub type QMat = DMatrix<Gq>;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn gq(re: i64, im: i64) -> Gq {
    Complex::new(q(re), q(im))
}

/// `i^k` for any integer exponent.
pub fn i_pow(k: i64) -> Gq {
    match k.rem_euclid(4) {
        0 => gq(1, 0),
        1 => gq(0, 1),
        2 => gq(-1, 0),
        _ => gq(0, -1),
    }
}

pub fn rat_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn to_c64(x: &Gq) -> Complex64 {
    Complex64::new(rat_to_f64(&x.re), rat_to_f64(&x.im))
}

pub fn to_cmat(m: &QMat) -> DMatrix<Complex64> {
    m.map(|x| to_c64(&x))
}

/// Matrix with at most a handful of nonzero entries; the natural shape of the
/// structural Lie algebra basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMat {
    pub dim: usize,
    pub entries: Vec<(usize, usize, Gq)>,
}

impl SparseMat {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, r: usize, c: usize, v: Gq) {
        if v.is_zero() {
            return;
        }
        if let Some(e) = self.entries.iter_mut().find(|e| e.0 == r && e.1 == c) {
            e.2 = e.2 + v;
        } else {
            self.entries.push((r, c, v));
        }
        self.entries.retain(|e| !e.2.is_zero());
    }

    pub fn get(&self, r: usize, c: usize) -> Gq {
        self.entries
            .iter()
            .find(|e| e.0 == r && e.1 == c)
            .map(|e| e.2)
            .unwrap_or_else(Gq::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, s: Gq) -> Self {
        let mut out = Self::new(self.dim);
        for &(r, c, v) in &self.entries {
            out.push(r, c, v * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for &(r, c, v) in &other.entries {
            out.push(r, c, v);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::new(self.dim);
        for &(r1, c1, v1) in &self.entries {
            for &(r2, c2, v2) in &other.entries {
                if c1 == r2 {
                    out.push(r1, c2, v1 * v2);
                }
            }
        }
        out
    }

    /// `[self, other] = self*other - other*self`.
    pub fn bracket(&self, other: &Self) -> Self {
        let ab = self.mul(other);
        let ba = other.mul(self);
        ab.add(&ba.scale(gq(-1, 0)))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::new(self.dim);
        for &(r, c, v) in &self.entries {
            out.push(c, r, v.conj());
        }
        out
    }

    pub fn to_dense(&self) -> QMat {
        let mut m = QMat::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = m[(r, c)] + v;
        }
        m
    }

    pub fn to_cmat(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += to_c64(&v);
        }
        m
    }
}

/// In-place reduced row echelon form; returns pivot columns.
pub fn rref<T: Num + Clone>(rows: &mut [Vec<T>]) -> Vec<usize> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = T::one() / rows[rank][col].clone();
        for x in rows[rank].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..nrows {
            if i != rank && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in 0..ncols {
                    let sub = f.clone() * rows[rank][j].clone();
                    rows[i][j] = rows[i][j].clone() - sub;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    pivots
}

pub fn rank<T: Num + Clone>(vectors: &[Vec<T>]) -> usize {
    let mut rows = vectors.to_vec();
    rref(&mut rows).len()
}

/// Basis of `{x : rows * x = 0}`.
pub fn nullspace<T: Num + Clone>(rows: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![T::zero(); ncols];
        x[free] = T::one();
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = T::zero() - m[i][free].clone();
        }
        out.push(x);
    }
    out
}

/// Coefficients `c` with `sum c_i basis_i = v`, or `None` when `v` is outside the span
/// or the basis is dependent.
pub fn solve_in_span<T: Num + Clone>(basis: &[Vec<T>], v: &[T]) -> Option<Vec<T>> {
    let k = basis.len();
    let n = v.len();
    // Augmented system: n equations, k unknowns.
    let mut rows: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut row: Vec<T> = basis.iter().map(|b| b[i].clone()).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    let pivots = rref(&mut rows);
    if pivots.len() != k || pivots.contains(&k) {
        return None;
    }
    Some((0..k).map(|i| rows[i][k].clone()).collect())
}
