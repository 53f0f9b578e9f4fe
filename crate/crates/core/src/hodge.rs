//! Reference polarized Hodge structure: Hodge numbers, the adapted basis, the
//! polarization `Q`, the Weil operator and the real structure.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::big_cell::FlagPoint;
use crate::error::{Error, Result};
use crate::exact::{i_pow, to_c64, to_cmat, Gq, QMat};
use crate::numeric::{frob, hermitian_min_eig, CMat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HodgeNumbers {
    weight: usize,
    h: Vec<usize>,
    offsets: Vec<usize>,
}

impl HodgeNumbers {
    /// `h[a]` is `h^{n-a,a}`, listed from `h^{n,0}` to `h^{0,n}`.
    pub fn new(weight: usize, h: Vec<usize>) -> Result<Self> {
        if h.len() != weight + 1 {
            return Err(Error::HodgeLength {
                weight,
                expected: weight + 1,
                found: h.len(),
            });
        }
        for i in 0..=weight {
            let j = weight - i;
            if h[i] != h[j] {
                return Err(Error::AsymmetricHodgeNumbers {
                    i,
                    hi: h[i],
                    j,
                    hj: h[j],
                });
            }
        }
        let mut offsets = Vec::with_capacity(h.len() + 1);
        let mut acc = 0;
        for &x in &h {
            offsets.push(acc);
            acc += x;
        }
        offsets.push(acc);
        if acc == 0 {
            return Err(Error::EmptyFrame);
        }
        Ok(Self { weight, h, offsets })
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn h(&self) -> &[usize] {
        &self.h
    }

    /// Total dimension `m = f^0`.
    pub fn dim(&self) -> usize {
        self.offsets[self.h.len()]
    }

    /// `f^k = dim F^k`; zero for `k > n`.
    pub fn f(&self, k: usize) -> usize {
        if k > self.weight {
            0
        } else {
            self.offsets[self.weight - k + 1]
        }
    }

    pub fn f_list(&self) -> Vec<usize> {
        (0..=self.weight + 1).map(|k| self.f(k)).collect()
    }

    pub fn num_blocks(&self) -> usize {
        self.h.len()
    }

    /// Index range of block `a` (the `H^{n-a,a}` basis vectors).
    pub fn block(&self, a: usize) -> Range<usize> {
        self.offsets[a]..self.offsets[a + 1]
    }

    /// End index of blocks `0..=a`, i.e. `f^{n-a}`.
    pub fn leading(&self, a: usize) -> usize {
        self.offsets[a + 1]
    }

    pub fn block_of(&self, index: usize) -> usize {
        (0..self.h.len())
            .find(|&a| index < self.offsets[a + 1])
            .unwrap_or(self.h.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HodgeFrame {
    numbers: HodgeNumbers,
    q: QMat,
    weil: QMat,
    conj: Vec<(usize, Gq)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HodgeRiemannVerdict {
    InD,
    InDualOnly,
    Neither,
}

/// Builds the normalized reference frame.
///
/// Block `a` is paired with block `n-a` index by index; inside the middle block
/// of an even weight the pairing reverses the order. `Q` pairs `e_r` with
/// `e_{s(r)}` with value `i^{2a-n}`, which makes `Q(C u, conj v)` the identity.
pub fn build_reference_frame(numbers: &HodgeNumbers) -> HodgeFrame {
    let n = numbers.weight();
    let m = numbers.dim();
    let mut conj = vec![(0usize, Gq::one()); m];
    for a in 0..numbers.num_blocks() {
        let b = n - a;
        let ra = numbers.block(a);
        let rb = numbers.block(b);
        for j in 0..ra.len() {
            let partner = if a == b {
                ra.start + ra.len() - 1 - j
            } else {
                rb.start + j
            };
            conj[ra.start + j] = (partner, Gq::one());
        }
    }
    let mut q = QMat::zeros(m, m);
    let mut weil = QMat::zeros(m, m);
    for r in 0..m {
        let a = numbers.block_of(r) as i64;
        q[(r, conj[r].0)] = i_pow(2 * a - n as i64);
        weil[(r, r)] = i_pow(n as i64 - 2 * a);
    }
    HodgeFrame {
        numbers: numbers.clone(),
        q,
        weil,
        conj,
    }
}

impl HodgeFrame {
    pub fn numbers(&self) -> &HodgeNumbers {
        &self.numbers
    }

    pub fn dim(&self) -> usize {
        self.numbers.dim()
    }

    pub fn weight(&self) -> usize {
        self.numbers.weight()
    }

    pub fn q(&self) -> &QMat {
        &self.q
    }

    pub fn weil(&self) -> &QMat {
        &self.weil
    }

    pub fn q_f64(&self) -> CMat {
        to_cmat(&self.q)
    }

    /// `(sigma(i), scalar)` with `conj(e_i) = scalar * e_{sigma(i)}`.
    pub fn conj_pair(&self, i: usize) -> (usize, Gq) {
        self.conj[i]
    }

    /// Matrix `P` with `conj(v) = P * v̄`.
    pub fn conj_matrix(&self) -> QMat {
        let m = self.dim();
        let mut p = QMat::zeros(m, m);
        for (i, &(s, u)) in self.conj.iter().enumerate() {
            p[(s, i)] = u;
        }
        p
    }

    pub fn conj_vec(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(v.len());
        for (i, &(s, u)) in self.conj.iter().enumerate() {
            out[s] += to_c64(&u) * v[i].conj();
        }
        out
    }

    /// Applies `conj` column by column.
    pub fn conj_columns(&self, a: &CMat) -> CMat {
        let p = to_cmat(&self.conj_matrix());
        p * a.map(|z| z.conj())
    }

    /// Matrix `H` with `(u, v) = Q(Cu, conj v) = u^T H v̄`.
    pub fn hermitian_form(&self) -> QMat {
        self.weil.transpose() * &self.q * self.conj_matrix()
    }

    pub fn base_flag(&self) -> FlagPoint {
        let m = self.dim();
        FlagPoint::new(&self.numbers, CMat::identity(m, m)).expect("identity is a valid flag")
    }

    /// Nonzero pattern of `Q` at the block level.
    pub fn block_sparsity(&self) -> Vec<(usize, usize)> {
        let nb = self.numbers.num_blocks();
        let mut out = Vec::new();
        for a in 0..nb {
            for b in 0..nb {
                let ra = self.numbers.block(a);
                let rb = self.numbers.block(b);
                if ra.clone().any(|i| rb.clone().any(|j| !self.q[(i, j)].is_zero())) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

fn complex_nullspace(a: &CMat, rel_tol: f64) -> Vec<DVector<Complex64>> {
    let ncols = a.ncols();
    let nrows = a.nrows().max(ncols);
    let mut padded = CMat::zeros(nrows, ncols);
    padded.view_mut((0, 0), (a.nrows(), ncols)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = if smax == 0.0 { 0.5 } else { rel_tol * smax };
    (0..ncols)
        .filter(|&i| svd.singular_values[i] <= cutoff)
        .map(|i| v_t.row(i).adjoint())
        .collect()
}

fn orthonormal_columns(a: &CMat) -> CMat {
    a.clone().qr().q()
}

/// Classifies a flag as a point of `D`, of the compact dual only, or neither.
pub fn check_hodge_riemann(frame: &HodgeFrame, flag: &FlagPoint) -> Result<HodgeRiemannVerdict> {
    let nums = frame.numbers();
    let m = nums.dim();
    let n = nums.weight();
    let a = flag.basis();
    if a.nrows() != m || a.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: a.nrows(),
        });
    }
    let q = frame.q_f64();
    let scale = frob(a) * frob(a);
    for k in 1..=n {
        let fk = nums.f(k);
        let fj = nums.f(n + 1 - k);
        if fk == 0 || fj == 0 {
            continue;
        }
        let u = a.columns(0, fk);
        let w = a.columns(0, fj);
        let block = u.transpose() * &q * w;
        if block.iter().map(|z| z.norm()).fold(0.0, f64::max) > 1e-10 * scale {
            return Ok(HodgeRiemannVerdict::Neither);
        }
    }
    // HR2' on H^{p,n-p} = F^p ∩ conj(F^{n-p}).
    let p_mat = to_cmat(&frame.conj_matrix());
    for p in 0..=n {
        let hp = nums.h()[n - p];
        if hp == 0 {
            continue;
        }
        let fp = nums.f(p);
        let fq = nums.f(n - p);
        let u = orthonormal_columns(&a.columns(0, fp).into_owned());
        let wbar = &p_mat * a.columns(0, fq).map(|z| z.conj());
        let w = orthonormal_columns(&wbar);
        let mut stacked = CMat::zeros(m, fp + fq);
        stacked.view_mut((0, 0), (m, fp)).copy_from(&u);
        stacked.view_mut((0, fp), (m, fq)).copy_from(&(-w));
        let null = complex_nullspace(&stacked, 1e-9);
        if null.len() != hp {
            return Ok(HodgeRiemannVerdict::InDualOnly);
        }
        let mut basis = CMat::zeros(m, hp);
        for (j, x) in null.iter().enumerate() {
            basis.set_column(j, &(&u * x.rows(0, fp)));
        }
        let phase = to_c64(&i_pow(2 * p as i64 - n as i64));
        let form = basis.transpose() * &q * &p_mat * basis.map(|z| z.conj()) * phase;
        let form = DMatrix::from_fn(hp, hp, |i, j| form[(i, j)]);
        if hermitian_min_eig(&form) <= 1e-10 * frob(&form).max(1e-300) {
            return Ok(HodgeRiemannVerdict::InDualOnly);
        }
    }
    Ok(HodgeRiemannVerdict::InD)
}
