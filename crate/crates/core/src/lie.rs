//! The graded Lie algebra `g` of `Q`-antisymmetric endomorphisms, its real
//! forms, involutions and Killing form.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{gq, to_c64, to_cmat, Gq, QMat, Rational, SparseMat};
use crate::hodge::HodgeFrame;
use crate::numeric::{frob, real_span_dim, CMat};

/// Relative residual gate for floating-point membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    /// `E_rr - E_ss` for the `pair`-th conjugate index pair `(r, s)`.
    Cartan { pair: usize },
    Root,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisElement {
    pub mat: SparseMat,
    /// Hodge degree `k`: the element lies in `g^{k,-k}`.
    pub degree: i32,
    /// Entry used to read off coordinates.
    pub lead: (usize, usize),
    pub kind: ElementKind,
    /// Eigenvalues of `ad(h_p)` on this element.
    pub weight: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct GradedLieAlgebra {
    frame: HodgeFrame,
    basis: Vec<BasisElement>,
    pairs: Vec<(usize, usize)>,
    owner: Vec<Option<(usize, Gq)>>,
    structure: Vec<Vec<(usize, Gq)>>,
    closure_failures: usize,
    killing: QMat,
    killing_f64: DMatrix<Complex64>,
    conj_f64: CMat,
    herm_f64: CMat,
    herm_inv_f64: CMat,
}

fn degree_of(frame: &HodgeFrame, r: usize, c: usize) -> i32 {
    let nums = frame.numbers();
    nums.block_of(c) as i32 - nums.block_of(r) as i32
}

/// Solves `X^T Q + Q X = 0` entry orbit by entry orbit.
pub fn lie_algebra_basis(frame: &HodgeFrame) -> GradedLieAlgebra {
    GradedLieAlgebra::new(frame)
}

impl GradedLieAlgebra {
    pub fn new(frame: &HodgeFrame) -> Self {
        let m = frame.dim();
        let q = frame.q();
        let sigma: Vec<usize> = (0..m).map(|i| frame.conj_pair(i).0).collect();
        let s: Vec<Gq> = (0..m).map(|i| q[(i, sigma[i])]).collect();

        let mut basis = Vec::new();
        let mut pairs = Vec::new();
        for r in 0..m {
            if r < sigma[r] {
                let mut mat = SparseMat::new(m);
                mat.push(r, r, Gq::one());
                mat.push(sigma[r], sigma[r], gq(-1, 0));
                pairs.push((r, sigma[r]));
                basis.push(BasisElement {
                    mat,
                    degree: 0,
                    lead: (r, r),
                    kind: ElementKind::Cartan {
                        pair: pairs.len() - 1,
                    },
                    weight: Vec::new(),
                });
            }
        }
        // Entry (r,c) is tied to (s(c), s(r)) by s_{s(r)} X_rc + s_{s(c)} X_{s(c)s(r)} = 0.
        let mut roots = Vec::new();
        for r in 0..m {
            for c in 0..m {
                if r == c {
                    continue;
                }
                let partner = (sigma[c], sigma[r]);
                let mut mat = SparseMat::new(m);
                if partner == (r, c) {
                    let coef = s[sigma[r]] + s[sigma[c]];
                    if !coef.is_zero() {
                        continue;
                    }
                    mat.push(r, c, Gq::one());
                } else {
                    if partner < (r, c) {
                        continue;
                    }
                    mat.push(r, c, Gq::one());
                    mat.push(partner.0, partner.1, -(s[sigma[r]] / s[sigma[c]]));
                }
                roots.push(BasisElement {
                    mat,
                    degree: degree_of(frame, r, c),
                    lead: (r, c),
                    kind: ElementKind::Root,
                    weight: Vec::new(),
                });
            }
        }
        roots.sort_by_key(|b| (b.degree, b.lead));
        basis.extend(roots);

        let dim = basis.len();
        let mut owner = vec![None; m * m];
        for (j, b) in basis.iter().enumerate() {
            for &(r, c, v) in &b.mat.entries {
                if owner[r * m + c].is_none() {
                    owner[r * m + c] = Some((j, v));
                }
            }
        }

        let mut alg = Self {
            frame: frame.clone(),
            basis,
            pairs,
            owner,
            structure: Vec::new(),
            closure_failures: 0,
            killing: QMat::zeros(dim, dim),
            killing_f64: DMatrix::zeros(dim, dim),
            conj_f64: to_cmat(&frame.conj_matrix()),
            herm_f64: CMat::zeros(m, m),
            herm_inv_f64: CMat::zeros(m, m),
        };
        let herm = to_cmat(&frame.hermitian_form());
        alg.herm_inv_f64 = herm.clone().try_inverse().unwrap_or_else(|| CMat::identity(m, m));
        alg.herm_f64 = herm;

        // Structure constants and weights.
        let mut structure = Vec::with_capacity(dim * dim);
        let mut failures = 0;
        for i in 0..dim {
            for j in 0..dim {
                let br = alg.basis[i].mat.bracket(&alg.basis[j].mat);
                match alg.coords_exact(&br) {
                    Some(c) => structure.push(c),
                    None => {
                        failures += 1;
                        structure.push(Vec::new());
                    }
                }
            }
        }
        alg.structure = structure;
        alg.closure_failures = failures;
        let rank = alg.pairs.len();
        for j in 0..dim {
            let mut w = Vec::with_capacity(rank);
            for p in 0..rank {
                let lead = alg.basis[j].lead;
                let br = alg.basis[p].mat.bracket(&alg.basis[j].mat);
                let lam = br.get(lead.0, lead.1) / alg.basis[j].mat.get(lead.0, lead.1);
                w.push(if lam.im.is_zero() && lam.re.is_integer() { lam.re.to_integer() } else { i64::MIN });
            }
            alg.basis[j].weight = w;
        }
        alg.compute_killing();
        alg
    }

    fn compute_killing(&mut self) {
        let dim = self.dim();
        let mut k = QMat::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let opposite = self.basis[i]
                    .weight
                    .iter()
                    .zip(&self.basis[j].weight)
                    .all(|(a, b)| a + b == 0);
                if !opposite {
                    continue;
                }
                let mut acc = Gq::zero();
                for kk in 0..dim {
                    for &(l, c1) in &self.structure[i * dim + kk] {
                        if let Some(&(_, c2)) =
                            self.structure[j * dim + l].iter().find(|e| e.0 == kk)
                        {
                            acc = acc + c1 * c2;
                        }
                    }
                }
                k[(i, j)] = acc;
                k[(j, i)] = acc;
            }
        }
        self.killing_f64 = to_cmat(&k);
        self.killing = k;
    }

    pub fn frame(&self) -> &HodgeFrame {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `dim h`.
    pub fn rank(&self) -> usize {
        self.pairs.len()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn element(&self, i: usize) -> CMat {
        self.basis[i].mat.to_cmat()
    }

    pub fn cartan(&self) -> Vec<CMat> {
        (0..self.rank()).map(|p| self.element(p)).collect()
    }

    pub fn cartan_pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Basis elements whose bracket failed to expand exactly in the basis.
    pub fn closure_failures(&self) -> usize {
        self.closure_failures
    }

    /// `[b_i, b_j]` as `(index, coefficient)` pairs.
    pub fn structure_constants(&self, i: usize, j: usize) -> &[(usize, Gq)] {
        &self.structure[i * self.dim() + j]
    }

    pub fn killing_matrix(&self) -> &QMat {
        &self.killing
    }

    /// Number of basis elements per Hodge degree, from `-n` to `n`.
    pub fn grading_dims(&self) -> Vec<(i32, usize)> {
        let n = self.frame.weight() as i32;
        (-n..=n)
            .map(|k| (k, self.basis.iter().filter(|b| b.degree == k).count()))
            .collect()
    }

    /// Coordinates of the grading element `G - (n/2) I` against the Cartan basis.
    pub fn grading_coords(&self) -> Vec<Rational> {
        let nums = self.frame.numbers();
        let half = Rational::new(nums.weight() as i64, 2);
        self.pairs
            .iter()
            .map(|&(r, _)| half - Rational::from_integer(nums.block_of(r) as i64))
            .collect()
    }

    /// Exact coordinates, or `None` when the matrix is not in `g`.
    pub fn coords_exact(&self, x: &SparseMat) -> Option<Vec<(usize, Gq)>> {
        let m = self.frame.dim();
        let mut out: Vec<(usize, Gq)> = Vec::new();
        for &(r, c, v) in &x.entries {
            let (j, coef) = self.owner[r * m + c]?;
            if self.basis[j].lead != (r, c) {
                continue;
            }
            out.push((j, v / coef));
        }
        let mut rebuilt = SparseMat::new(m);
        for &(j, v) in &out {
            rebuilt = rebuilt.add(&self.basis[j].mat.scale(v));
        }
        if rebuilt.add(&x.scale(gq(-1, 0))).is_zero() {
            out.sort_by_key(|e| e.0);
            Some(out)
        } else {
            None
        }
    }

    /// Floating-point coordinates read off the lead entries.
    pub fn coords(&self, x: &CMat) -> Vec<Complex64> {
        self.basis
            .iter()
            .map(|b| x[b.lead] / to_c64(&b.mat.get(b.lead.0, b.lead.1)))
            .collect()
    }

    pub fn from_coords(&self, coords: &[Complex64]) -> CMat {
        let m = self.frame.dim();
        let mut x = CMat::zeros(m, m);
        for (b, &c) in self.basis.iter().zip(coords) {
            for &(r, cc, v) in &b.mat.entries {
                x[(r, cc)] += to_c64(&v) * c;
            }
        }
        x
    }

    /// `|X^T Q + Q X| / max(1, |X|)`.
    pub fn membership_residual(&self, x: &CMat) -> f64 {
        let q = self.frame.q_f64();
        frob(&(x.transpose() * &q + &q * x)) / frob(x).max(1.0)
    }

    fn require_member(&self, x: &CMat) -> Result<()> {
        let res = self.membership_residual(x);
        if res > MEMBERSHIP_TOL {
            Err(Error::NotInAlgebra(res))
        } else {
            Ok(())
        }
    }

    /// Hodge components `(k, X^{k,-k})` for `k = -n..=n`.
    pub fn grade(&self, x: &CMat) -> Result<Vec<(i32, CMat)>> {
        self.require_member(x)?;
        Ok(self.grade_unchecked(x))
    }

    fn grade_unchecked(&self, x: &CMat) -> Vec<(i32, CMat)> {
        let n = self.frame.weight() as i32;
        let m = self.frame.dim();
        let mut comps: Vec<(i32, CMat)> = (-n..=n).map(|k| (k, CMat::zeros(m, m))).collect();
        for r in 0..m {
            for c in 0..m {
                let k = degree_of(&self.frame, r, c);
                comps[(k + n) as usize].1[(r, c)] = x[(r, c)];
            }
        }
        comps
    }

    /// `theta(X) = (-1)^k X` on `g^{k,-k}`.
    pub fn weil_involution(&self, x: &CMat) -> Result<CMat> {
        self.require_member(x)?;
        let m = self.frame.dim();
        Ok(CMat::from_fn(m, m, |r, c| {
            if degree_of(&self.frame, r, c) % 2 == 0 {
                x[(r, c)]
            } else {
                -x[(r, c)]
            }
        }))
    }

    /// Conjugation with respect to the real form `g0`.
    pub fn conj_real(&self, x: &CMat) -> Result<CMat> {
        self.require_member(x)?;
        Ok(self.conj_real_unchecked(x))
    }

    pub(crate) fn conj_real_unchecked(&self, x: &CMat) -> CMat {
        // conj(v) = P v̄ with P an involutive signed permutation.
        let p = &self.conj_f64;
        let pinv = p.adjoint();
        p * x.map(|z| z.conj()) * pinv
    }

    /// Conjugation with respect to the compact form: minus the adjoint for the Hermitian form.
    pub fn conj_compact(&self, x: &CMat) -> Result<CMat> {
        self.require_member(x)?;
        Ok(self.conj_compact_unchecked(x))
    }

    pub(crate) fn conj_compact_unchecked(&self, x: &CMat) -> CMat {
        let hbar = self.herm_f64.map(|z| z.conj());
        let hinv_bar = self.herm_inv_f64.map(|z| z.conj());
        -(hinv_bar * x.adjoint() * hbar)
    }

    /// `B(X, Y) = tr(ad X ad Y)`.
    pub fn killing_form(&self, x: &CMat, y: &CMat) -> Result<Complex64> {
        self.require_member(x)?;
        self.require_member(y)?;
        let cx = nalgebra::DVector::from_vec(self.coords(x));
        let cy = nalgebra::DVector::from_vec(self.coords(y));
        Ok((cx.transpose() * &self.killing_f64 * cy)[(0, 0)])
    }

    pub fn killing_exact(&self, x: &[(usize, Gq)], y: &[(usize, Gq)]) -> Gq {
        let mut acc = Gq::zero();
        for &(i, a) in x {
            for &(j, b) in y {
                acc = acc + a * self.killing[(i, j)] * b;
            }
        }
        acc
    }

    /// Components of degree `<= -2` vanish.
    pub fn is_horizontal(&self, x: &CMat) -> Result<bool> {
        self.require_member(x)?;
        let scale = frob(x).max(1.0);
        Ok(self
            .grade_unchecked(x)
            .iter()
            .filter(|(k, _)| *k <= -2)
            .all(|(_, comp)| frob(comp) <= 1e-12 * scale))
    }

    /// Index of the basis element proportional to `b_j^*`.
    pub fn adjoint_partner(&self, j: usize) -> usize {
        let (r, c) = self.basis[j].lead;
        let m = self.frame.dim();
        match self.owner[c * m + r] {
            Some((k, _)) => k,
            None => j,
        }
    }

    /// Real basis of the compact form `g_c`: `i h_p`, `b - b^*`, `i (b + b^*)`.
    pub fn compact_form_basis(&self) -> Vec<CMat> {
        let i = Complex64::new(0.0, 1.0);
        let mut out: Vec<CMat> = self.cartan().into_iter().map(|h| h * i).collect();
        for j in self.rank()..self.dim() {
            if self.adjoint_partner(j) < j {
                continue;
            }
            let b = self.element(j);
            let bs = b.adjoint();
            out.push(&b - &bs);
            out.push((&b + &bs) * i);
        }
        out
    }

    /// Gram matrix of the Killing form on a real basis (real part).
    pub fn killing_gram(&self, basis: &[CMat]) -> DMatrix<f64> {
        let coords: Vec<_> = basis
            .iter()
            .map(|x| nalgebra::DVector::from_vec(self.coords(x)))
            .collect();
        let k = basis.len();
        DMatrix::from_fn(k, k, |a, b| {
            (coords[a].transpose() * &self.killing_f64 * &coords[b])[(0, 0)].re
        })
    }

    /// Real dimensions of `k0` and `p0` spanned by `X + tau0 X`, `i(X - tau0 X)`.
    pub fn real_form_dims(&self) -> (usize, usize) {
        let i = Complex64::new(0.0, 1.0);
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for j in 0..self.dim() {
            let b = self.element(j);
            let t = self.conj_real_unchecked(&b);
            let target = if self.basis[j].degree % 2 == 0 { &mut even } else { &mut odd };
            target.push(&b + &t);
            target.push((&b - &t) * i);
        }
        (real_span_dim(&even, 1e-10), real_span_dim(&odd, 1e-10))
    }

    /// Describes a weight vector for error messages.
    pub fn describe_weight(weight: &[i64]) -> alloc::string::String {
        format!("{weight:?}")
    }
}
