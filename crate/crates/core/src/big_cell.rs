//! Big-cell coordinates: leading block minors, block LU and the nilpotent
//! exponential/logarithm on `n+`.

use alloc::vec::Vec;

use nalgebra::{ClosedAddAssign, ClosedMulAssign, DMatrix, Scalar};
use num_complex::Complex64;
use num_traits::{FromPrimitive, Num};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hodge::HodgeNumbers;
use crate::numeric::{frob, inner, CMat};

pub const MINOR_ZERO_TOL: f64 = 1e-10;
pub const MINOR_INDETERMINATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FlagPoint {
    basis: CMat,
}

impl FlagPoint {
    /// Wraps an adapted basis; the first `f^k` columns span `F^k`.
    pub fn new(numbers: &HodgeNumbers, basis: CMat) -> Result<Self> {
        let m = numbers.dim();
        if basis.nrows() != m || basis.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: basis.nrows().max(basis.ncols()),
            });
        }
        let sv = basis.clone().singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(smax > 0.0) || smin <= 1e-13 * smax {
            return Err(Error::RankDeficient);
        }
        Ok(Self { basis })
    }

    /// Flag `g . o` of the base point; `g` is invertible by construction so no
    /// rank check is made (a group element can be far too ill-conditioned for one).
    pub fn from_group_element(numbers: &HodgeNumbers, g: CMat) -> Result<Self> {
        let m = numbers.dim();
        if g.nrows() != m || g.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: g.nrows().max(g.ncols()),
            });
        }
        if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::RankDeficient);
        }
        Ok(Self { basis: g })
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    /// The flag `g . F`.
    pub fn act(&self, g: &CMat) -> Self {
        Self {
            basis: g * &self.basis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Member,
    NonMember { block: usize },
    Indeterminate { block: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub minors: Vec<Complex64>,
    /// Scale-free size of each minor: `|det A_s| / sqrt(det(A[:, :s]^* A[:, :s]))`.
    /// The last one is 1 since `F^0` is the whole space.
    pub ratios: Vec<f64>,
    pub status: Membership,
}

impl MembershipReport {
    pub fn is_member(&self) -> bool {
        self.status == Membership::Member
    }
}

/// Tests all `n+1` leading block minors.
pub fn membership_in_big_cell(numbers: &HodgeNumbers, flag: &FlagPoint) -> MembershipReport {
    let a = flag.basis();
    let m = numbers.dim();
    let mut minors = Vec::new();
    let mut ratios = Vec::new();
    let mut zero = None;
    let mut indeterminate = None;
    for blk in 0..numbers.num_blocks() {
        let s = numbers.leading(blk);
        if s == 0 {
            minors.push(Complex64::new(1.0, 0.0));
            ratios.push(1.0);
            continue;
        }
        let sub = a.view((0, 0), (s, s)).into_owned();
        let det = sub.lu().determinant();
        // |det| of the top block of an orthonormal basis of F^k: the product of
        // cosines between F^k and the leading coordinate subspace.
        let ratio = if s == m {
            1.0
        } else {
            let q = a.columns(0, s).into_owned().qr().q();
            q.view((0, 0), (s, s)).into_owned().lu().determinant().norm()
        };
        if ratio < MINOR_ZERO_TOL {
            zero.get_or_insert(blk);
        } else if ratio < MINOR_INDETERMINATE_TOL {
            indeterminate.get_or_insert(blk);
        }
        minors.push(det);
        ratios.push(ratio);
    }
    let status = match (zero, indeterminate) {
        (Some(block), _) => Membership::NonMember { block },
        (None, Some(block)) => Membership::Indeterminate { block },
        (None, None) => Membership::Member,
    };
    MembershipReport {
        minors,
        ratios,
        status,
    }
}

/// Independent transversality test: `F^k` is complementary to the span of the
/// last `m - f^k` coordinate vectors for every `k`.
pub fn rank_membership(numbers: &HodgeNumbers, flag: &FlagPoint) -> bool {
    let a = flag.basis();
    let m = numbers.dim();
    (0..numbers.num_blocks()).all(|blk| {
        let s = numbers.leading(blk);
        if s == 0 || s == m {
            return true;
        }
        let q = a.columns(0, s).into_owned().qr().q();
        let mut stacked = CMat::zeros(m, m);
        stacked.view_mut((0, 0), (m, s)).copy_from(&q);
        for j in s..m {
            stacked[(j, j)] = Complex64::new(1.0, 0.0);
        }
        let sv = stacked.singular_values();
        sv.iter().cloned().fold(f64::INFINITY, f64::min) > 1e-8
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellCoordinate {
    pub l: CMat,
    pub log_l: CMat,
}

/// Residual of the block upper part (diagonal blocks included when `strict`).
fn upper_residual(numbers: &HodgeNumbers, x: &CMat, strict: bool, unit: bool) -> f64 {
    let m = numbers.dim();
    let mut worst: f64 = 0.0;
    for r in 0..m {
        let br = numbers.block_of(r);
        for c in 0..m {
            let bc = numbers.block_of(c);
            if bc > br || (strict && bc == br) {
                let target = if unit && r == c { 1.0 } else { 0.0 };
                worst = worst.max((x[(r, c)] - Complex64::new(target, 0.0)).norm());
            }
        }
    }
    worst
}

fn clean_lower(numbers: &HodgeNumbers, x: &mut CMat, unit: bool) {
    let m = numbers.dim();
    for r in 0..m {
        let br = numbers.block_of(r);
        for c in 0..m {
            let bc = numbers.block_of(c);
            if bc >= br {
                x[(r, c)] = if unit && r == c {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
            }
        }
    }
}

/// Block LU: the unipotent factor `L` of `A = L U`.
pub fn cell_coordinate(numbers: &HodgeNumbers, flag: &FlagPoint) -> Result<CellCoordinate> {
    match membership_in_big_cell(numbers, flag).status {
        Membership::Member => {}
        Membership::NonMember { block } => return Err(Error::OutsideBigCell { block }),
        Membership::Indeterminate { block } => {
            let ratio = membership_in_big_cell(numbers, flag).ratios[block];
            return Err(Error::IndeterminateMembership { block, ratio });
        }
    }
    let a = flag.basis();
    let m = numbers.dim();
    let mut l = CMat::identity(m, m);
    for blk in 0..numbers.num_blocks() {
        let range = numbers.block(blk);
        if range.is_empty() {
            continue;
        }
        let s = numbers.leading(blk);
        let a_s = a.view((0, 0), (s, s)).transpose();
        let rhs = a.columns(0, s).transpose();
        let y = a_s.lu().solve(&rhs).ok_or(Error::Singular)?;
        // y = (A[:, :s] A_s^{-1})^T
        for c in range.clone() {
            for r in 0..m {
                l[(r, c)] = y[(c, r)];
            }
        }
    }
    clean_lower(numbers, &mut l, true);
    let log_l = log_unipotent(numbers, &l)?;
    Ok(CellCoordinate { l, log_l })
}

/// `sum_k x^k / k!` (`sign = 1`) or `sum_k (-1)^{k+1} x^k / k` (`sign = -1`),
/// truncated at `degree`.
fn finite_series<T>(x: &DMatrix<T>, degree: usize, log: bool) -> DMatrix<T>
where
    T: Scalar + Num + FromPrimitive + ClosedAddAssign + ClosedMulAssign,
{
    let m = x.nrows();
    let mut out = if log {
        DMatrix::from_element(m, m, T::zero())
    } else {
        DMatrix::identity(m, m)
    };
    let mut pow: DMatrix<T> = DMatrix::identity(m, m);
    let mut fact = T::one();
    for k in 1..=degree {
        pow = &pow * x;
        let kk = T::from_usize(k).expect("small integer");
        let coef = if log {
            let s = if k % 2 == 1 { T::one() } else { T::zero() - T::one() };
            s / kk
        } else {
            fact = fact * kk;
            T::one() / fact.clone()
        };
        out += pow.map(|v| v * coef.clone());
    }
    out
}

/// Exponential of a strictly block lower triangular matrix (any exact or float scalar).
pub fn exp_nilpotent_generic<T>(x: &DMatrix<T>, weight: usize) -> DMatrix<T>
where
    T: Scalar + Num + FromPrimitive + ClosedAddAssign + ClosedMulAssign,
{
    finite_series(x, weight, false)
}

/// Logarithm of a block unipotent matrix (any exact or float scalar).
pub fn log_unipotent_generic<T>(l: &DMatrix<T>, weight: usize) -> DMatrix<T>
where
    T: Scalar + Num + FromPrimitive + ClosedAddAssign + ClosedMulAssign,
{
    let m = l.nrows();
    let mut n = l.clone();
    for i in 0..m {
        n[(i, i)] = n[(i, i)].clone() - T::one();
    }
    finite_series(&n, weight, true)
}

pub fn exp_nilpotent(numbers: &HodgeNumbers, x: &CMat) -> Result<CellCoordinate> {
    let res = upper_residual(numbers, x, true, false);
    if res > 1e-12 * frob(x).max(1.0) {
        return Err(Error::NotNilpotent(res));
    }
    let mut x = x.clone();
    clean_lower(numbers, &mut x, false);
    let mut l = exp_nilpotent_generic(&x, numbers.weight());
    clean_lower(numbers, &mut l, true);
    Ok(CellCoordinate { l, log_l: x })
}

pub fn log_unipotent(numbers: &HodgeNumbers, l: &CMat) -> Result<CMat> {
    let res = upper_residual(numbers, l, true, true);
    if res > 1e-12 * frob(l).max(1.0) {
        return Err(Error::NotUnipotent(res));
    }
    let mut l = l.clone();
    clean_lower(numbers, &mut l, true);
    let mut x = log_unipotent_generic(&l, numbers.weight());
    clean_lower(numbers, &mut x, false);
    Ok(x)
}

/// Coefficients of the orthogonal projection of `log L` onto `span(basis)` in
/// the Hodge (Frobenius) metric.
pub fn project_cell(coord: &CellCoordinate, basis: &[CMat]) -> Result<Vec<Complex64>> {
    let k = basis.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let gram = DMatrix::from_fn(k, k, |i, j| inner(&basis[i], &basis[j]));
    let rhs = nalgebra::DVector::from_fn(k, |i, _| inner(&basis[i], &coord.log_l));
    let sol = gram.lu().solve(&rhs).ok_or(Error::Singular)?;
    Ok(sol.iter().cloned().collect())
}

/// Euclidean distance between two cell points (norm of the log difference).
pub fn cell_distance(a: &CellCoordinate, b: &CellCoordinate) -> f64 {
    frob(&(&a.log_l - &b.log_l))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagKind {
    /// `exp(N) U` with `N` in `n+` and `U` block upper.
    Unipotent,
    /// Gaussian entries.
    Gaussian,
    /// Row-permuted block upper matrix; often lands exactly on the boundary.
    Permuted,
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_block_upper<R: Rng + ?Sized>(numbers: &HodgeNumbers, rng: &mut R) -> CMat {
    let m = numbers.dim();
    let mut u = CMat::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            if numbers.block_of(c) >= numbers.block_of(r) {
                u[(r, c)] = gaussian(rng);
            }
        }
    }
    u
}

/// Random adapted basis of the requested kind. For `Unipotent`, `nilpotents`
/// spans the allowed directions (falls back to all strictly block lower matrices).
pub fn random_flag<R: Rng + ?Sized>(
    numbers: &HodgeNumbers,
    kind: FlagKind,
    nilpotents: &[CMat],
    rng: &mut R,
) -> Result<FlagPoint> {
    let m = numbers.dim();
    let basis = match kind {
        FlagKind::Unipotent => {
            let mut x = CMat::zeros(m, m);
            if nilpotents.is_empty() {
                for r in 0..m {
                    for c in 0..m {
                        if numbers.block_of(c) < numbers.block_of(r) {
                            x[(r, c)] = gaussian(rng);
                        }
                    }
                }
            } else {
                for nmat in nilpotents {
                    x += nmat * gaussian(rng);
                }
            }
            exp_nilpotent(numbers, &x)?.l * random_block_upper(numbers, rng)
        }
        FlagKind::Gaussian => CMat::from_fn(m, m, |_, _| gaussian(rng)),
        FlagKind::Permuted => {
            let u = random_block_upper(numbers, rng);
            let mut perm: Vec<usize> = (0..m).collect();
            perm.shuffle(rng);
            CMat::from_fn(m, m, |r, c| u[(perm[r], c)])
        }
    };
    FlagPoint::new(numbers, basis)
}
