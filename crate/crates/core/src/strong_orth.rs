//! Greedy strongly orthogonal roots, the maximal abelian subspace `A0` of
//! `p0`, and the numerical `Ad(K)` reduction onto it.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::lie::GradedLieAlgebra;
use crate::numeric::{commutator, expm, frob, inner, lstsq, real_nullspace, realify, CMat};
use crate::roots::RootSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct Sl2Triple {
    pub e: CMat,
    pub f: CMat,
    pub h: CMat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongOrthSet {
    /// Root indices `phi_1 < ... < phi_r`.
    pub lambda: Vec<usize>,
    /// `phi_i` or `-phi_i`, whichever has its root vector in `n+`.
    pub oriented: Vec<usize>,
    /// Hodge degrees of the oriented roots.
    pub oriented_degrees: Vec<i32>,
    /// Triples `(e_phi, e_{-phi}, h_phi)` for `lambda`.
    pub triples: Vec<Sl2Triple>,
    /// Same triples for the oriented roots.
    pub oriented_triples: Vec<Sl2Triple>,
    pub x_basis: Vec<CMat>,
    pub y_basis: Vec<CMat>,
    pub r: usize,
}

fn add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

/// `phi +- psi` is neither a root nor zero.
pub fn strongly_orthogonal(rs: &RootSystem, a: usize, b: usize) -> bool {
    if a == b {
        return false;
    }
    let (ca, cb) = (&rs.roots[a].coords, &rs.roots[b].coords);
    let s = add(ca, cb);
    let d = sub(ca, cb);
    let zero = |v: &[Rational]| v.iter().all(|x| *x == Rational::from_integer(0));
    rs.find(&s).is_none() && rs.find(&d).is_none() && !zero(&s) && !zero(&d)
}

fn triple(rs: &RootSystem, i: usize) -> Sl2Triple {
    let r = &rs.roots[i];
    Sl2Triple {
        e: r.vector.clone(),
        f: rs.roots[r.negative].vector.clone(),
        h: rs.coroots[i].clone(),
    }
}

/// Minimum-first greedy selection over the positive noncompact roots.
pub fn greedy_strongly_orthogonal(rs: &RootSystem) -> StrongOrthSet {
    let mut candidates = rs.noncompact_positive();
    candidates.sort_by(|&a, &b| {
        if a == b {
            core::cmp::Ordering::Equal
        } else if rs.less(a, b) {
            core::cmp::Ordering::Less
        } else {
            core::cmp::Ordering::Greater
        }
    });
    let mut lambda: Vec<usize> = Vec::new();
    for &c in &candidates {
        if lambda.iter().all(|&l| strongly_orthogonal(rs, l, c)) {
            lambda.push(c);
        }
    }
    from_roots(rs, &lambda)
}

/// Builds the set data for an arbitrary list of roots (used for corrupted-set checks too).
pub fn from_roots(rs: &RootSystem, lambda: &[usize]) -> StrongOrthSet {
    let i = Complex64::new(0.0, 1.0);
    let oriented: Vec<usize> = lambda
        .iter()
        .map(|&l| {
            if rs.roots[l].hodge_degree < 0 {
                l
            } else {
                rs.roots[l].negative
            }
        })
        .collect();
    let triples: Vec<Sl2Triple> = lambda.iter().map(|&l| triple(rs, l)).collect();
    let oriented_triples = oriented.iter().map(|&l| triple(rs, l)).collect();
    let x_basis = triples.iter().map(|t| &t.e + &t.f).collect();
    let y_basis = triples.iter().map(|t| (&t.e - &t.f) * i).collect();
    StrongOrthSet {
        lambda: lambda.to_vec(),
        oriented_degrees: oriented.iter().map(|&l| rs.roots[l].hodge_degree).collect(),
        oriented,
        triples,
        oriented_triples,
        x_basis,
        y_basis,
        r: lambda.len(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralizerReport {
    pub dim: usize,
    pub r: usize,
    /// Largest `|[x_i, x_j]|`.
    pub commutator_residual: f64,
    pub pass: bool,
}

/// Dimension of `{X in p0 : [X, x] = 0 for x in xs}`.
pub fn centralizer_dimension(rs: &RootSystem, xs: &[CMat]) -> usize {
    let p0 = rs.p0_basis();
    if p0.is_empty() {
        return 0;
    }
    let cols: Vec<DVector<f64>> = p0
        .iter()
        .map(|p| {
            let parts: Vec<f64> = xs.iter().flat_map(|x| realify(&commutator(p, x)).iter().cloned().collect::<Vec<_>>()).collect();
            DVector::from_vec(parts)
        })
        .collect();
    let nrows = cols[0].len();
    if nrows == 0 {
        return p0.len();
    }
    let mut a = DMatrix::zeros(nrows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        a.set_column(j, c);
    }
    real_nullspace(&a, 1e-10).len()
}

pub fn centralizer_check(rs: &RootSystem, sos: &StrongOrthSet) -> CentralizerReport {
    let dim = centralizer_dimension(rs, &sos.x_basis);
    let mut commutator_residual: f64 = 0.0;
    for a in &sos.x_basis {
        for b in &sos.x_basis {
            commutator_residual = commutator_residual.max(frob(&commutator(a, b)));
        }
    }
    CentralizerReport {
        dim,
        r: sos.r,
        commutator_residual,
        pass: dim == sos.r && commutator_residual <= 1e-12,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 200,
            restarts: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub k: CMat,
    pub y: CMat,
    /// `Y = sum c_i x_i`.
    pub coeffs: Vec<f64>,
    /// `|Ad(k) Y - X| / max(1, |X|)`.
    pub residual: f64,
    pub iterations: usize,
    pub restarts_used: usize,
}

fn project_a(xs: &[CMat], w: &CMat) -> (CMat, Vec<f64>) {
    let m = w.nrows();
    let mut out = CMat::zeros(m, m);
    let mut coeffs = Vec::with_capacity(xs.len());
    for x in xs {
        let c = (inner(x, w) / inner(x, x)).re;
        out += x * Complex64::new(c, 0.0);
        coeffs.push(c);
    }
    (out, coeffs)
}

/// Residual of the `p0` membership conditions `theta X = -X`, `tau0 X = X`.
pub fn p0_residual(algebra: &GradedLieAlgebra, x: &CMat) -> Result<f64> {
    let th = algebra.weil_involution(x)?;
    let t0 = algebra.conj_real(x)?;
    let scale = frob(x).max(1.0);
    Ok(frob(&(th + x)).max(frob(&(t0 - x))) / scale)
}

/// Finds `k` in `K` and `Y` in `A0` with `Ad(k) Y = X` by Levenberg-Marquardt
/// descent on `|(I - P_A) Ad(k^{-1}) X|^2`, with seeded restarts.
pub fn reduce_to_maximal_abelian(
    algebra: &GradedLieAlgebra,
    rs: &RootSystem,
    sos: &StrongOrthSet,
    x: &CMat,
    opts: &ReductionOptions,
) -> Result<Reduction> {
    let res = p0_residual(algebra, x)?;
    if res > 1e-10 {
        return Err(Error::NotInP0(res));
    }
    let m = x.nrows();
    let k0 = rs.k0_basis(algebra);
    let xs = &sos.x_basis;
    let xnorm = frob(x).max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = f64::INFINITY;
    let mut iterations = 0;
    for restart in 0..=opts.restarts {
        let mut k = if restart == 0 {
            CMat::identity(m, m)
        } else {
            let mut z = CMat::zeros(m, m);
            for b in &k0 {
                let s: f64 = rng.sample(StandardNormal);
                z += b * Complex64::new(s, 0.0);
            }
            expm(&z)?
        };
        let cost_of = |k: &CMat| {
            let w = k.adjoint() * x * k;
            let (pw, _) = project_a(xs, &w);
            let r = &w - pw;
            (w, r)
        };
        let (mut w, mut r) = cost_of(&k);
        let mut cost = frob(&r);
        let mut lambda = 1e-3;
        for _ in 0..opts.max_iterations {
            iterations += 1;
            if cost <= 1e-3 * opts.tolerance * xnorm {
                break;
            }
            let cols: Vec<DVector<f64>> = k0
                .iter()
                .map(|z| {
                    let d = commutator(&w, z);
                    let (pd, _) = project_a(xs, &d);
                    realify(&(d - pd))
                })
                .collect();
            let nrows = cols.first().map_or(0, |c| c.len());
            let mut jac = DMatrix::zeros(nrows, cols.len());
            for (j, c) in cols.iter().enumerate() {
                jac.set_column(j, c);
            }
            let rv = realify(&r);
            let jtj = jac.transpose() * &jac;
            let jtr = jac.transpose() * &rv;
            let mut improved = false;
            while lambda < 1e12 {
                let mut lhs = jtj.clone();
                for d in 0..lhs.nrows() {
                    lhs[(d, d)] += lambda * (1.0 + jtj[(d, d)]);
                }
                let step = lstsq(&lhs, &(-&jtr));
                let mut s = CMat::zeros(m, m);
                for (z, &c) in k0.iter().zip(step.iter()) {
                    s += z * Complex64::new(c, 0.0);
                }
                let trial = &k * expm(&s)?;
                let (tw, tr) = cost_of(&trial);
                let tc = frob(&tr);
                if tc < cost {
                    k = trial;
                    w = tw;
                    r = tr;
                    cost = tc;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = true;
                    break;
                }
                lambda *= 4.0;
            }
            if !improved {
                break;
            }
        }
        let (y, coeffs) = project_a(xs, &w);
        let residual = frob(&(&k * &y * k.adjoint() - x)) / xnorm;
        best = best.min(residual);
        if residual <= opts.tolerance {
            return Ok(Reduction {
                k,
                y,
                coeffs,
                residual,
                iterations,
                restarts_used: restart,
            });
        }
    }
    Err(Error::NoConvergence(best))
}

/// Killing norm `sqrt(B(X, X))` of an element of `p0`.
pub fn killing_norm(algebra: &GradedLieAlgebra, x: &CMat) -> Result<f64> {
    Ok(Float::sqrt(algebra.killing_form(x, x)?.re.max(0.0)))
}
