//! Orbit experiments: real exponentials, the SL(2) decomposition and polydisc
//! containment of `exp(A0) . o` in big-cell coordinates.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::big_cell::{cell_coordinate, membership_in_big_cell, project_cell, FlagPoint};
use crate::error::{Error, Result};
use crate::hodge::HodgeFrame;
use crate::lie::{GradedLieAlgebra, MEMBERSHIP_TOL};
use crate::numeric::{expm, frob, max_abs, CMat};
use crate::strong_orth::StrongOrthSet;

/// Deterministic per-sample stream.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `exp(t X)` for `X` in `g0`.
pub fn exp_real(algebra: &GradedLieAlgebra, x: &CMat, t: f64) -> Result<CMat> {
    let res = algebra.membership_residual(x);
    if res > MEMBERSHIP_TOL {
        return Err(Error::NotInAlgebra(res));
    }
    let real = frob(&(algebra.conj_real(x)? - x)) / frob(x).max(1.0);
    if real > MEMBERSHIP_TOL {
        return Err(Error::NotReal(real));
    }
    expm(&(x * Complex64::new(t, 0.0)))
}

/// Flag of `exp(t X) . o`, computed by repeated short steps with QR
/// re-orthonormalization so that every `F^k` stays well resolved even when the
/// columns of `exp(t X)` itself are numerically parallel.
pub fn orbit_flag(algebra: &GradedLieAlgebra, x: &CMat, t: f64) -> Result<FlagPoint> {
    let nums = algebra.frame().numbers();
    let m = nums.dim();
    let size = t.abs() * crate::numeric::norm1(x);
    let steps = Float::ceil(size / 2.0).max(1.0) as usize;
    let step = exp_real(algebra, x, t / steps as f64)?;
    let mut a = CMat::identity(m, m);
    for _ in 0..steps {
        a = (&step * a).qr().q();
    }
    FlagPoint::from_group_element(nums, a)
}

/// `|g^T Q g - Q| / (|g|^2 |Q|)`.
pub fn q_residual(frame: &HodgeFrame, g: &CMat) -> f64 {
    let q = frame.q_f64();
    let d = g.transpose() * &q * g - &q;
    frob(&d) / (frob(g).powi(2) * frob(&q)).max(1e-300)
}

/// `(z/|z|) tanh|z|`, the disc coordinate of `exp(z e + z̄ f) . o`.
pub fn sl2_orbit_coordinate(sos: &StrongOrthSet, i: usize, z: Complex64) -> Result<Complex64> {
    if i >= sos.r {
        return Err(Error::OutOfRange { index: i, len: sos.r });
    }
    let r = z.norm();
    if r == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(z / r * r.tanh())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sl2Check {
    pub lhs: CMat,
    pub rhs: CMat,
    /// Largest entrywise difference over `max(1, max |lhs|)`.
    pub residual: f64,
    pub absolute: f64,
}

/// Compares `exp(z e + z̄ f)` with
/// `exp(w e) exp(-log cosh|z| h) exp(w̄ f)`, `w = (z/|z|) tanh|z|`,
/// for the `i`-th oriented triple.
pub fn verify_sl2_decomposition(sos: &StrongOrthSet, i: usize, z: Complex64) -> Result<Sl2Check> {
    let w = sl2_orbit_coordinate(sos, i, z)?;
    let t = &sos.oriented_triples[i];
    let m = t.e.nrows();
    let lhs = expm(&(&t.e * z + &t.f * z.conj()))?;
    let rhs = if z.norm() == 0.0 {
        CMat::identity(m, m)
    } else {
        let s = -Float::ln(Float::cosh(z.norm()));
        let mid = CMat::from_fn(m, m, |r, c| {
            if r == c {
                (t.h[(r, r)] * s).exp()
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        expm(&(&t.e * w))? * mid * expm(&(&t.f * w.conj()))?
    };
    let absolute = max_abs(&(&lhs - &rhs));
    let residual = absolute / max_abs(&lhs).max(1.0);
    Ok(Sl2Check {
        lhs,
        rhs,
        residual,
        absolute,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolydiscConfig {
    pub samples: usize,
    pub t_grid: Vec<f64>,
    pub lambda_range: f64,
    pub seed: u64,
    pub coord_tol: f64,
    pub tanh_tol: f64,
    pub distance_tol: f64,
    pub q_tol: f64,
}

impl Default for PolydiscConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            t_grid: alloc::vec![0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0],
            lambda_range: 2.0,
            seed: 0,
            coord_tol: 1e-12,
            tanh_tol: 1e-9,
            distance_tol: 1e-9,
            q_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub sample_id: u64,
    pub t: f64,
    pub i: usize,
    pub lambda_i: f64,
    pub coord: Complex64,
    pub tanh_pred: f64,
    pub d_e: f64,
    pub in_big_cell: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    OutsideBigCell,
    CoordinateModulus,
    TanhMismatch,
    DistanceBound,
    QPreservation,
    Monotonicity,
    Leakage,
    NotHorizontal,
    Numerical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub sample_id: u64,
    pub t: f64,
    pub i: Option<usize>,
    pub kind: ViolationKind,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleResult {
    pub rows: Vec<BoundRow>,
    pub violations: Vec<Violation>,
    pub max_abs_coord: f64,
    pub max_d_e: f64,
    pub max_tanh_error: f64,
    pub max_q_residual: f64,
}

impl SampleResult {
    pub fn merge(&mut self, other: SampleResult) {
        self.rows.extend(other.rows);
        self.violations.extend(other.violations);
        self.max_abs_coord = self.max_abs_coord.max(other.max_abs_coord);
        self.max_d_e = self.max_d_e.max(other.max_d_e);
        self.max_tanh_error = self.max_tanh_error.max(other.max_tanh_error);
        self.max_q_residual = self.max_q_residual.max(other.max_q_residual);
    }
}

fn run_direction(
    algebra: &GradedLieAlgebra,
    sos: &StrongOrthSet,
    cfg: &PolydiscConfig,
    sample_id: u64,
    lambda: &[f64],
) -> SampleResult {
    let frame = algebra.frame();
    let nums = frame.numbers();
    let mut out = SampleResult::default();
    let mut x = CMat::zeros(frame.dim(), frame.dim());
    for (l, xb) in lambda.iter().zip(&sos.x_basis) {
        x += xb * Complex64::new(*l, 0.0);
    }
    let directions: Vec<CMat> = sos.oriented_triples.iter().map(|t| t.e.clone()).collect();
    let bound = Float::sqrt(sos.r as f64) + cfg.distance_tol;
    let mut prev: Vec<f64> = alloc::vec![0.0; sos.r];
    let mut grid = cfg.t_grid.clone();
    grid.sort_by(|a, b| a.total_cmp(b));
    for &t in &grid {
        let fail = |kind, i, value| Violation {
            sample_id,
            t,
            i,
            kind,
            value,
        };
        let g = match exp_real(algebra, &x, t) {
            Ok(g) => g,
            Err(_) => {
                out.violations.push(fail(ViolationKind::Numerical, None, f64::NAN));
                continue;
            }
        };
        let qres = q_residual(frame, &g);
        out.max_q_residual = out.max_q_residual.max(qres);
        if qres > cfg.q_tol {
            out.violations.push(fail(ViolationKind::QPreservation, None, qres));
        }
        let flag = orbit_flag(algebra, &x, t);
        let coords = flag.ok().and_then(|flag| {
            membership_in_big_cell(nums, &flag)
                .is_member()
                .then(|| cell_coordinate(nums, &flag).ok())
                .flatten()
        });
        let Some(coord) = coords else {
            out.violations.push(fail(ViolationKind::OutsideBigCell, None, t));
            for (i, &l) in lambda.iter().enumerate() {
                out.rows.push(BoundRow {
                    sample_id,
                    t,
                    i,
                    lambda_i: l,
                    coord: Complex64::new(f64::NAN, f64::NAN),
                    tanh_pred: (t * l).tanh(),
                    d_e: f64::NAN,
                    in_big_cell: false,
                });
            }
            continue;
        };
        let proj = match project_cell(&coord, &directions) {
            Ok(p) => p,
            Err(_) => {
                out.violations.push(fail(ViolationKind::Numerical, None, f64::NAN));
                continue;
            }
        };
        let mut rebuilt = CMat::zeros(frame.dim(), frame.dim());
        for (d, c) in directions.iter().zip(&proj) {
            rebuilt += d * *c;
        }
        let leak = frob(&(&coord.log_l - rebuilt));
        if leak > cfg.tanh_tol {
            out.violations.push(fail(ViolationKind::Leakage, None, leak));
        }
        let d_e = Float::sqrt(proj.iter().map(|c| c.norm_sqr()).sum::<f64>());
        out.max_d_e = out.max_d_e.max(d_e);
        if d_e > bound {
            out.violations.push(fail(ViolationKind::DistanceBound, None, d_e));
        }
        for (i, (&l, c)) in lambda.iter().zip(&proj).enumerate() {
            let pred = (t * l).tanh();
            let abs = c.norm();
            out.max_abs_coord = out.max_abs_coord.max(abs);
            if abs > 1.0 + cfg.coord_tol {
                out.violations.push(fail(ViolationKind::CoordinateModulus, Some(i), abs));
            }
            let err = (c - Complex64::new(pred, 0.0)).norm();
            out.max_tanh_error = out.max_tanh_error.max(err);
            if err > cfg.tanh_tol {
                out.violations.push(fail(ViolationKind::TanhMismatch, Some(i), err));
            }
            if t >= 0.0 && abs + cfg.coord_tol < prev[i] {
                out.violations.push(fail(ViolationKind::Monotonicity, Some(i), abs));
            }
            prev[i] = prev[i].max(abs);
            out.rows.push(BoundRow {
                sample_id,
                t,
                i,
                lambda_i: l,
                coord: *c,
                tanh_pred: pred,
                d_e,
                in_big_cell: true,
            });
        }
    }
    out
}

/// Draws `lambda` uniformly from `[-L, L]^r` on the sample's own stream.
pub fn sample_lambda(cfg: &PolydiscConfig, r: usize, sample_id: u64) -> Vec<f64> {
    let mut rng = sample_rng(cfg.seed, sample_id);
    let l = cfg.lambda_range;
    (0..r)
        .map(|_| if l > 0.0 { rng.random_range(-l..=l) } else { 0.0 })
        .collect()
}

/// One polydisc sample: `X = sum lambda_i x_i` over the whole t-grid.
pub fn polydisc_sample(
    algebra: &GradedLieAlgebra,
    sos: &StrongOrthSet,
    cfg: &PolydiscConfig,
    sample_id: u64,
) -> SampleResult {
    let lambda = sample_lambda(cfg, sos.r, sample_id);
    run_direction(algebra, sos, cfg, sample_id, &lambda)
}

/// Runs an explicit direction (used for hand-picked cases).
pub fn polydisc_direction(
    algebra: &GradedLieAlgebra,
    sos: &StrongOrthSet,
    cfg: &PolydiscConfig,
    lambda: &[f64],
) -> SampleResult {
    run_direction(algebra, sos, cfg, 0, lambda)
}

/// Sequential polydisc trial over `cfg.samples` samples.
pub fn polydisc_trial(algebra: &GradedLieAlgebra, sos: &StrongOrthSet, cfg: &PolydiscConfig) -> SampleResult {
    let mut out = SampleResult::default();
    for id in 0..cfg.samples as u64 {
        out.merge(polydisc_sample(algebra, sos, cfg, id));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalReport {
    pub applicable: bool,
    /// Positions in `lambda` whose oriented root vector lies in `g^{-1,1}`.
    pub horizontal_roots: Vec<usize>,
    pub result: SampleResult,
}

/// Polydisc trial restricted to the roots of Hodge degree `-1`.
pub fn horizontal_abelian_trial(
    algebra: &GradedLieAlgebra,
    sos: &StrongOrthSet,
    cfg: &PolydiscConfig,
) -> HorizontalReport {
    let horizontal_roots: Vec<usize> = (0..sos.r).filter(|&i| sos.oriented_degrees[i] == -1).collect();
    if horizontal_roots.is_empty() {
        return HorizontalReport {
            applicable: false,
            horizontal_roots,
            result: SampleResult::default(),
        };
    }
    let mut result = SampleResult::default();
    for id in 0..cfg.samples as u64 {
        let full = sample_lambda(cfg, sos.r, id);
        let lambda: Vec<f64> = (0..sos.r)
            .map(|i| if horizontal_roots.contains(&i) { full[i] } else { 0.0 })
            .collect();
        let mut tangent = CMat::zeros(algebra.frame().dim(), algebra.frame().dim());
        for &i in &horizontal_roots {
            tangent += &sos.oriented_triples[i].e * Complex64::new(lambda[i], 0.0);
        }
        let mut sample = run_direction(algebra, sos, cfg, id, &lambda);
        if algebra.is_horizontal(&tangent) != Ok(true) {
            sample.violations.push(Violation {
                sample_id: id,
                t: 0.0,
                i: None,
                kind: ViolationKind::NotHorizontal,
                value: frob(&tangent),
            });
        }
        result.merge(sample);
    }
    HorizontalReport {
        applicable: true,
        horizontal_roots,
        result,
    }
}
