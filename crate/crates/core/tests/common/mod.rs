#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use period_core::hodge::{build_reference_frame, HodgeFrame, HodgeNumbers};
use period_core::lie::{lie_algebra_basis, GradedLieAlgebra};
use period_core::numeric::CMat;
use period_core::roots::{root_system, RootSystem};
use period_core::strong_orth::{greedy_strongly_orthogonal, StrongOrthSet};

pub const PRESETS: [(&str, usize, &[usize]); 4] = [
    ("sl2", 1, &[1, 1]),
    ("sp4", 1, &[2, 2]),
    ("k3toy", 2, &[1, 2, 1]),
    ("nonhermitian", 2, &[2, 2, 2]),
];

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn frame(n: usize, h: &[usize]) -> HodgeFrame {
    build_reference_frame(&HodgeNumbers::new(n, h.to_vec()).unwrap())
}

pub struct Setup {
    pub frame: HodgeFrame,
    pub alg: GradedLieAlgebra,
    pub rs: RootSystem,
    pub sos: StrongOrthSet,
}

pub fn setup(n: usize, h: &[usize]) -> Setup {
    let frame = frame(n, h);
    let alg = lie_algebra_basis(&frame);
    let rs = root_system(&alg).unwrap();
    let sos = greedy_strongly_orthogonal(&rs);
    Setup { frame, alg, rs, sos }
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Real null space dimension of the linear map `X -> X^T Q + Q X` on all m x m
/// complex matrices, computed by dense SVD.
pub fn brute_force_dim(q: &CMat) -> usize {
    let m = q.nrows();
    let n = m * m;
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        let mut e = CMat::zeros(m, m);
        e[(j / m, j % m)] = c(1.0, 0.0);
        let img = e.transpose() * q + q * &e;
        for i in 0..n {
            a[(i, j)] = img[(i / m, i % m)];
        }
    }
    let sv = a.singular_values();
    sv.iter().filter(|&&s| s < 1e-9).count()
}

/// Explicit `ad X` matrix on a basis given by coordinates via least squares.
pub fn ad_matrix(basis: &[CMat], x: &CMat) -> DMatrix<Complex64> {
    let d = basis.len();
    let m = x.nrows();
    let mut b = DMatrix::<Complex64>::zeros(m * m, d);
    for (j, e) in basis.iter().enumerate() {
        for (i, v) in e.iter().enumerate() {
            b[(i, j)] = *v;
        }
    }
    let svd = b.clone().svd(true, true);
    let mut out = DMatrix::zeros(d, d);
    for (j, e) in basis.iter().enumerate() {
        let br = x * e - e * x;
        let v = DVector::from_iterator(m * m, br.iter().cloned());
        let coef = svd.solve(&v, 1e-12).unwrap();
        out.set_column(j, &coef);
    }
    out
}

pub fn killing_oracle(basis: &[CMat], x: &CMat, y: &CMat) -> Complex64 {
    (ad_matrix(basis, x) * ad_matrix(basis, y)).trace()
}

pub fn lcg(seed: &mut u64) -> f64 {
    *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    ((*seed >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
}

/// Random element of g as a random combination of the basis.
pub fn random_element(alg: &GradedLieAlgebra, seed: &mut u64) -> CMat {
    let m = alg.frame().dim();
    let mut x = CMat::zeros(m, m);
    for j in 0..alg.dim() {
        x += alg.element(j) * c(lcg(seed), lcg(seed));
    }
    x
}

/// Real basis of `{X in span_C(mats) : X^* = sign * X}` by real nullspace.
pub fn hermitian_part_basis(mats: &[CMat], sign: f64) -> Vec<CMat> {
    let m = if mats.is_empty() { return Vec::new() } else { mats[0].nrows() };
    let spanning: Vec<CMat> = mats.iter().flat_map(|x| [x.clone(), x * c(0.0, 1.0)]).collect();
    let rows = 2 * m * m;
    let mut a = DMatrix::<f64>::zeros(rows, spanning.len());
    for (j, x) in spanning.iter().enumerate() {
        let d = x.adjoint() - x * c(sign, 0.0);
        for (i, z) in d.iter().enumerate() {
            a[(2 * i, j)] = z.re;
            a[(2 * i + 1, j)] = z.im;
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max).max(1.0);
    let mut sols = Vec::new();
    for k in 0..vt.nrows() {
        // Thin SVD: rows >= columns since dim g <= m^2.
        if svd.singular_values[k] <= 1e-10 * smax {
            let mut x = CMat::zeros(m, m);
            for (j, y) in spanning.iter().enumerate() {
                x += y * c(vt[(k, j)], 0.0);
            }
            sols.push(x);
        }
    }
    independent(&sols)
}

/// Keeps a real-linearly independent subset.
pub fn independent(mats: &[CMat]) -> Vec<CMat> {
    let mut kept: Vec<CMat> = Vec::new();
    for x in mats {
        let mut trial = kept.clone();
        trial.push(x.clone());
        if period_core::numeric::real_span_dim(&trial, 1e-9) == trial.len() {
            kept = trial;
        }
    }
    kept
}
