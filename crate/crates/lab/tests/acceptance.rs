//! Acceptance suite: one line per criterion, non-zero exit when any fails.

use std::collections::{BTreeMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use period_core::big_cell::{cell_coordinate, membership_in_big_cell, random_flag, FlagKind, FlagPoint};
use period_core::exact::{to_cmat, Rational};
use period_core::hodge::{build_reference_frame, HodgeFrame, HodgeNumbers};
use period_core::lie::{lie_algebra_basis, GradedLieAlgebra};
use period_core::numeric::{commutator, expm, CMat};
use period_core::orbit::{polydisc_trial, sample_rng, sl2_orbit_coordinate, verify_sl2_decomposition, PolydiscConfig};
use period_core::roots::{root_system, RootSystem};
use period_core::strong_orth::{
    greedy_strongly_orthogonal, reduce_to_maximal_abelian, ReductionOptions, StrongOrthSet,
};
use period_lab::config::TrialConfig;
use period_lab::report::{render_bound_csv, render_checks_csv, render_json, render_text};
use period_lab::run_pipeline;

const PRESETS: [(&str, usize, &[usize]); 4] = [
    ("sl2", 1, &[1, 1]),
    ("sp4", 1, &[2, 2]),
    ("k3toy", 2, &[1, 2, 1]),
    ("nonhermitian", 2, &[2, 2, 2]),
];

/// Regression value for the non-Hermitian preset, frozen after the exhaustive
/// oracle below reported it.
const NONHERMITIAN_R: usize = 2;

struct Setup {
    name: &'static str,
    frame: HodgeFrame,
    alg: GradedLieAlgebra,
    rs: RootSystem,
    sos: StrongOrthSet,
}

fn setups() -> Vec<Setup> {
    PRESETS
        .iter()
        .map(|(name, n, h)| {
            let frame = build_reference_frame(&HodgeNumbers::new(*n, h.to_vec()).unwrap());
            let alg = lie_algebra_basis(&frame);
            let rs = root_system(&alg).unwrap();
            let sos = greedy_strongly_orthogonal(&rs);
            Setup { name, frame, alg, rs, sos }
        })
        .collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn lcg(seed: &mut u64) -> f64 {
    *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    ((*seed >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
}

fn null_count(a: &DMatrix<Complex64>, tol: f64) -> usize {
    let a = if a.nrows() < a.ncols() {
        a.clone().insert_rows(a.nrows(), a.ncols() - a.nrows(), c(0.0, 0.0))
    } else {
        a.clone()
    };
    a.singular_values().iter().filter(|&&s| s < tol).count()
}

/// Solutions of `X^T Q + Q X = 0` among matrices supported on `entries`.
fn solution_dim(q: &CMat, entries: &[(usize, usize)]) -> usize {
    let m = q.nrows();
    let mut a = DMatrix::<Complex64>::zeros(m * m, entries.len());
    for (col, &(i, j)) in entries.iter().enumerate() {
        let mut e = CMat::zeros(m, m);
        e[(i, j)] = c(1.0, 0.0);
        for (r, z) in (e.transpose() * q + q * &e).iter().enumerate() {
            a[(r, col)] = *z;
        }
    }
    null_count(&a, 1e-9)
}

/// Real basis of `{X in span_C(mats) : X^* = sign X}`.
fn hermitian_part(mats: &[CMat], sign: f64) -> Vec<CMat> {
    let m = mats[0].nrows();
    let spanning: Vec<CMat> = mats.iter().flat_map(|x| [x.clone(), x * c(0.0, 1.0)]).collect();
    let mut a = DMatrix::<f64>::zeros(2 * m * m, spanning.len());
    for (j, x) in spanning.iter().enumerate() {
        for (i, z) in (x.adjoint() - x * c(sign, 0.0)).iter().enumerate() {
            a[(2 * i, j)] = z.re;
            a[(2 * i + 1, j)] = z.im;
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.max().max(1.0);
    let mut out = Vec::new();
    for k in 0..svd.singular_values.len() {
        if svd.singular_values[k] <= 1e-10 * smax {
            out.push(spanning.iter().enumerate().fold(CMat::zeros(m, m), |acc, (j, y)| acc + y * c(vt[(k, j)], 0.0)));
        }
    }
    out
}

/// `ad X` in the coordinates of `basis`.
fn ad(basis: &[CMat], x: &CMat) -> DMatrix<Complex64> {
    let m = x.nrows();
    let d = basis.len();
    let b = DMatrix::from_fn(m * m, d, |i, j| basis[j][(i / m, i % m)]);
    let svd = b.svd(true, true);
    let mut out = DMatrix::zeros(d, d);
    for (j, e) in basis.iter().enumerate() {
        let br = commutator(x, e);
        let v = DVector::from_fn(m * m, |i, _| br[(i / m, i % m)]);
        out.set_column(j, &svd.solve(&v, 1e-12).unwrap());
    }
    out
}

fn killing(basis: &[CMat], x: &CMat, y: &CMat) -> Complex64 {
    (ad(basis, x) * ad(basis, y)).trace()
}

fn elements(alg: &GradedLieAlgebra) -> Vec<CMat> {
    (0..alg.dim()).map(|j| alg.element(j)).collect()
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_1(sets: &[Setup]) -> Outcome {
    let start = Instant::now();
    let mut worst_jacobi: f64 = 0.0;
    let mut notes = Vec::new();
    for s in sets {
        let q = s.frame.q_f64();
        let m = s.frame.dim();
        let els = elements(&s.alg);
        let d = els.len();
        // Closure: brackets satisfy the defining identity, and the basis spans all solutions.
        let all: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
        if solution_dim(&q, &all) != d {
            return Err(format!("{}: basis does not span the algebra", s.name));
        }
        let br: Vec<Vec<CMat>> = els.iter().map(|x| els.iter().map(|y| commutator(x, y)).collect()).collect();
        for i in 0..d {
            for j in 0..d {
                let x = &br[i][j];
                if max_abs(&(x.transpose() * &q + &q * x)) > 1e-12 {
                    return Err(format!("{}: [b{i}, b{j}] leaves g", s.name));
                }
                let want = s.alg.basis()[i].degree + s.alg.basis()[j].degree;
                for (k, part) in s.alg.grade(x).unwrap() {
                    if k != want && max_abs(&part) > 1e-12 {
                        return Err(format!("{}: [b{i}, b{j}] leaks into degree {k}", s.name));
                    }
                }
                for k in 0..d {
                    let jac = commutator(&els[i], &br[j][k]) + commutator(&els[j], &br[k][i]) + commutator(&els[k], &br[i][j]);
                    worst_jacobi = worst_jacobi.max(max_abs(&jac));
                }
            }
        }
        // Root spaces from the weights of matrix units under the diagonal Cartan.
        let hs = s.alg.cartan();
        let mut groups: BTreeMap<Vec<i64>, Vec<(usize, usize)>> = BTreeMap::new();
        for &(i, j) in &all {
            let w: Vec<i64> = hs.iter().map(|h| (h[(i, i)] - h[(j, j)]).re.round() as i64).collect();
            groups.entry(w).or_default().push((i, j));
        }
        let mut root_dims = Vec::new();
        for (w, entries) in &groups {
            if w.iter().any(|&x| x != 0) {
                let k = solution_dim(&q, entries);
                if k > 0 {
                    root_dims.push(k);
                }
            }
        }
        if root_dims.iter().any(|&k| k != 1) || root_dims.len() != s.rs.len() {
            return Err(format!("{}: root spaces {root_dims:?}", s.name));
        }
        if d != hs.len() + s.rs.len() {
            return Err(format!("{}: dim g = {d} != {} + {}", s.name, hs.len(), s.rs.len()));
        }
        for r in &s.rs.roots {
            let live: Vec<i32> = s
                .alg
                .grade(&r.vector)
                .unwrap()
                .iter()
                .filter(|(_, p)| max_abs(p) > 1e-12)
                .map(|(k, _)| *k)
                .collect();
            if live != vec![r.hodge_degree] {
                return Err(format!("{}: impure root vector", s.name));
            }
        }
        notes.push(format!("{} g={} |D|={}", s.name, d, s.rs.len()));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst_jacobi <= 1e-10 && secs < 10.0,
        format!("{}; Jacobi {worst_jacobi:.1e}; {secs:.2} s", notes.join(", ")),
    )
}

fn criterion_2(sets: &[Setup]) -> Outcome {
    let mut worst = f64::INFINITY;
    for s in sets {
        let nums = s.frame.numbers();
        let n = nums.weight();
        let q = s.frame.q();
        for i in 0..nums.dim() {
            for j in 0..nums.dim() {
                let zero = q[(i, j)] == period_core::exact::gq(0, 0);
                if (nums.block_of(i) + nums.block_of(j) == n) == zero && !zero {
                    return Err(format!("{}: Q[{i},{j}] outside the paired blocks", s.name));
                }
            }
        }
        // H(u, v) = Q(C u, conj v) on basis vectors.
        let m = nums.dim();
        let qf = s.frame.q_f64();
        let cw = to_cmat(s.frame.weil());
        let h = CMat::from_fn(m, m, |a, b| {
            let mut eb = DVector::<Complex64>::zeros(m);
            eb[b] = c(1.0, 0.0);
            let cv = s.frame.conj_vec(&eb);
            (cw.column(a).transpose() * &qf * cv)[(0, 0)]
        });
        if max_abs(&(&h - h.adjoint())) > 1e-12 {
            return Err(format!("{}: H not Hermitian", s.name));
        }
        let eig = h.symmetric_eigenvalues().min();
        worst = worst.min(eig);
    }
    ensure(worst > 0.9, format!("HR1' sparsity exact on all presets; min eigenvalue of H {worst:.6}"))
}

fn criterion_3(sets: &[Setup]) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for s in sets {
        let els = elements(&s.alg);
        let gc = hermitian_part(&els, -1.0);
        if gc.len() != els.len() {
            return Err(format!("{}: g_c has real dimension {}", s.name, gc.len()));
        }
        let gram = DMatrix::from_fn(gc.len(), gc.len(), |i, j| killing(&els, &gc[i], &gc[j]).re);
        let sym = (&gram + gram.transpose()) * 0.5;
        worst = worst.max(sym.symmetric_eigenvalues().max());
    }
    ensure(worst < -1e-8, format!("max Killing eigenvalue on g_c {worst:.3}"))
}

fn criterion_4(sets: &[Setup]) -> Outcome {
    let mut notes = Vec::new();
    for s in sets {
        let rep = s.rs.check_sum_relations(&s.alg);
        let set: HashSet<&Vec<Rational>> = s.rs.roots.iter().map(|r| &r.coords).collect();
        let mut own = 0;
        for a in &s.rs.roots {
            for b in &s.rs.roots {
                let sum: Vec<Rational> = a.coords.iter().zip(&b.coords).map(|(x, y)| x + y).collect();
                let hit = set.contains(&sum);
                if !a.compact && !b.compact && a.positive && b.positive && hit {
                    own += 1;
                }
                if a.compact && !b.compact && hit {
                    let t = s.rs.roots.iter().find(|t| t.coords == sum).unwrap();
                    if t.compact || t.positive != b.positive {
                        own += 1;
                    }
                }
            }
        }
        if rep.violations() + own > 0 {
            return Err(format!("{}: {} violations, {own} by independent scan", s.name, rep.violations()));
        }
        notes.push(format!("{} {} pairs", s.name, rep.pairs_checked));
    }
    Ok(format!("0 violations ({})", notes.join(", ")))
}

fn exhaustive_r(rs: &RootSystem) -> usize {
    let set: HashSet<&Vec<Rational>> = rs.roots.iter().map(|r| &r.coords).collect();
    let cand: Vec<&Vec<Rational>> = rs.roots.iter().filter(|r| r.positive && !r.compact).map(|r| &r.coords).collect();
    let zero = Rational::from_integer(0);
    let ok = |a: &Vec<Rational>, b: &Vec<Rational>| {
        let s: Vec<Rational> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        let d: Vec<Rational> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        !set.contains(&s) && !set.contains(&d) && s.iter().any(|v| *v != zero) && d.iter().any(|v| *v != zero)
    };
    (0u32..1 << cand.len())
        .filter(|mask| {
            let idx: Vec<usize> = (0..cand.len()).filter(|k| mask >> k & 1 == 1).collect();
            idx.iter().all(|&a| idx.iter().all(|&b| a == b || ok(cand[a], cand[b])))
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn criterion_5(sets: &[Setup]) -> Outcome {
    let expected = [1, 2, 2, NONHERMITIAN_R];
    let mut notes = Vec::new();
    for (s, want) in sets.iter().zip(expected) {
        let brute = exhaustive_r(&s.rs);
        notes.push(format!("{} {}/{}", s.name, s.sos.r, brute));
        if brute != s.sos.r || brute != want {
            return Err(format!("{}: greedy {} brute force {brute} expected {want}", s.name, s.sos.r));
        }
    }
    Ok(format!("greedy/brute force: {}", notes.join(", ")))
}

fn criterion_6(sets: &[Setup]) -> Outcome {
    let mut notes = Vec::new();
    for s in sets {
        let odd: Vec<CMat> = (0..s.alg.dim()).filter(|&j| s.alg.basis()[j].degree % 2 != 0).map(|j| s.alg.element(j)).collect();
        let p0 = hermitian_part(&odd, 1.0);
        let m = s.frame.dim();
        let rows = 2 * m * m * s.sos.r;
        let mut a = DMatrix::<f64>::zeros(rows.max(p0.len()), p0.len());
        for (j, p) in p0.iter().enumerate() {
            for (k, x) in s.sos.x_basis.iter().enumerate() {
                for (i, z) in commutator(p, x).iter().enumerate() {
                    a[(2 * (k * m * m + i), j)] = z.re;
                    a[(2 * (k * m * m + i) + 1, j)] = z.im;
                }
            }
        }
        let sv = a.singular_values();
        let smax = sv.max().max(1.0);
        let dim = sv.iter().filter(|&&v| v <= 1e-10 * smax).count();
        notes.push(format!("{} {dim}", s.name));
        if dim != s.sos.r {
            return Err(format!("{}: centralizer dim {dim}, r = {}", s.name, s.sos.r));
        }
    }
    Ok(format!("dim centralizer = r: {}", notes.join(", ")))
}

fn projection_member(nums: &HodgeNumbers, a: &CMat) -> bool {
    (0..nums.num_blocks() - 1).all(|b| {
        let s = nums.leading(b);
        let q = a.columns(0, s).into_owned().qr().q();
        q.rows(0, s).into_owned().singular_values().min() > 1e-8
    })
}

fn criterion_7(sets: &[Setup]) -> Outcome {
    let kinds = [FlagKind::Unipotent, FlagKind::Gaussian, FlagKind::Permuted];
    let mut worst_l: f64 = 0.0;
    let mut notes = Vec::new();
    let mut seed = 2024;
    for s in sets {
        let nums = s.frame.numbers();
        let mut agree = 0;
        let mut members = 0;
        for idx in 0..500u64 {
            let flag = random_flag(nums, kinds[idx as usize % 3], &[], &mut sample_rng(7, idx)).unwrap();
            let rep = membership_in_big_cell(nums, &flag);
            if rep.is_member() == projection_member(nums, flag.basis()) {
                agree += 1;
            }
            if rep.is_member() {
                members += 1;
                let base = cell_coordinate(nums, &flag).unwrap();
                let m = nums.dim();
                let u = CMat::from_fn(m, m, |r, col| {
                    if nums.block_of(col) >= nums.block_of(r) {
                        c(lcg(&mut seed), lcg(&mut seed)) + if r == col { c(2.0, 0.0) } else { c(0.0, 0.0) }
                    } else {
                        c(0.0, 0.0)
                    }
                });
                let moved = cell_coordinate(nums, &FlagPoint::new(nums, flag.basis() * u).unwrap()).unwrap();
                worst_l = worst_l.max(max_abs(&(&moved.l - &base.l)) / max_abs(&base.l).max(1.0));
            }
        }
        notes.push(format!("{} {agree}/500 ({members} in cell)", s.name));
        if agree != 500 {
            return Err(format!("{}: agreement {agree}/500", s.name));
        }
    }
    ensure(worst_l <= 1e-10, format!("{}; L-uniqueness {worst_l:.1e}", notes.join(", ")))
}

fn criterion_8(sets: &[Setup]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_lib: f64 = 0.0;
    let mut seed = 8;
    for s in sets {
        for _ in 0..100 {
            let rho = 20.0 * ((lcg(&mut seed) + 1.0) / 2.0).sqrt();
            let z = Complex64::from_polar(rho, std::f64::consts::PI * lcg(&mut seed));
            for i in 0..s.sos.r {
                let t = &s.sos.oriented_triples[i];
                let w = sl2_orbit_coordinate(&s.sos, i, z).unwrap();
                let lhs = expm(&(&t.e * z + &t.f * z.conj())).unwrap();
                let mid = expm(&(&t.h * c(-z.norm().cosh().ln(), 0.0))).unwrap();
                let rhs = expm(&(&t.e * w)).unwrap() * mid * expm(&(&t.f * w.conj())).unwrap();
                worst = worst.max(max_abs(&(&lhs - rhs)) / max_abs(&lhs).max(1.0));
                worst_lib = worst_lib.max(verify_sl2_decomposition(&s.sos, i, z).unwrap().residual);
            }
        }
    }
    ensure(
        worst <= 1e-10 && worst_lib <= 1e-10,
        format!("max entrywise residual {worst:.1e} (library check {worst_lib:.1e}), relative to max|entry|"),
    )
}

fn criterion_9(sets: &[Setup]) -> Outcome {
    let mut notes = Vec::new();
    for s in sets {
        let start = Instant::now();
        let bound = (s.sos.r as f64).sqrt() + 1e-9;
        let mut rows = 0;
        let mut max_d: f64 = 0.0;
        for seed in [0u64, 1, 2, 3, 4] {
            let cfg = PolydiscConfig { seed, ..Default::default() };
            let res = polydisc_trial(&s.alg, &s.sos, &cfg);
            if let Some(v) = res.violations.first() {
                return Err(format!("{} seed {seed}: {} violations, first {v:?}", s.name, res.violations.len()));
            }
            for r in &res.rows {
                let ok = r.in_big_cell
                    && r.coord.norm() <= 1.0 + 1e-12
                    && (r.coord - c((r.t * r.lambda_i).tanh(), 0.0)).norm() <= 1e-9
                    && r.d_e <= bound;
                if !ok {
                    return Err(format!("{} seed {seed}: bad row {r:?}", s.name));
                }
                max_d = max_d.max(r.d_e);
            }
            rows += res.rows.len();
        }
        let secs = start.elapsed().as_secs_f64();
        if secs >= 60.0 {
            return Err(format!("{}: {secs:.1} s", s.name));
        }
        notes.push(format!("{} {rows} rows max d_E {max_d:.6} {secs:.1} s", s.name));
    }
    Ok(notes.join("; "))
}

fn criterion_10(sets: &[Setup]) -> Outcome {
    let mut notes = Vec::new();
    let mut worst_norm: f64 = 0.0;
    let mut seed = 10;
    for s in sets {
        let m = s.frame.dim();
        let els = elements(&s.alg);
        let k0 = s.rs.k0_basis(&s.alg);
        let mut ok = 0;
        for trial in 0..100u64 {
            let y = s.sos.x_basis.iter().fold(CMat::zeros(m, m), |acc, x| acc + x * c(2.0 * lcg(&mut seed), 0.0));
            let z = k0.iter().fold(CMat::zeros(m, m), |acc, k| acc + k * c(0.5 * lcg(&mut seed), 0.0));
            let g = expm(&z).unwrap();
            let x = &g * &y * g.adjoint();
            let opts = ReductionOptions { seed: trial, ..Default::default() };
            let red = reduce_to_maximal_abelian(&s.alg, &s.rs, &s.sos, &x, &opts).unwrap();
            let recon = &red.k * &red.y * red.k.adjoint();
            let resid = (recon - &x).norm() / x.norm().max(1.0);
            if resid <= 1e-8 {
                ok += 1;
                let bx = killing(&els, &x, &x).re;
                let by = killing(&els, &red.y, &red.y).re;
                worst_norm = worst_norm.max((by.sqrt() - bx.sqrt()).abs() / bx.sqrt().max(1.0));
            }
        }
        notes.push(format!("{} {ok}/100", s.name));
        if ok < 95 {
            return Err(notes.join(", "));
        }
    }
    ensure(worst_norm <= 1e-8, format!("{}; Killing norm drift {worst_norm:.1e}", notes.join(", ")))
}

fn criterion_11() -> Outcome {
    let mut notes = Vec::new();
    for (name, _, _) in PRESETS {
        let mut cfg = TrialConfig::preset(name).unwrap();
        cfg.seed = 11;
        cfg.samples = 200;
        let a = run_pipeline(&cfg).map_err(|e| e.to_string())?;
        let b = run_pipeline(&cfg).map_err(|e| e.to_string())?;
        let same = render_json(&a) == render_json(&b)
            && render_text(&a) == render_text(&b)
            && render_checks_csv(&a).unwrap() == render_checks_csv(&b).unwrap()
            && render_bound_csv(&a).unwrap() == render_bound_csv(&b).unwrap();
        if !same {
            return Err(format!("{name}: reports differ"));
        }
        notes.push(format!("{name} {} bytes", render_json(&a).len()));
    }
    Ok(format!("byte-identical json/text/csv: {}", notes.join(", ")))
}

fn main() {
    let sets = setups();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("structure suite", Box::new(|| criterion_1(&sets))),
        ("Hodge-Riemann", Box::new(|| criterion_2(&sets))),
        ("compactness of g_c", Box::new(|| criterion_3(&sets))),
        ("root relations R1-R4", Box::new(|| criterion_4(&sets))),
        ("strongly orthogonal rank", Box::new(|| criterion_5(&sets))),
        ("centralizer maximality", Box::new(|| criterion_6(&sets))),
        ("big-cell equivalence", Box::new(|| criterion_7(&sets))),
        ("SL(2) decomposition", Box::new(|| criterion_8(&sets))),
        ("polydisc boundedness", Box::new(|| criterion_9(&sets))),
        ("Ad(K) reduction", Box::new(|| criterion_10(&sets))),
        ("determinism", Box::new(criterion_11)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(msg) => println!("acceptance {:>2} PASS  {name}: {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("acceptance {:>2} FAIL  {name}: {msg}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
