//! The verification pipeline: frame, algebra, roots, strongly orthogonal set,
//! big cell, SL(2) decomposition, polydisc trials and Ad(K) reduction.

use std::collections::{BTreeMap, HashSet};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use period_core::big_cell::{
    cell_coordinate, membership_in_big_cell, random_flag, rank_membership, FlagKind, FlagPoint, Membership,
};
use period_core::exact::{to_cmat, Rational};
use period_core::hodge::{build_reference_frame, check_hodge_riemann, HodgeFrame, HodgeRiemannVerdict};
use period_core::lie::{lie_algebra_basis, GradedLieAlgebra};
use period_core::numeric::{commutator, expm, hermitian_min_eig, max_abs, symmetric_max_eig, CMat};
use period_core::orbit::{
    horizontal_abelian_trial, polydisc_sample, sample_rng, verify_sl2_decomposition, BoundRow, SampleResult,
};
use period_core::roots::{root_system, RootSystem};
use period_core::strong_orth::{
    centralizer_check, greedy_strongly_orthogonal, killing_norm, reduce_to_maximal_abelian, strongly_orthogonal,
    ReductionOptions, StrongOrthSet,
};

use crate::config::{FrameSpec, TrialConfig};

pub const WORKERS_ENV: &str = "PERIODLAB_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
    NotApplicable,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn glyph(self) -> &'static str {
        match self {
            Status::Pass => "✓",
            Status::Fail => "✗",
            Status::Indeterminate => "?",
            Status::NotApplicable => "-",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Indeterminate => "indeterminate",
            Status::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Measured quantity (residual, count, eigenvalue ...).
    pub value: Option<f64>,
    /// The bound the value is compared against.
    pub threshold: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub dims: BTreeMap<String, usize>,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub frame: FrameSpec,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub overall: Status,
    pub checks: Vec<Check>,
    /// Stages not run because an upstream structural check failed.
    pub skipped: Vec<String>,
    pub metrics: Metrics,
    pub provenance: Provenance,
    /// Polydisc rows for the bound CSV.
    #[serde(skip)]
    pub bound_rows: Vec<BoundRow>,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn counts(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for c in &self.checks {
            *out.entry(c.status.label()).or_insert(0) += 1;
        }
        out
    }

    pub fn bound_violations(&self) -> usize {
        self.metrics.values.get("polydisc.violations").map_or(0, |v| *v as usize)
    }
}

/// Worker count from the environment; `None` leaves the rayon default.
pub fn workers_from_env() -> anyhow::Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| anyhow::anyhow!("{WORKERS_ENV}: expected a positive integer, got `{v}`"))?;
            if n == 0 {
                anyhow::bail!("{WORKERS_ENV}: must be at least 1");
            }
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(anyhow::anyhow!("{WORKERS_ENV}: {e}")),
    }
}

pub fn thread_pool(workers: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

/// Disjoint stream ranges per phase on top of the per-sample streams.
fn stream(phase: u64, index: u64) -> u64 {
    (phase << 48) | index
}

const PHASE_FLAGS: u64 = 1;
const PHASE_REBASE: u64 = 2;
const PHASE_SL2: u64 = 3;
const PHASE_REDUCTION: u64 = 4;

struct Builder<'a> {
    cfg: &'a TrialConfig,
    checks: Vec<Check>,
    metrics: Metrics,
}

impl Builder<'_> {
    fn push(&mut self, name: &str, status: Status, value: Option<f64>, threshold: Option<f64>, detail: String) -> Status {
        self.checks.push(Check {
            name: name.to_string(),
            status,
            value,
            threshold,
            detail,
        });
        status
    }

    fn metric(&mut self, name: &str, v: f64) {
        self.metrics.values.insert(name.to_string(), v);
    }

    fn dim(&mut self, name: &str, v: usize) {
        self.metrics.dims.insert(name.to_string(), v);
    }
}

/// Runs every stage in order on the rayon default pool or `PERIODLAB_WORKERS` threads.
pub fn run_pipeline(cfg: &TrialConfig) -> anyhow::Result<VerificationReport> {
    cfg.validate()?;
    let pool = thread_pool(workers_from_env()?)?;
    pool.install(|| run_stages(cfg))
}

fn run_stages(cfg: &TrialConfig) -> anyhow::Result<VerificationReport> {
    let numbers = cfg.frame.numbers()?;
    let frame = build_reference_frame(&numbers);
    let mut b = Builder {
        cfg,
        checks: Vec::new(),
        metrics: Metrics::default(),
    };
    let mut skipped = Vec::new();
    let mut bound_rows = Vec::new();
    let stages = ["algebra", "roots", "strong_orth", "big_cell", "sl2", "polydisc", "reduction"];
    let skip_from = |skipped: &mut Vec<String>, stage: &str| {
        let k = stages.iter().position(|s| *s == stage).unwrap();
        skipped.extend(stages[k..].iter().map(|s| s.to_string()));
    };

    b.dim("m", frame.dim());
    if !frame_stage(&mut b, &frame)? {
        skip_from(&mut skipped, "algebra");
        return Ok(finish(b, skipped, bound_rows));
    }
    let alg = lie_algebra_basis(&frame);
    if !algebra_stage(&mut b, &alg)? {
        skip_from(&mut skipped, "roots");
        return Ok(finish(b, skipped, bound_rows));
    }
    let Some(rs) = roots_stage(&mut b, &alg) else {
        skip_from(&mut skipped, "strong_orth");
        return Ok(finish(b, skipped, bound_rows));
    };
    let sos = strong_orth_stage(&mut b, &rs);
    big_cell_stage(&mut b, &alg)?;
    if sos.r == 0 {
        for name in ["sl2.decomposition", "polydisc.bound", "polydisc.horizontal", "reduction.ad_k"] {
            b.push(name, Status::NotApplicable, None, None, "no noncompact roots".into());
        }
        return Ok(finish(b, skipped, bound_rows));
    }
    sl2_stage(&mut b, &sos)?;
    bound_rows = polydisc_stage(&mut b, &alg, &sos);
    reduction_stage(&mut b, &alg, &rs, &sos)?;
    Ok(finish(b, skipped, bound_rows))
}

fn finish(b: Builder<'_>, skipped: Vec<String>, bound_rows: Vec<BoundRow>) -> VerificationReport {
    let overall = if b.checks.iter().any(|c| c.status == Status::Fail) || !skipped.is_empty() {
        Status::Fail
    } else if b.checks.iter().any(|c| c.status == Status::Indeterminate) {
        Status::Indeterminate
    } else {
        Status::Pass
    };
    VerificationReport {
        overall,
        checks: b.checks,
        skipped,
        metrics: b.metrics,
        provenance: Provenance {
            config_hash: b.cfg.hash(),
            seed: b.cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            frame: b.cfg.frame.clone(),
            tolerances: b.cfg.effective_tolerances(),
        },
        bound_rows,
    }
}

fn frame_stage(b: &mut Builder<'_>, frame: &HodgeFrame) -> anyhow::Result<bool> {
    let nums = frame.numbers();
    let n = nums.weight();
    let blocks = frame.block_sparsity();
    let sparse_ok = blocks.len() == nums.num_blocks() && blocks.iter().all(|&(a, c)| a + c == n);
    let s1 = b.push(
        "frame.hr1_sparsity",
        Status::from_bool(sparse_ok),
        Some(blocks.len() as f64),
        None,
        format!("nonzero Q blocks {blocks:?}"),
    );
    let h = to_cmat(&frame.hermitian_form());
    let min_eig = hermitian_min_eig(&h);
    let thr = b.cfg.tol("hr_min_eigenvalue");
    let s2 = b.push(
        "frame.hr2_positivity",
        Status::from_bool(min_eig > thr),
        Some(min_eig),
        Some(thr),
        "smallest eigenvalue of Q(C., conj .)".into(),
    );
    let verdict = check_hodge_riemann(frame, &frame.base_flag())?;
    let s3 = b.push(
        "frame.base_point",
        Status::from_bool(verdict == HodgeRiemannVerdict::InD),
        None,
        None,
        format!("{verdict:?}"),
    );
    Ok([s1, s2, s3].iter().all(|s| *s == Status::Pass))
}

fn algebra_stage(b: &mut Builder<'_>, alg: &GradedLieAlgebra) -> anyhow::Result<bool> {
    let d = alg.dim();
    b.dim("g", d);
    b.dim("h", alg.rank());
    let (k0, p0) = alg.real_form_dims();
    b.dim("k0", k0);
    b.dim("p0", p0);
    let elems: Vec<CMat> = (0..d).map(|j| alg.element(j)).collect();
    let brackets: Vec<Vec<CMat>> = elems.iter().map(|x| elems.iter().map(|y| commutator(x, y)).collect()).collect();

    let s1 = b.push(
        "algebra.closure",
        Status::from_bool(alg.closure_failures() == 0 && k0 + p0 == d),
        Some(alg.closure_failures() as f64),
        None,
        format!("dim g = {d}, dim k0 = {k0}, dim p0 = {p0}"),
    );

    let jacobi: f64 = (0..d)
        .into_par_iter()
        .map(|i| {
            let mut worst: f64 = 0.0;
            for j in 0..d {
                for k in 0..d {
                    let r = commutator(&elems[i], &brackets[j][k])
                        + commutator(&elems[j], &brackets[k][i])
                        + commutator(&elems[k], &brackets[i][j]);
                    worst = worst.max(max_abs(&r));
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let thr = b.cfg.tol("jacobi");
    b.metric("algebra.jacobi", jacobi);
    let s2 = b.push(
        "algebra.jacobi",
        Status::from_bool(jacobi <= thr),
        Some(jacobi),
        Some(thr),
        "all basis triples".into(),
    );

    let mut leak: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let want = alg.basis()[i].degree + alg.basis()[j].degree;
            for (k, part) in alg.grade(&brackets[i][j])? {
                if k != want {
                    leak = leak.max(max_abs(&part));
                }
            }
        }
    }
    let s3 = b.push(
        "algebra.grading",
        Status::from_bool(leak <= 1e-12),
        Some(leak),
        Some(1e-12),
        "[g^k, g^l] inside g^(k+l)".into(),
    );

    let gram = alg.killing_gram(&alg.compact_form_basis());
    let max_eig = symmetric_max_eig(&gram);
    let thr = b.cfg.tol("killing_definite");
    b.metric("algebra.killing_max_eigenvalue", max_eig);
    let s4 = b.push(
        "algebra.compact_form",
        Status::from_bool(max_eig < -thr),
        Some(max_eig),
        Some(-thr),
        "largest Killing eigenvalue on g_c".into(),
    );
    Ok([s1, s2, s3, s4].iter().all(|s| *s == Status::Pass))
}

fn roots_stage(b: &mut Builder<'_>, alg: &GradedLieAlgebra) -> Option<RootSystem> {
    let rs = match root_system(alg) {
        Ok(rs) => rs,
        Err(e) => {
            b.push("roots.decomposition", Status::Fail, None, None, e.to_string());
            return None;
        }
    };
    let d = alg.dim();
    b.dim("roots", rs.len());
    b.dim("roots.compact", rs.roots.iter().filter(|r| r.compact).count());
    b.dim("roots.noncompact_positive", rs.noncompact_positive().len());
    b.push(
        "roots.decomposition",
        Status::from_bool(d == alg.rank() + rs.len()),
        Some(rs.len() as f64),
        None,
        format!("dim g = {d} = {} + {}, all root spaces one-dimensional", alg.rank(), rs.len()),
    );
    let mut impure = 0;
    for r in &rs.roots {
        let live = alg
            .grade(&r.vector)
            .map(|parts| parts.iter().filter(|(_, p)| max_abs(p) > 1e-12).map(|(k, _)| *k).collect::<Vec<_>>());
        if live.ok() != Some(vec![r.hodge_degree]) {
            impure += 1;
        }
    }
    b.push(
        "roots.purity",
        Status::from_bool(impure == 0),
        Some(impure as f64),
        None,
        "every root vector lies in a single g^(k,-k)".into(),
    );
    let rep = rs.check_sum_relations(alg);
    let v = rep.violations();
    b.metric("roots.sum_relation_violations", v as f64);
    let detail = if v == 0 {
        format!("{} ordered pairs scanned", rep.pairs_checked)
    } else {
        format!(
            "{} violations (first: r1 {:?} r2 {:?} r3 {:?} r4 {:?}){}",
            v,
            rep.r1.first(),
            rep.r2.first(),
            rep.r3.first(),
            rep.r4.first(),
            if rs.central_direction.is_none() { "; no compatible ordering exists" } else { "" }
        )
    };
    b.push("roots.sum_relations", Status::from_bool(v == 0), Some(v as f64), Some(0.0), detail);
    let w = rs.check_weyl_basis(alg);
    let worst = [
        w.max_conjugation_residual,
        w.max_coroot_residual,
        w.max_eigen_residual,
        w.max_serre_residual,
        w.max_imaginary,
        w.max_antisymmetry,
        w.max_non_root_bracket,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let ok = w.first_failure.is_none();
    let detail = match &w.first_failure {
        None => format!("{} Serre constants", rs.serre_constants.len()),
        Some((root, why)) => format!("root {root}: {why}"),
    };
    b.push("roots.weyl_basis", Status::from_bool(ok), Some(worst), None, detail);
    ok.then_some(rs)
}

/// Exhaustive maximum over subsets of the positive noncompact roots.
pub fn brute_force_strongly_orthogonal(rs: &RootSystem) -> Option<usize> {
    let cand = rs.noncompact_positive();
    if cand.len() > 20 {
        return None;
    }
    let set: HashSet<&Vec<Rational>> = rs.roots.iter().map(|r| &r.coords).collect();
    let zero = Rational::from_integer(0);
    let compatible = |a: usize, b: usize| {
        let (x, y) = (&rs.roots[a].coords, &rs.roots[b].coords);
        let s: Vec<Rational> = x.iter().zip(y).map(|(p, q)| p + q).collect();
        let t: Vec<Rational> = x.iter().zip(y).map(|(p, q)| p - q).collect();
        !set.contains(&s) && !set.contains(&t) && s.iter().any(|v| *v != zero) && t.iter().any(|v| *v != zero)
    };
    let mut best = 0;
    for mask in 0u32..(1 << cand.len()) {
        let n = mask.count_ones() as usize;
        if n <= best {
            continue;
        }
        let idx: Vec<usize> = (0..cand.len()).filter(|k| mask >> k & 1 == 1).collect();
        if idx.iter().enumerate().all(|(p, &a)| idx[p + 1..].iter().all(|&c| compatible(cand[a], cand[c]))) {
            best = n;
        }
    }
    Some(best)
}

fn strong_orth_stage(b: &mut Builder<'_>, rs: &RootSystem) -> StrongOrthSet {
    let sos = greedy_strongly_orthogonal(rs);
    b.dim("r", sos.r);
    match brute_force_strongly_orthogonal(rs) {
        Some(best) => b.push(
            "strong_orth.rank",
            Status::from_bool(best == sos.r),
            Some(sos.r as f64),
            Some(best as f64),
            format!("greedy r = {}, exhaustive maximum = {best}", sos.r),
        ),
        None => b.push(
            "strong_orth.rank",
            Status::NotApplicable,
            Some(sos.r as f64),
            None,
            "too many candidates for exhaustive search".into(),
        ),
    };
    let maximal = rs
        .noncompact_positive()
        .iter()
        .filter(|c| !sos.lambda.contains(c))
        .all(|&c| sos.lambda.iter().any(|&l| !strongly_orthogonal(rs, l, c)));
    b.push(
        "strong_orth.maximal",
        Status::from_bool(maximal),
        None,
        None,
        format!("lambda = {:?}, oriented degrees {:?}", sos.lambda, sos.oriented_degrees),
    );
    let c = centralizer_check(rs, &sos);
    b.push(
        "strong_orth.centralizer",
        Status::from_bool(c.pass),
        Some(c.dim as f64),
        Some(sos.r as f64),
        format!("centralizer of A0 in p0 has dimension {}, commutators {:.1e}", c.dim, c.commutator_residual),
    );
    sos
}

fn random_block_upper<R: Rng>(nums: &period_core::hodge::HodgeNumbers, rng: &mut R) -> CMat {
    let m = nums.dim();
    CMat::from_fn(m, m, |r, c| {
        let (br, bc) = (nums.block_of(r), nums.block_of(c));
        if bc < br {
            return Complex64::new(0.0, 0.0);
        }
        let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if r == c {
            z + Complex64::new(2.0, 0.0)
        } else {
            z
        }
    })
}

fn big_cell_stage(b: &mut Builder<'_>, alg: &GradedLieAlgebra) -> anyhow::Result<()> {
    let nums = alg.frame().numbers().clone();
    let seed = b.cfg.seed;
    let kinds = [FlagKind::Unipotent, FlagKind::Gaussian, FlagKind::Permuted];
    // (agree, indeterminate, member, rebasing residual)
    let results: Vec<(bool, bool, bool, f64)> = (0..b.cfg.flag_samples as u64)
        .into_par_iter()
        .map(|idx| -> anyhow::Result<_> {
            let mut rng = sample_rng(seed, stream(PHASE_FLAGS, idx));
            let flag = random_flag(&nums, kinds[idx as usize % kinds.len()], &[], &mut rng)?;
            let rep = membership_in_big_cell(&nums, &flag);
            let oracle = rank_membership(&nums, &flag);
            let indeterminate = matches!(rep.status, Membership::Indeterminate { .. });
            let agree = indeterminate || rep.is_member() == oracle;
            let mut resid = 0.0;
            if rep.is_member() {
                let base = cell_coordinate(&nums, &flag)?;
                let mut rng = sample_rng(seed, stream(PHASE_REBASE, idx));
                let u = random_block_upper(&nums, &mut rng);
                let moved = cell_coordinate(&nums, &FlagPoint::new(&nums, flag.basis() * u)?)?;
                resid = max_abs(&(&moved.l - &base.l)) / max_abs(&base.l).max(1.0);
            }
            Ok((agree, indeterminate, rep.is_member(), resid))
        })
        .collect::<anyhow::Result<_>>()?;
    let n = results.len();
    let agree = results.iter().filter(|r| r.0).count();
    let indet = results.iter().filter(|r| r.1).count();
    let members = results.iter().filter(|r| r.2).count();
    let status = if agree < n {
        Status::Fail
    } else if indet > 0 {
        Status::Indeterminate
    } else {
        Status::Pass
    };
    b.metric("big_cell.agreement", agree as f64 / n.max(1) as f64);
    b.push(
        "big_cell.equivalence",
        status,
        Some((agree - indet) as f64),
        Some(n as f64),
        format!("{agree}/{n} agree with the rank oracle, {members} members, {indet} indeterminate"),
    );
    let worst = results.iter().map(|r| r.3).fold(0.0, f64::max);
    let thr = b.cfg.tol("l_uniqueness");
    b.metric("big_cell.l_uniqueness", worst);
    b.push(
        "big_cell.l_uniqueness",
        Status::from_bool(worst <= thr),
        Some(worst),
        Some(thr),
        format!("{members} member flags re-based by block upper matrices"),
    );
    Ok(())
}

fn sl2_stage(b: &mut Builder<'_>, sos: &StrongOrthSet) -> anyhow::Result<()> {
    let seed = b.cfg.seed;
    let radius = b.cfg.z_radius;
    let worst = (0..b.cfg.sl2_samples as u64)
        .into_par_iter()
        .map(|idx| -> anyhow::Result<f64> {
            let mut rng = sample_rng(seed, stream(PHASE_SL2, idx));
            let rho = radius * rng.random::<f64>().sqrt();
            let arg = rng.random_range(0.0..std::f64::consts::TAU);
            let z = Complex64::from_polar(rho, arg);
            let mut worst: f64 = 0.0;
            for i in 0..sos.r {
                worst = worst.max(verify_sl2_decomposition(sos, i, z)?.residual);
            }
            Ok(worst)
        })
        .collect::<anyhow::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let thr = b.cfg.tol("sl2");
    b.metric("sl2.max_residual", worst);
    b.push(
        "sl2.decomposition",
        Status::from_bool(worst <= thr),
        Some(worst),
        Some(thr),
        format!("{} random z with |z| <= {radius}, every triple", b.cfg.sl2_samples),
    );
    Ok(())
}

fn violation_summary(res: &SampleResult) -> String {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for v in &res.violations {
        *counts.entry(format!("{:?}", v.kind)).or_insert(0) += 1;
    }
    let first = res
        .violations
        .first()
        .map(|v| format!("; first: sample {} t {} {:?} value {}", v.sample_id, v.t, v.kind, v.value))
        .unwrap_or_default();
    format!("{counts:?}{first}")
}

fn polydisc_stage(b: &mut Builder<'_>, alg: &GradedLieAlgebra, sos: &StrongOrthSet) -> Vec<BoundRow> {
    let pcfg = b.cfg.polydisc();
    let parts: Vec<SampleResult> = (0..pcfg.samples as u64)
        .into_par_iter()
        .map(|id| polydisc_sample(alg, sos, &pcfg, id))
        .collect();
    let mut res = SampleResult::default();
    for p in parts {
        res.merge(p);
    }
    let bound = (sos.r as f64).sqrt() + pcfg.distance_tol;
    b.metric("polydisc.max_abs_coord", res.max_abs_coord);
    b.metric("polydisc.max_d_E", res.max_d_e);
    b.metric("polydisc.max_tanh_error", res.max_tanh_error);
    b.metric("polydisc.max_q_residual", res.max_q_residual);
    b.metric("polydisc.violations", res.violations.len() as f64);
    let detail = if res.violations.is_empty() {
        format!(
            "{} samples x {} t values, max |coord| {:.12}, max d_E {:.12}",
            pcfg.samples,
            pcfg.t_grid.len(),
            res.max_abs_coord,
            res.max_d_e
        )
    } else {
        violation_summary(&res)
    };
    b.push(
        "polydisc.bound",
        Status::from_bool(res.violations.is_empty()),
        Some(res.max_d_e),
        Some(bound),
        detail,
    );
    let mut hcfg = pcfg.clone();
    hcfg.samples = pcfg.samples.min(100);
    let h = horizontal_abelian_trial(alg, sos, &hcfg);
    if h.applicable {
        let bad = h.result.violations.len();
        let horizontal_ok = h
            .horizontal_roots
            .iter()
            .all(|&i| alg.is_horizontal(&sos.oriented_triples[i].e).unwrap_or(false));
        b.push(
            "polydisc.horizontal",
            Status::from_bool(bad == 0 && horizontal_ok),
            Some(bad as f64),
            Some(0.0),
            format!("horizontal members of lambda at positions {:?}", h.horizontal_roots),
        );
    } else {
        b.push(
            "polydisc.horizontal",
            Status::NotApplicable,
            None,
            None,
            "no member of lambda lies in g^(-1,1)".into(),
        );
    }
    res.rows
}

fn reduction_stage(
    b: &mut Builder<'_>,
    alg: &GradedLieAlgebra,
    rs: &RootSystem,
    sos: &StrongOrthSet,
) -> anyhow::Result<()> {
    let seed = b.cfg.seed;
    let range = b.cfg.lambda_range;
    let tol = b.cfg.tol("reduction");
    let norm_tol = b.cfg.tol("killing_norm");
    let m = alg.frame().dim();
    let k0 = rs.k0_basis(alg);
    let trials = b.cfg.reduction_trials;
    // (success, norm error)
    let results: Vec<(bool, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|idx| -> anyhow::Result<(bool, f64)> {
            let mut rng = sample_rng(seed, stream(PHASE_REDUCTION, idx));
            let mut y = CMat::zeros(m, m);
            for x in &sos.x_basis {
                y += x * Complex64::new(rng.random_range(-range..range), 0.0);
            }
            let mut z = CMat::zeros(m, m);
            for k in &k0 {
                z += k * Complex64::new(rng.random_range(-0.5..0.5), 0.0);
            }
            let g = expm(&z)?;
            let x = &g * &y * g.adjoint();
            let opts = ReductionOptions {
                tolerance: tol,
                seed: idx,
                ..ReductionOptions::default()
            };
            let red = reduce_to_maximal_abelian(alg, rs, sos, &x, &opts)?;
            if red.residual > tol {
                return Ok((false, 0.0));
            }
            let nx = killing_norm(alg, &x)?;
            let err = (killing_norm(alg, &red.y)? - nx).abs() / nx.max(1.0);
            Ok((true, err))
        })
        .collect::<anyhow::Result<_>>()?;
    let ok = results.iter().filter(|r| r.0).count();
    let rate = ok as f64 / trials.max(1) as f64;
    let need = b.cfg.tol("reduction_success");
    let norm_err = results.iter().filter(|r| r.0).map(|r| r.1).fold(0.0, f64::max);
    b.metric("reduction.success_rate", rate);
    b.metric("reduction.killing_norm_error", norm_err);
    b.push(
        "reduction.ad_k",
        Status::from_bool(rate >= need && norm_err <= norm_tol),
        Some(rate),
        Some(need),
        format!("{ok}/{trials} recovered within {tol:e}, Killing norm error {norm_err:.1e}"),
    );
    Ok(())
}

/// Polydisc trial alone, for the `bound` subcommand.
pub fn run_bound(cfg: &TrialConfig) -> anyhow::Result<(Vec<BoundRow>, crate::formats::BoundSummary)> {
    cfg.validate()?;
    let pool = thread_pool(workers_from_env()?)?;
    pool.install(|| {
        let frame = build_reference_frame(&cfg.frame.numbers()?);
        let alg = lie_algebra_basis(&frame);
        let rs = root_system(&alg)?;
        let sos = greedy_strongly_orthogonal(&rs);
        let pcfg = cfg.polydisc();
        let parts: Vec<SampleResult> = (0..pcfg.samples as u64)
            .into_par_iter()
            .map(|id| polydisc_sample(&alg, &sos, &pcfg, id))
            .collect();
        let mut res = SampleResult::default();
        for p in parts {
            res.merge(p);
        }
        let summary = crate::formats::BoundSummary {
            max_abs_coord: res.max_abs_coord,
            max_d_e: res.max_d_e,
            violations: res.violations.len(),
            config_hash: cfg.hash(),
        };
        Ok((res.rows, summary))
    })
}
