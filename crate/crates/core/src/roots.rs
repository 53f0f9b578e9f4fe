//! Root system of `g` relative to the diagonal Cartan subalgebra: exact root
//! coordinates, lexicographic positivity, root-sum relations and Weyl-basis
//! normalization.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::{Float, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{nullspace, q, rank, solve_in_span, Rational};
use crate::lie::{ElementKind, GradedLieAlgebra};
use crate::numeric::{commutator, frob, max_abs, CMat};

#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    /// Basis index of the structural root vector in the algebra.
    pub index: usize,
    /// `phi(h_p)` for the Cartan basis `h_p`.
    pub coords: Vec<Rational>,
    pub hodge_degree: i32,
    pub compact: bool,
    pub positive: bool,
    /// Root vector `e_phi` (structural until normalized).
    pub vector: CMat,
    /// Position of `-phi` in the root list.
    pub negative: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerreConstant {
    pub alpha: usize,
    pub beta: usize,
    pub sum: usize,
    pub value: Complex64,
}

#[derive(Debug, Clone)]
pub struct RootSystem {
    pub roots: Vec<Root>,
    pub rank: usize,
    /// Roots defining the lexicographic order.
    pub order_basis: Vec<usize>,
    /// Central direction of `k` inside `h` used to pick the order, when it exists.
    pub central_direction: Option<Vec<Rational>>,
    /// Killing duals `t_i` (Cartan coordinates) of the order basis roots.
    pub cartan_duals: Vec<Vec<Rational>>,
    pub simple: Vec<usize>,
    pub coroots: Vec<CMat>,
    pub serre_constants: Vec<SerreConstant>,
    pub normalized: bool,
    killing_h: Vec<Vec<Rational>>,
    grading: Vec<Rational>,
    cartan_leads: Vec<usize>,
    leads: Vec<(usize, usize)>,
    lookup: BTreeMap<Vec<Rational>, usize>,
}

fn neg(v: &[Rational]) -> Vec<Rational> {
    v.iter().map(|x| -*x).collect()
}

fn add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(q(0), |acc, (x, y)| acc + *x * *y)
}

fn first_sign(v: &[Rational]) -> i32 {
    v.iter()
        .find(|x| !x.is_zero())
        .map_or(0, |x| if x.is_positive() { 1 } else { -1 })
}

/// Simultaneous `ad(h)` eigenvectors among the structural basis.
pub fn compute_roots(algebra: &GradedLieAlgebra) -> Result<RootSystem> {
    let rank = algebra.rank();
    if rank == 0 {
        return Err(Error::TrivialCartan);
    }
    let mut roots = Vec::new();
    let mut lookup = BTreeMap::new();
    for (j, b) in algebra.basis().iter().enumerate() {
        if b.kind != ElementKind::Root {
            continue;
        }
        if b.weight.iter().any(|&w| w == i64::MIN) {
            return Err(Error::NotEigenvector { index: j });
        }
        for p in 0..rank {
            let expect = b.mat.scale(crate::exact::gq(b.weight[p], 0));
            let got = algebra.basis()[p].mat.bracket(&b.mat);
            if !got.add(&expect.scale(crate::exact::gq(-1, 0))).is_zero() {
                return Err(Error::NotEigenvector { index: j });
            }
        }
        let coords: Vec<Rational> = b.weight.iter().map(|&w| q(w)).collect();
        if coords.iter().all(|x| x.is_zero()) || lookup.contains_key(&coords) {
            let dim = algebra
                .basis()
                .iter()
                .filter(|o| o.kind == ElementKind::Root && o.weight == b.weight)
                .count();
            return Err(Error::DegenerateRootSpace {
                weight: GradedLieAlgebra::describe_weight(&b.weight),
                dim,
            });
        }
        lookup.insert(coords.clone(), roots.len());
        roots.push(Root {
            index: j,
            coords,
            hodge_degree: b.degree,
            compact: b.degree % 2 == 0,
            positive: false,
            vector: algebra.element(j),
            negative: usize::MAX,
        });
    }
    for i in 0..roots.len() {
        let n = lookup.get(&neg(&roots[i].coords)).copied().ok_or_else(|| Error::Normalization {
            root: i,
            reason: String::from("negative root missing"),
        })?;
        roots[i].negative = n;
    }
    let killing_h: Vec<Vec<Rational>> = (0..rank)
        .map(|a| (0..rank).map(|b| algebra.killing_matrix()[(a, b)].re).collect())
        .collect();
    let leads = roots.iter().map(|r| algebra.basis()[r.index].lead).collect();
    Ok(RootSystem {
        roots,
        rank,
        order_basis: Vec::new(),
        central_direction: None,
        cartan_duals: Vec::new(),
        simple: Vec::new(),
        coroots: Vec::new(),
        serre_constants: Vec::new(),
        normalized: false,
        killing_h,
        grading: algebra.grading_coords(),
        cartan_leads: algebra.cartan_pairs().iter().map(|p| p.0).collect(),
        leads,
        lookup,
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SumRelationReport {
    pub pairs_checked: usize,
    /// `(k-root, p-root)` whose sum is a root of the wrong sign.
    pub r1: Vec<(usize, usize)>,
    /// Two same-sign noncompact roots summing to a root.
    pub r2: Vec<(usize, usize)>,
    /// `[k, p±]` leaving `p±` (basis index, root index).
    pub r3: Vec<(usize, usize)>,
    /// Nonzero `[p±, p±]` brackets.
    pub r4: Vec<(usize, usize)>,
    pub max_bracket_residual: f64,
}

impl SumRelationReport {
    pub fn violations(&self) -> usize {
        self.r1.len() + self.r2.len() + self.r3.len() + self.r4.len()
    }
}

impl RootSystem {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn find(&self, coords: &[Rational]) -> Option<usize> {
        self.lookup.get(coords).copied()
    }

    pub fn noncompact_positive(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.roots[i].positive && !self.roots[i].compact)
            .collect()
    }

    /// Killing inner product on `h*`, when the Killing form is nondegenerate on `h`.
    pub fn inner(&self, a: &[Rational], b: &[Rational]) -> Option<Rational> {
        let basis: Vec<Vec<Rational>> = (0..self.rank)
            .map(|c| (0..self.rank).map(|r| self.killing_h[r][c]).collect())
            .collect();
        let t = solve_in_span(&basis, b)?;
        Some(dot(a, &t))
    }

    /// Coordinates of a functional in the order basis.
    pub fn order_coords(&self, v: &[Rational]) -> Option<Vec<Rational>> {
        let basis: Vec<Vec<Rational>> = self
            .order_basis
            .iter()
            .map(|&i| self.roots[i].coords.clone())
            .collect();
        solve_in_span(&basis, v)
    }

    /// `a < b` in the lexicographic order.
    pub fn less(&self, a: usize, b: usize) -> bool {
        let d = sub(&self.roots[b].coords, &self.roots[a].coords);
        self.order_coords(&d).is_some_and(|c| first_sign(&c) > 0)
    }

    fn central_direction_of(&self) -> Option<Vec<Rational>> {
        let rows: Vec<Vec<Rational>> = self
            .roots
            .iter()
            .filter(|r| r.compact)
            .map(|r| r.coords.clone())
            .collect();
        let ns = nullspace(&rows, self.rank);
        let z = match ns.len() {
            0 => return None,
            1 => ns[0].clone(),
            _ => {
                // Project the grading element onto the center in the Killing metric.
                let g: Vec<Rational> = self.grading.clone();
                let kmul = |v: &[Rational]| -> Vec<Rational> {
                    (0..self.rank)
                        .map(|r| (0..self.rank).fold(q(0), |acc, c| acc + self.killing_h[r][c] * v[c]))
                        .collect()
                };
                let kn: Vec<Vec<Rational>> = ns.iter().map(|v| kmul(v)).collect();
                let gram: Vec<Vec<Rational>> = (0..ns.len())
                    .map(|c| (0..ns.len()).map(|r| dot(&ns[r], &kn[c])).collect())
                    .collect();
                let rhs: Vec<Rational> = (0..ns.len()).map(|r| dot(&ns[r], &kmul(&g))).collect();
                let coef = solve_in_span(&gram, &rhs)?;
                let mut z = vec![q(0); self.rank];
                for (v, cf) in ns.iter().zip(&coef) {
                    for (zi, vi) in z.iter_mut().zip(v) {
                        *zi += *vi * *cf;
                    }
                }
                z
            }
        };
        let p_values: Vec<Rational> = self
            .roots
            .iter()
            .filter(|r| !r.compact)
            .map(|r| dot(&r.coords, &z))
            .collect();
        if p_values.iter().any(|v| v.is_zero()) {
            return None;
        }
        match p_values.first() {
            Some(v) if v.is_negative() => Some(neg(&z)),
            Some(_) => Some(z),
            None => None,
        }
    }

    /// Fixes the lexicographic order: a maximal independent subset of
    /// noncompact roots followed by compact roots.
    pub fn set_lexicographic_order(mut self) -> Self {
        let p_roots: Vec<usize> = (0..self.len()).filter(|&i| !self.roots[i].compact).collect();
        let k_roots: Vec<usize> = (0..self.len()).filter(|&i| self.roots[i].compact).collect();
        let coords = |ids: &[usize]| -> Vec<Vec<Rational>> {
            ids.iter().map(|&i| self.roots[i].coords.clone()).collect()
        };
        let p_rank = rank(&coords(&p_roots));
        let z = self.central_direction_of();

        let mut chosen: Vec<usize> = Vec::new();
        if let Some(z) = &z {
            for &g in &p_roots {
                if chosen.len() == p_rank {
                    break;
                }
                if !dot(&self.roots[g].coords, z).is_positive() {
                    continue;
                }
                let mut trial = chosen.clone();
                trial.push(g);
                if rank(&coords(&trial)) != trial.len() {
                    continue;
                }
                let basis = coords(&trial);
                let consistent = p_roots.iter().all(|&d| match solve_in_span(&basis, &self.roots[d].coords) {
                    Some(c) => first_sign(&c) == if dot(&self.roots[d].coords, z).is_positive() { 1 } else { -1 },
                    None => true,
                });
                if consistent {
                    chosen = trial;
                }
            }
        }
        if chosen.len() < p_rank {
            self.central_direction = None;
            chosen.clear();
            for &g in &p_roots {
                let mut trial = chosen.clone();
                trial.push(g);
                if rank(&coords(&trial)) == trial.len() {
                    chosen = trial;
                }
            }
        } else {
            self.central_direction = z;
        }
        for &g in &k_roots {
            let mut trial = chosen.clone();
            trial.push(g);
            if rank(&coords(&trial)) == trial.len() {
                chosen = trial;
            }
        }
        self.order_basis = chosen;
        for i in 0..self.len() {
            let c = self.order_coords(&self.roots[i].coords).unwrap_or_default();
            self.roots[i].positive = first_sign(&c) > 0;
        }
        self.cartan_duals = self
            .order_basis
            .iter()
            .map(|&i| {
                let basis: Vec<Vec<Rational>> = (0..self.rank)
                    .map(|c| (0..self.rank).map(|r| self.killing_h[r][c]).collect())
                    .collect();
                solve_in_span(&basis, &self.roots[i].coords).unwrap_or_default()
            })
            .collect();
        self
    }

    /// Exhaustive check of the root-sum relations for the chosen order.
    pub fn check_sum_relations(&self, algebra: &GradedLieAlgebra) -> SumRelationReport {
        let mut rep = SumRelationReport::default();
        let n = self.len();
        for a in 0..n {
            for b in 0..n {
                rep.pairs_checked += 1;
                let (ra, rb) = (&self.roots[a], &self.roots[b]);
                let sum = self.find(&add(&ra.coords, &rb.coords));
                if ra.compact && !rb.compact {
                    if let Some(s) = sum {
                        let rs = &self.roots[s];
                        if rs.compact || rs.positive != rb.positive {
                            rep.r1.push((a, b));
                        }
                    }
                }
                if !ra.compact && !rb.compact && ra.positive == rb.positive && sum.is_some() {
                    rep.r2.push((a, b));
                }
            }
        }
        // Bracket-level relations on the structural basis, exactly.
        let p_sign = |j: usize| -> Option<bool> {
            let b = &algebra.basis()[j];
            if b.kind != ElementKind::Root || b.degree % 2 == 0 {
                return None;
            }
            self.roots.iter().find(|r| r.index == j).map(|r| r.positive)
        };
        for i in 0..algebra.dim() {
            let even = algebra.basis()[i].degree % 2 == 0;
            for (ri, r) in self.roots.iter().enumerate() {
                if r.compact {
                    continue;
                }
                let j = r.index;
                let terms = algebra.structure_constants(i, j);
                if even {
                    if terms.iter().any(|&(t, _)| p_sign(t) != Some(r.positive)) {
                        rep.r3.push((i, ri));
                    }
                } else if p_sign(i) == Some(r.positive) && !terms.is_empty() {
                    rep.r4.push((i, ri));
                }
            }
        }
        for a in 0..n {
            for b in a..n {
                let (ra, rb) = (&self.roots[a], &self.roots[b]);
                if !ra.compact && !rb.compact && ra.positive == rb.positive {
                    let br = commutator(&ra.vector, &rb.vector);
                    rep.max_bracket_residual = rep.max_bracket_residual.max(max_abs(&br));
                }
            }
        }
        rep
    }

    /// `phi(h)` for a diagonal `h` in the Cartan subalgebra.
    pub fn evaluate(&self, root: usize, h: &CMat) -> Complex64 {
        (0..self.rank)
            .map(|p| {
                let lead = self.cartan_leads[p];
                h[(lead, lead)] * crate::exact::rat_to_f64(&self.roots[root].coords[p])
            })
            .sum()
    }

    /// Component of `x` along `e_root`, read at the structural lead entry.
    pub fn coefficient(&self, root: usize, x: &CMat) -> Complex64 {
        let lead = self.leads[root];
        x[lead] / self.roots[root].vector[lead]
    }

    fn set_vector(&mut self, root: usize, e: CMat) {
        let neg = self.roots[root].negative;
        self.roots[neg].vector = e.adjoint();
        self.roots[root].vector = e;
    }

    /// Rescales and rephases the root vectors so that `e_{-phi} = e_phi^*`,
    /// `phi([e_phi, e_{-phi}]) = 2` and the Serre constants are real.
    pub fn normalize_weyl_basis(mut self, algebra: &GradedLieAlgebra) -> Result<Self> {
        let n = self.len();
        let positive: Vec<usize> = (0..n).filter(|&i| self.roots[i].positive).collect();
        for &i in &positive {
            let e = algebra.element(self.roots[i].index);
            let h = commutator(&e, &e.adjoint());
            let kappa = self.evaluate(i, &h);
            if !(kappa.re > 0.0) || kappa.im.abs() > 1e-12 {
                return Err(Error::Normalization {
                    root: i,
                    reason: alloc::format!("phi([e, e*]) = {kappa}"),
                });
            }
            let s = Float::sqrt(2.0 / kappa.re);
            self.set_vector(i, e * Complex64::new(s, 0.0));
        }

        let is_sum = |g: usize| {
            positive.iter().any(|&a| {
                self.find(&sub(&self.roots[g].coords, &self.roots[a].coords))
                    .is_some_and(|b| self.roots[b].positive)
            })
        };
        let simple: Vec<usize> = positive.iter().copied().filter(|&g| !is_sum(g)).collect();
        let mut level: BTreeMap<usize, usize> = simple.iter().map(|&s| (s, 1)).collect();
        let mut current = 1;
        loop {
            let mut progress = Vec::new();
            for &g in &positive {
                if level.contains_key(&g) {
                    continue;
                }
                let split = simple.iter().find_map(|&a| {
                    let b = self.find(&sub(&self.roots[g].coords, &self.roots[a].coords))?;
                    (level.get(&b) == Some(&current)).then_some((a, b))
                });
                if let Some((a, b)) = split {
                    progress.push((g, a, b));
                }
            }
            if progress.is_empty() {
                break;
            }
            current += 1;
            for (g, a, b) in progress {
                level.insert(g, current);
                let br = commutator(&self.roots[a].vector, &self.roots[b].vector);
                let nab = self.coefficient(g, &br);
                if nab.norm() < 1e-12 {
                    return Err(Error::Normalization {
                        root: g,
                        reason: String::from("vanishing structure constant"),
                    });
                }
                let e = &self.roots[g].vector * (nab / nab.norm());
                self.set_vector(g, e);
            }
        }
        self.simple = simple;
        self.coroots = (0..n)
            .map(|i| commutator(&self.roots[i].vector, &self.roots[self.roots[i].negative].vector))
            .collect();
        self.serre_constants.clear();
        for a in 0..n {
            for b in 0..n {
                if let Some(s) = self.find(&add(&self.roots[a].coords, &self.roots[b].coords)) {
                    let br = commutator(&self.roots[a].vector, &self.roots[b].vector);
                    self.serre_constants.push(SerreConstant {
                        alpha: a,
                        beta: b,
                        sum: s,
                        value: self.coefficient(s, &br),
                    });
                }
            }
        }
        self.normalized = true;
        let report = self.check_weyl_basis(algebra);
        if let Some((root, reason)) = report.first_failure {
            return Err(Error::Normalization { root, reason });
        }
        Ok(self)
    }

    /// Postconditions of the Weyl basis.
    pub fn check_weyl_basis(&self, algebra: &GradedLieAlgebra) -> WeylReport {
        let mut rep = WeylReport::default();
        let fail = |root: usize, what: &str, rep: &mut WeylReport| {
            if rep.first_failure.is_none() {
                rep.first_failure = Some((root, String::from(what)));
            }
        };
        for (i, r) in self.roots.iter().enumerate() {
            let e = &r.vector;
            let e_neg = &self.roots[r.negative].vector;
            let t = algebra.conj_real_unchecked(e);
            let target = if r.compact { -e_neg } else { e_neg.clone() };
            let res = frob(&(&t - &target));
            rep.max_conjugation_residual = rep.max_conjugation_residual.max(res);
            if res > 1e-10 {
                fail(i, "conjugation relation", &mut rep);
            }
            let two = self.evaluate(i, &self.coroots[i]);
            let res = (two - Complex64::new(2.0, 0.0)).norm();
            rep.max_coroot_residual = rep.max_coroot_residual.max(res);
            if res > 1e-10 {
                fail(i, "coroot normalization", &mut rep);
            }
            for (p, h) in algebra.cartan().iter().enumerate() {
                let lhs = commutator(h, e);
                let rhs = e * Complex64::new(crate::exact::rat_to_f64(&r.coords[p]), 0.0);
                rep.max_eigen_residual = rep.max_eigen_residual.max(max_abs(&(lhs - rhs)));
            }
        }
        for c in &self.serre_constants {
            let br = commutator(&self.roots[c.alpha].vector, &self.roots[c.beta].vector);
            let res = max_abs(&(br - &self.roots[c.sum].vector * c.value));
            rep.max_serre_residual = rep.max_serre_residual.max(res);
            rep.max_imaginary = rep.max_imaginary.max(c.value.im.abs());
            if c.value.norm() < 1e-10 {
                fail(c.alpha, "zero structure constant", &mut rep);
            }
            let (na, nb) = (self.roots[c.alpha].negative, self.roots[c.beta].negative);
            let partner = self.serre_constants.iter().find(|d| d.alpha == na && d.beta == nb);
            let anti = partner.map_or(f64::INFINITY, |d| (d.value + c.value).norm());
            rep.max_antisymmetry = rep.max_antisymmetry.max(anti);
            if res > 1e-10 || c.value.im.abs() > 1e-10 || anti > 1e-10 {
                fail(c.alpha, "Serre constant", &mut rep);
            }
        }
        for a in 0..self.len() {
            for b in 0..self.len() {
                let s = add(&self.roots[a].coords, &self.roots[b].coords);
                if self.find(&s).is_none() && s.iter().any(|x| !x.is_zero()) {
                    let br = commutator(&self.roots[a].vector, &self.roots[b].vector);
                    let res = max_abs(&br);
                    rep.max_non_root_bracket = rep.max_non_root_bracket.max(res);
                    if res > 1e-12 {
                        fail(a, "bracket with non-root sum", &mut rep);
                    }
                }
            }
        }
        rep
    }

    /// `(x_phi, y_phi)` for `phi` in the positive noncompact roots.
    pub fn p0_basis(&self) -> Vec<CMat> {
        let i = Complex64::new(0.0, 1.0);
        let mut out = Vec::new();
        for r in self.roots.iter().filter(|r| r.positive && !r.compact) {
            let e_neg = &self.roots[r.negative].vector;
            out.push(&r.vector + e_neg);
            out.push((&r.vector - e_neg) * i);
        }
        out
    }

    /// `i h_p` followed by `e - e_-`, `i (e + e_-)` over positive compact roots.
    pub fn k0_basis(&self, algebra: &GradedLieAlgebra) -> Vec<CMat> {
        let i = Complex64::new(0.0, 1.0);
        let mut out: Vec<CMat> = algebra.cartan().into_iter().map(|h| h * i).collect();
        for r in self.roots.iter().filter(|r| r.positive && r.compact) {
            let e_neg = &self.roots[r.negative].vector;
            out.push(&r.vector - e_neg);
            out.push((&r.vector + e_neg) * i);
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeylReport {
    pub max_conjugation_residual: f64,
    pub max_coroot_residual: f64,
    pub max_eigen_residual: f64,
    pub max_serre_residual: f64,
    pub max_imaginary: f64,
    pub max_antisymmetry: f64,
    pub max_non_root_bracket: f64,
    pub first_failure: Option<(usize, String)>,
}

/// Roots, lexicographic order and normalized Weyl basis in one call.
pub fn root_system(algebra: &GradedLieAlgebra) -> Result<RootSystem> {
    compute_roots(algebra)?
        .set_lexicographic_order()
        .normalize_weyl_basis(algebra)
}
