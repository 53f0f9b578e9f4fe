mod common;

use common::*;
use period_core::numeric::{commutator, frob, CMat};
use period_core::orbit::{
    exp_real, horizontal_abelian_trial, orbit_flag, polydisc_direction, polydisc_trial, q_residual, sample_lambda,
    sl2_orbit_coordinate, verify_sl2_decomposition, PolydiscConfig,
};
use period_core::Error;

fn random_g0(s: &Setup, seed: &mut u64) -> CMat {
    let m = s.frame.dim();
    let mut x = CMat::zeros(m, m);
    for b in s.rs.p0_basis().iter().chain(s.rs.k0_basis(&s.alg).iter()) {
        x += b * c(lcg(seed), 0.0);
    }
    x
}

#[test]
fn sl2_orbit_matrix_is_hyperbolic() {
    let s = setup(1, &[1, 1]);
    let x = &s.sos.x_basis[0];
    for t in [0.0, 0.3, 1.0, 4.0] {
        let g = exp_real(&s.alg, x, t).unwrap();
        for r in 0..2 {
            assert!((g[(r, r)].norm() - f64::cosh(t)).abs() <= 1e-12 * f64::cosh(t));
            assert!((g[(r, 1 - r)].norm() - f64::sinh(t)).abs() <= 1e-12 * f64::cosh(t));
        }
    }
    assert_eq!(exp_real(&s.alg, &CMat::zeros(2, 2), 5.0).unwrap(), CMat::identity(2, 2));
}

#[test]
fn exponential_inverse_and_q_preservation() {
    let mut seed = 1;
    for (_, n, h) in PRESETS {
        let s = setup(n, h);
        let m = s.frame.dim();
        for _ in 0..10 {
            let x = random_g0(&s, &mut seed);
            let g = exp_real(&s.alg, &x, 1.0).unwrap();
            let gi = exp_real(&s.alg, &x, -1.0).unwrap();
            assert!(max_abs(&(&g * gi - CMat::identity(m, m))) <= 1e-10);
            assert!(q_residual(&s.frame, &g) <= 1e-9);
            // Real points of the group commute with the real structure.
            let p = period_core::exact::to_cmat(&s.frame.conj_matrix());
            let conj_g = &p * g.map(|z| z.conj()) * p.try_inverse().unwrap();
            assert!(max_abs(&(conj_g - &g)) <= 1e-10 * max_abs(&g));
        }
    }
}

#[test]
fn exponential_guards() {
    let s = setup(1, &[1, 1]);
    let x = &s.sos.x_basis[0];
    assert!(matches!(exp_real(&s.alg, x, 1e4), Err(Error::ExpRange(_))));
    assert!(matches!(exp_real(&s.alg, &s.alg.cartan()[0], 1.0), Err(Error::NotReal(_))));
    assert!(matches!(exp_real(&s.alg, &CMat::identity(2, 2), 1.0), Err(Error::NotInAlgebra(_))));
}

#[test]
fn disc_coordinate_from_the_matrix_itself() {
    // In the sl2 frame the big-cell coordinate of g . o is g[1,0] / g[0,0].
    let s = setup(1, &[1, 1]);
    let t = &s.sos.oriented_triples[0];
    let (lead, scale) = (0..2)
        .flat_map(|r| (0..2).map(move |col| (r, col)))
        .find(|&rc| t.e[rc].norm() > 0.0)
        .map(|rc| (rc, t.e[rc]))
        .unwrap();
    assert_eq!(lead, (1, 0));
    for z in [c(1.0, 0.0), c(0.0, 2.0), c(-0.7, 0.4), c(3.0, -3.0)] {
        let g = period_core::numeric::expm(&(&t.e * z + &t.f * z.conj())).unwrap();
        let direct = g[(1, 0)] / g[(0, 0)] / scale;
        let pred = sl2_orbit_coordinate(&s.sos, 0, z).unwrap();
        assert!((direct - pred).norm() <= 1e-12);
    }
    assert!((sl2_orbit_coordinate(&s.sos, 0, c(1.0, 0.0)).unwrap().re - 0.761594155955765).abs() < 1e-15);
    let far = sl2_orbit_coordinate(&s.sos, 0, c(0.0, 20.0)).unwrap();
    // tanh(20) is within 1e-17 of 1 and rounds to it in double precision.
    assert!(far.re == 0.0 && far.norm() <= 1.0 && 1.0 - far.norm() < 1e-16);
    assert_eq!(sl2_orbit_coordinate(&s.sos, 0, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    assert!(matches!(sl2_orbit_coordinate(&s.sos, 1, c(1.0, 0.0)), Err(Error::OutOfRange { .. })));
}

#[test]
fn sl2_decomposition_random_batch() {
    let mut seed = 17;
    for (_, n, h) in PRESETS {
        let s = setup(n, h);
        for _ in 0..25 {
            let z = c(lcg(&mut seed), lcg(&mut seed)) * 14.0;
            for i in 0..s.sos.r {
                let chk = verify_sl2_decomposition(&s.sos, i, z).unwrap();
                assert!(chk.residual <= 1e-10, "{n} {h:?} z={z}: {}", chk.residual);
            }
        }
        let chk = verify_sl2_decomposition(&s.sos, 0, c(0.0, 0.0)).unwrap();
        assert_eq!(chk.absolute, 0.0);
    }
    let s = setup(1, &[1, 1]);
    let chk = verify_sl2_decomposition(&s.sos, 0, c(1.0, 0.0)).unwrap();
    assert!(chk.absolute <= 1e-12);
    assert!((chk.lhs[(0, 0)].re - f64::cosh(1.0)).abs() <= 1e-12);
}

#[test]
fn hand_picked_polydisc_points() {
    let cfg = PolydiscConfig {
        t_grid: vec![1.0],
        ..Default::default()
    };
    let s = setup(1, &[2, 2]);
    let res = polydisc_direction(&s.alg, &s.sos, &cfg, &[1.0, 0.0]);
    assert!(res.violations.is_empty());
    assert!((res.rows[0].coord - c(1f64.tanh(), 0.0)).norm() <= 1e-9);
    assert!(res.rows[1].coord.norm() <= 1e-12);

    let cfg0 = PolydiscConfig { t_grid: vec![0.0], ..Default::default() };
    let res = polydisc_direction(&s.alg, &s.sos, &cfg0, &[1.3, -0.4]);
    assert!(res.rows.iter().all(|r| r.coord.norm() == 0.0 && r.d_e == 0.0));

    let cfg20 = PolydiscConfig { t_grid: vec![20.0], ..Default::default() };
    let res = polydisc_direction(&s.alg, &s.sos, &cfg20, &[1.0, 1.0]);
    assert!(res.violations.is_empty());
    assert!((res.max_d_e - 2f64.sqrt()).abs() <= 1e-9);
    assert!(res.max_d_e <= 2f64.sqrt() + 1e-9);
}

#[test]
fn coordinates_are_monotone_along_a_fine_grid() {
    let s = setup(2, &[2, 2, 2]);
    let cfg = PolydiscConfig {
        t_grid: (0..60).map(|k| k as f64 * 0.25).collect(),
        ..Default::default()
    };
    let res = polydisc_direction(&s.alg, &s.sos, &cfg, &[0.9, -1.7]);
    assert!(res.violations.is_empty());
    for i in 0..s.sos.r {
        let seq: Vec<f64> = res.rows.iter().filter(|r| r.i == i).map(|r| r.coord.norm()).collect();
        assert!(seq.windows(2).all(|w| w[1] + 1e-12 >= w[0]));
    }
}

#[test]
fn zero_violations_for_every_seed() {
    for (_, n, h) in PRESETS {
        let s = setup(n, h);
        for seed in [3, 1_000_003, u64::MAX] {
            let cfg = PolydiscConfig { samples: 40, seed, ..Default::default() };
            let res = polydisc_trial(&s.alg, &s.sos, &cfg);
            assert!(res.violations.is_empty(), "{n} {h:?} seed {seed}: {:?}", res.violations.first());
            assert_eq!(res.rows.len(), 40 * cfg.t_grid.len() * s.sos.r);
            assert!(res.max_d_e <= (s.sos.r as f64).sqrt() + 1e-9);
        }
    }
}

#[test]
fn lambda_streams_are_deterministic() {
    let cfg = PolydiscConfig { seed: 42, ..Default::default() };
    assert_eq!(sample_lambda(&cfg, 3, 7), sample_lambda(&cfg, 3, 7));
    assert_ne!(sample_lambda(&cfg, 3, 7), sample_lambda(&cfg, 3, 8));
    assert!(sample_lambda(&cfg, 3, 7).iter().all(|l| l.abs() <= 2.0));
}

#[test]
fn abelian_at_group_level() {
    let mut seed = 5;
    for (_, n, h) in PRESETS {
        let s = setup(n, h);
        let m = s.frame.dim();
        let comb = |seed: &mut u64| {
            s.sos.x_basis.iter().fold(CMat::zeros(m, m), |acc, x| acc + x * c(lcg(seed), 0.0))
        };
        let (x, y) = (comb(&mut seed), comb(&mut seed));
        assert!(frob(&commutator(&x, &y)) <= 1e-12);
        let t = 1.5;
        let lhs = exp_real(&s.alg, &(&x + &y), t).unwrap();
        let rhs = exp_real(&s.alg, &x, t).unwrap() * exp_real(&s.alg, &y, t).unwrap();
        assert!(max_abs(&(lhs - rhs)) <= 1e-10 * max_abs(&(&x + &y)).exp().max(1.0));
    }
}

#[test]
fn orbit_flag_spans_the_same_filtration() {
    // The stepped flag and exp(tX) . o agree where the latter is well conditioned.
    let s = setup(2, &[1, 2, 1]);
    let x = &s.sos.x_basis[0] * c(0.8, 0.0) - &s.sos.x_basis[1] * c(0.3, 0.0);
    let g = exp_real(&s.alg, &x, 1.0).unwrap();
    let flag = orbit_flag(&s.alg, &x, 1.0).unwrap();
    let nums = s.frame.numbers();
    for b in 0..nums.num_blocks() {
        let k = nums.leading(b);
        let a = g.columns(0, k).into_owned();
        let q = flag.basis().columns(0, k).into_owned();
        // Projecting a onto span(q) loses nothing.
        let qq = q.clone().qr().q();
        let rest = &a - &qq * (qq.adjoint() * &a);
        assert!(frob(&rest) <= 1e-10 * frob(&a));
    }
}

#[test]
fn horizontal_trial_by_degree() {
    let cfg = PolydiscConfig { samples: 20, ..Default::default() };
    for (_, n, h) in PRESETS {
        let s = setup(n, h);
        let rep = horizontal_abelian_trial(&s.alg, &s.sos, &cfg);
        let expect: Vec<usize> = (0..s.sos.r).filter(|&i| s.rs.roots[s.sos.oriented[i]].hodge_degree == -1).collect();
        assert_eq!(rep.horizontal_roots, expect);
        assert_eq!(rep.applicable, !expect.is_empty());
        assert!(rep.result.violations.is_empty());
        if n == 1 {
            assert_eq!(rep.horizontal_roots.len(), s.sos.r);
        }
        for &i in &rep.horizontal_roots {
            assert!(s.alg.is_horizontal(&s.sos.oriented_triples[i].e).unwrap());
        }
    }
}
