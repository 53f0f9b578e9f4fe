mod common;

use common::*;
use nalgebra::DVector;
use num_complex::Complex64;
use period_core::big_cell::{exp_nilpotent, FlagPoint};
use period_core::exact::{gq, to_cmat, QMat};
use period_core::hodge::{check_hodge_riemann, HodgeNumbers, HodgeRiemannVerdict};
use period_core::numeric::{hermitian_min_eig, CMat};
use period_core::Error;

#[test]
fn sl2_polarization_by_hand() {
    let f = frame(1, &[1, 1]);
    // Q(e0, e1) = -i, Q(e1, e0) = i; C = diag(i, -i); conj swaps e0 and e1.
    let mut q = QMat::zeros(2, 2);
    q[(0, 1)] = gq(0, -1);
    q[(1, 0)] = gq(0, 1);
    assert_eq!(f.q(), &q);
    let mut c = QMat::zeros(2, 2);
    c[(0, 0)] = gq(0, 1);
    c[(1, 1)] = gq(0, -1);
    assert_eq!(f.weil(), &c);
    // H(u, v) = Q(Cu, conj v) assembled entry by entry.
    for a in 0..2 {
        for b in 0..2 {
            let (sb, _) = f.conj_pair(b);
            let val = f.weil()[(a, a)] * f.q()[(a, sb)];
            assert_eq!(val, if a == b { gq(1, 0) } else { gq(0, 0) });
        }
    }
}

#[test]
fn parity_of_q() {
    for n in 0..5usize {
        let h: Vec<usize> = (0..=n).map(|i| 1 + (i.min(n - i))).collect();
        let f = frame(n, &h);
        let qt = f.q().transpose();
        if n % 2 == 0 {
            assert_eq!(&qt, f.q());
        } else {
            assert_eq!(qt, -f.q().clone());
        }
    }
}

#[test]
fn k3_sparsity_and_positivity() {
    let f = frame(2, &[1, 2, 1]);
    let nums = f.numbers();
    for a in 0..3 {
        for b in 0..3 {
            let block_nonzero = nums
                .block(a)
                .any(|i| nums.block(b).any(|j| f.q()[(i, j)] != gq(0, 0)));
            assert_eq!(block_nonzero, a + b == 2, "block ({a},{b})");
        }
    }
    let h = to_cmat(&f.hermitian_form());
    assert!(hermitian_min_eig(&h) > 0.9);
}

#[test]
fn hr2_sign_per_basis_vector_and_random_block_vectors() {
    let mut seed = 11;
    for (_, n, h) in PRESETS {
        let f = frame(n, h);
        let q = f.q_f64();
        let nums = f.numbers();
        for a in 0..nums.num_blocks() {
            let k = (n - a) as i64;
            let phase = period_core::exact::to_c64(&period_core::exact::i_pow(2 * k - n as i64));
            for trial in 0..5 {
                let mut v = DVector::<Complex64>::zeros(nums.dim());
                for i in nums.block(a) {
                    v[i] = if trial == 0 && i == nums.block(a).start {
                        c(1.0, 0.0)
                    } else if trial == 0 {
                        c(0.0, 0.0)
                    } else {
                        c(lcg(&mut seed), lcg(&mut seed))
                    };
                }
                if v.norm() == 0.0 {
                    continue;
                }
                let cv = f.conj_vec(&v);
                let val = (v.transpose() * &q * cv)[(0, 0)] * phase;
                assert!(val.re > 0.0 && val.im.abs() < 1e-12, "{n} {h:?} block {a}: {val}");
            }
        }
    }
}

#[test]
fn conj_is_involution_between_mirror_blocks() {
    for (_, n, h) in PRESETS {
        let f = frame(n, h);
        let nums = f.numbers();
        for i in 0..nums.dim() {
            let mut e = DVector::<Complex64>::zeros(nums.dim());
            e[i] = c(1.0, 0.0);
            let twice = f.conj_vec(&f.conj_vec(&e));
            assert!((twice - &e).norm() == 0.0);
            let (s, _) = f.conj_pair(i);
            assert_eq!(nums.block_of(s), n - nums.block_of(i));
        }
    }
}

#[test]
fn hermitian_form_is_identity_on_presets() {
    for (_, n, h) in PRESETS {
        let f = frame(n, h);
        assert_eq!(f.hermitian_form(), QMat::identity(f.dim(), f.dim()));
    }
}

#[test]
fn congruent_under_change_of_basis() {
    let f = frame(2, &[1, 2, 1]);
    let h = to_cmat(&f.hermitian_form());
    let mut seed = 5;
    let t = CMat::from_fn(4, 4, |_, _| c(lcg(&mut seed), lcg(&mut seed)));
    let u = t.qr().q();
    // Hermitian form in the new basis: u^T H conj(u).
    let h2 = u.transpose() * &h * u.map(|z| z.conj());
    assert!(max_abs(&(&h2 - h2.adjoint())) < 1e-12);
    assert!(hermitian_min_eig(&h2) > 0.9);
}

#[test]
fn rejects_bad_hodge_numbers() {
    assert!(matches!(HodgeNumbers::new(1, vec![1, 2]), Err(Error::AsymmetricHodgeNumbers { .. })));
    assert!(matches!(HodgeNumbers::new(2, vec![0, 0, 0]), Err(Error::EmptyFrame)));
}

#[test]
fn swapped_extreme_blocks() {
    // Odd weight: swapping H^{n,0} and H^{0,n} breaks positivity.
    for h in [&[1usize, 1][..], &[2, 2]] {
        let f = frame(1, h);
        let m = f.dim();
        let g = h[0];
        let a = CMat::from_fn(m, m, |r, c| if (r + g) % m == c { common::c(1.0, 0.0) } else { common::c(0.0, 0.0) });
        let flag = FlagPoint::new(f.numbers(), a).unwrap();
        let v = check_hodge_riemann(&f, &flag).unwrap();
        assert_eq!(v, HodgeRiemannVerdict::InDualOnly);
    }
    // Even weight: the conjugate Hodge structure is again polarized.
    let f = frame(2, &[1, 2, 1]);
    let mut a = CMat::zeros(4, 4);
    for (r, c) in [(3, 0), (1, 1), (2, 2), (0, 3)] {
        a[(r, c)] = common::c(1.0, 0.0);
    }
    let flag = FlagPoint::new(f.numbers(), a).unwrap();
    assert_eq!(check_hodge_riemann(&f, &flag).unwrap(), HodgeRiemannVerdict::InD);
}

#[test]
fn unipotent_orbit_flags_are_isotropic() {
    let mut seed = 3;
    for (_, n, h) in PRESETS {
        let s = setup(n, h);
        let m = s.frame.dim();
        for _ in 0..10 {
            let mut x = CMat::zeros(m, m);
            for (j, b) in s.alg.basis().iter().enumerate() {
                if b.degree < 0 {
                    x += s.alg.element(j) * c(2.0 * lcg(&mut seed), 2.0 * lcg(&mut seed));
                }
            }
            let l = exp_nilpotent(s.frame.numbers(), &x).unwrap().l;
            let flag = FlagPoint::new(s.frame.numbers(), l).unwrap();
            let v = check_hodge_riemann(&s.frame, &flag).unwrap();
            assert_ne!(v, HodgeRiemannVerdict::Neither);
        }
    }
}

#[test]
fn dimension_mismatch_is_an_error() {
    let f = frame(1, &[1, 1]);
    let other = frame(1, &[2, 2]);
    let flag = other.base_flag();
    assert!(matches!(check_hodge_riemann(&f, &flag), Err(Error::DimensionMismatch { .. })));
}
