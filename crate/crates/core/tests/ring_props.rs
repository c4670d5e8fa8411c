mod common;

use std::sync::Arc;

use common::*;
use grf_core::group::check_automorphism;
use grf_core::ring::{act_row, extend_automorphism};
use grf_core::{amat, skew, Automorphism, Complex64, FiniteGroup, GroupElementId, GroupRingElement, IntMatrix};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn close(a: &GroupRingElement<Complex64>, b: &GroupRingElement<Complex64>) -> bool {
    let scale = 1.0 + a.norm().max(b.norm());
    a.max_abs_diff(b).unwrap() <= TOL * scale
}

fn corpus_group() -> impl Strategy<Value = Arc<FiniteGroup>> {
    (0..CORPUS.len()).prop_map(|i| group(CORPUS[i]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn multiplication_is_associative(g in corpus_group(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y, z) = (random_complex(&g, &mut r), random_complex(&g, &mut r), random_complex(&g, &mut r));
        let left = x.mul(&y).unwrap().mul(&z).unwrap();
        let right = x.mul(&y.mul(&z).unwrap()).unwrap();
        prop_assert!(close(&left, &right));
    }

    #[test]
    fn multiplication_distributes(g in corpus_group(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y, z) = (random_complex(&g, &mut r), random_complex(&g, &mut r), random_complex(&g, &mut r));
        let left = x.mul(&y.add(&z).unwrap()).unwrap();
        let right = x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap();
        prop_assert!(close(&left, &right));
        let left = y.add(&z).unwrap().mul(&x).unwrap();
        let right = y.mul(&x).unwrap().add(&z.mul(&x).unwrap()).unwrap();
        prop_assert!(close(&left, &right));
    }

    #[test]
    fn identity_basis_is_two_sided_unit(g in corpus_group(), seed in any::<u64>()) {
        let x = random_complex(&g, &mut rng(seed));
        let e = GroupRingElement::<Complex64>::unit(&g);
        prop_assert!(close(&e.mul(&x).unwrap(), &x));
        prop_assert!(close(&x.mul(&e).unwrap(), &x));
    }

    #[test]
    fn dagger_reverses_products(g in corpus_group(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y) = (random_complex(&g, &mut r), random_complex(&g, &mut r));
        let left = x.mul(&y).unwrap().dagger();
        let right = y.dagger().mul(&x.dagger()).unwrap();
        prop_assert!(close(&left, &right));
        prop_assert_eq!(x.dagger().dagger(), x.clone());
        prop_assert!((x.dagger().norm() - x.norm()).abs() <= TOL);
    }

    #[test]
    fn trace_is_cyclic(g in corpus_group(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y) = (random_complex(&g, &mut r), random_complex(&g, &mut r));
        let d = (x.mul(&y).unwrap().trace() - y.mul(&x).unwrap().trace()).norm();
        prop_assert!(d <= TOL);
    }

    #[test]
    fn inner_product_is_trace_form(g in corpus_group(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y) = (random_complex(&g, &mut r), random_complex(&g, &mut r));
        let via_trace = x.dagger().mul(&y).unwrap().trace();
        let direct = x.inner(&y).unwrap();
        prop_assert!((via_trace - direct).norm() <= TOL);
        prop_assert!(direct.norm() <= x.norm() * y.norm() + TOL);
    }

    #[test]
    fn convolution_matches_permutation_matrices(g in corpus_group(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y) = (random_complex(&g, &mut r), random_complex(&g, &mut r));
        let fast = x.mul(&y).unwrap();
        let slow = product_via_amat(x.coeffs(), y.coeffs(), &g);
        prop_assert!(sup_diff(fast.coeffs(), &slow) <= TOL);
    }

    #[test]
    fn real_products_stay_real(g in corpus_group(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y) = (random_real(&g, &mut r), random_real(&g, &mut r));
        let real = x.mul(&y).unwrap();
        let lift = |e: &GroupRingElement<f64>| {
            GroupRingElement::from_coeffs(&g, e.coeffs().iter().map(|&c| Complex64::new(c, 0.0)).collect()).unwrap()
        };
        let complex = lift(&x).mul(&lift(&y)).unwrap();
        prop_assert!(close(&lift(&real), &complex));
    }
}

#[test]
fn amat_matrices_are_distinct_permutations() {
    for spec in CORPUS {
        let g = group(spec);
        let mats: Vec<IntMatrix> = g.elements().map(|a| amat(&g, a).unwrap()).collect();
        for (i, m) in mats.iter().enumerate() {
            assert!(m.is_permutation(), "{spec}");
            let inv = g.inverse(GroupElementId(i)).index();
            assert_eq!(m.transpose(), mats[inv], "{spec}: transpose must be the inverse matrix");
            for other in &mats[i + 1..] {
                assert_ne!(m, other, "{spec}");
            }
        }
    }
}

#[test]
fn amat_is_a_representation() {
    for spec in ["S3", "D4", "Z6", "Z2xZ4"] {
        let g = group(spec);
        for a in g.elements() {
            for b in g.elements() {
                let prod = amat(&g, a).unwrap().matmul(&amat(&g, b).unwrap()).unwrap();
                assert_eq!(prod, amat(&g, g.mul(a, b)).unwrap(), "{spec}");
            }
        }
    }
}

#[test]
fn skew_matrices_are_antisymmetric() {
    for spec in CORPUS {
        let g = group(spec);
        for a in g.elements() {
            let s = skew(&g, a).unwrap();
            let m = s.matrix();
            assert!(m.add(&m.transpose()).unwrap().is_zero(), "{spec}");
            assert_eq!(s.is_zero(), g.mul(a, a) == g.identity());
        }
    }
}

#[test]
fn row_action_reads_left_translates() {
    let g = group("Z4");
    let mut r = rng(11);
    let x = random_complex(&g, &mut r);
    for a in g.elements() {
        let y = act_row(&x, &amat(&g, a).unwrap()).unwrap();
        for h in g.elements() {
            assert_eq!(y.coeff(h), x.coeff(g.mul(a, h)));
        }
    }
}

#[test]
fn lifted_inversion_is_multiplicative_on_z5() {
    let g = group("Z5");
    let phi = Automorphism::inversion(&g).unwrap();
    assert!(check_automorphism(&g, phi.perm()).unwrap());
    let mut r = rng(5);
    for _ in 0..100 {
        let (x, y) = (random_complex(&g, &mut r), random_complex(&g, &mut r));
        let lhs = extend_automorphism(&phi, &x.mul(&y).unwrap()).unwrap();
        let rhs = extend_automorphism(&phi, &x)
            .unwrap()
            .mul(&extend_automorphism(&phi, &y).unwrap())
            .unwrap();
        assert!(close(&lhs, &rhs));
        let d1 = extend_automorphism(&phi, &x.dagger()).unwrap();
        let d2 = extend_automorphism(&phi, &x).unwrap().dagger();
        assert!(close(&d1, &d2));
    }
}

#[test]
fn inner_conjugation_lifts_on_nonabelian_groups() {
    for spec in ["S3", "D4", "S4"] {
        let g = group(spec);
        let mut r = rng(3);
        for a in g.elements().step_by(3) {
            let phi = Automorphism::conjugation(&g, a).unwrap();
            let (x, y) = (random_complex(&g, &mut r), random_complex(&g, &mut r));
            let lhs = extend_automorphism(&phi, &x.mul(&y).unwrap()).unwrap();
            let rhs = extend_automorphism(&phi, &x)
                .unwrap()
                .mul(&extend_automorphism(&phi, &y).unwrap())
                .unwrap();
            assert!(close(&lhs, &rhs), "{spec}");
        }
    }
}

#[test]
fn mismatched_groups_are_rejected() {
    let a = GroupRingElement::<f64>::unit(&group("Z3"));
    let b = GroupRingElement::<f64>::unit(&group("Z4"));
    assert!(a.mul(&b).is_err());
    assert!(a.add(&b).is_err());
    assert!(a.inner(&b).is_err());
}
