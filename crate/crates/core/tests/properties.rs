use std::path::Path;

use hermite_gutzmer::gutzmer::{gutzmer_lhs, gutzmer_rhs, polarized_gutzmer, GutzmerConfig};
use hermite_gutzmer::phase_space::{group_action, haar_sample, MultiIndex, PhasePoint};
use hermite_gutzmer::quadrature::sample_rng;
use hermite_gutzmer::special_functions::{
    hermite_fns_upto, laguerre_fn, laguerre_fn_imaginary, mehler_kernel,
};
use hermite_gutzmer::spectral::{semigroup, HermiteExpansion};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1e-300)
}

fn point(n: usize) -> impl Strategy<Value = PhasePoint> {
    proptest::collection::vec(-1.2f64..1.2, 4 * n).prop_map(move |v| {
        PhasePoint::from_parts(&v[..n], &v[n..2 * n], &v[2 * n..3 * n], &v[3 * n..]).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn table_round_trip(n in 1usize..=3, k_max in 0usize..=6, seed in any::<u64>()) {
        let f = HermiteExpansion::random(n, k_max, 0.4, seed).unwrap();
        let back = HermiteExpansion::from_table(&f.to_table(), Path::new("mem")).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn semigroup_composes(s in 0.01f64..1.0, t in 0.01f64..1.0, seed in any::<u64>()) {
        let f = HermiteExpansion::random(2, 6, 0.2, seed).unwrap();
        let two = semigroup(&semigroup(&f, s).unwrap(), t).unwrap();
        let one = semigroup(&f, s + t).unwrap();
        for (a, v) in one.iter() {
            prop_assert!(close(two.get(a), *v, 1e-13));
        }
    }

    #[test]
    fn haar_samples_are_unitary_and_act_as_a_group(seed in any::<u64>(), p in point(3)) {
        let mut rng = sample_rng(seed, 0);
        let s1 = haar_sample(3, &mut rng).unwrap();
        let s2 = haar_sample(3, &mut rng).unwrap();
        prop_assert!(s1.unitarity_defect() < 1e-12);
        let nested = group_action(&s1, &group_action(&s2, &p).unwrap()).unwrap();
        let direct = group_action(&s1.compose(&s2), &p).unwrap();
        for (a, b) in nested.z().iter().chain(nested.w()).zip(direct.z().iter().chain(direct.w())) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn right_side_is_k_invariant(seed in any::<u64>(), p in point(2)) {
        let f = HermiteExpansion::random(2, 8, 0.3, seed).unwrap();
        let sigma = haar_sample(2, &mut sample_rng(seed, 1)).unwrap();
        let moved = group_action(&sigma, &p).unwrap();
        let (a, b) = (gutzmer_rhs(&f, &p).unwrap().value, gutzmer_rhs(&f, &moved).unwrap().value);
        prop_assert!((a - b).abs() <= 1e-12 * b.abs());
    }

    #[test]
    fn right_side_grows_along_imaginary_rays(seed in any::<u64>(), y in 0.05f64..1.5, v in 0.05f64..1.5) {
        let f = HermiteExpansion::random(1, 10, 0.3, seed).unwrap();
        let mut last = f.norm_sq();
        for s in [0.25, 0.5, 0.75, 1.0] {
            let p = PhasePoint::from_parts(&[0.0], &[s * y], &[0.0], &[s * v]).unwrap();
            let r = gutzmer_rhs(&f, &p).unwrap().value;
            prop_assert!(r > last);
            last = r;
        }
    }

    #[test]
    fn one_dimensional_identity_holds(seed in any::<u64>(), p in point(1)) {
        let f = HermiteExpansion::random(1, 10, 0.3, seed).unwrap();
        let lhs = gutzmer_lhs(&f, &p, &GutzmerConfig::default()).unwrap().value;
        let rhs = gutzmer_rhs(&f, &p).unwrap().value;
        prop_assert!(lhs.im.abs() <= 1e-10 * rhs);
        prop_assert!((lhs.re - rhs).abs() <= 1e-9 * rhs);
    }

    #[test]
    fn mehler_kernel_is_symmetric(r in 0.05f64..0.95, a in -2.0f64..2.0, b in -2.0f64..2.0, d in -2.0f64..2.0, e in -2.0f64..2.0) {
        let (xi, eta) = (c(a, b), c(d, e));
        prop_assert!(close(mehler_kernel(r, xi, eta).unwrap(), mehler_kernel(r, eta, xi).unwrap(), 1e-14));
    }

    #[test]
    fn laguerre_fn_on_imaginary_points(y in -1.5f64..1.5, v in -1.5f64..1.5, k in 0usize..12) {
        // φ_k(2iy, 2iv) through both entry points
        let p = PhasePoint::from_parts(&[0.0], &[2.0 * y], &[0.0], &[2.0 * v]).unwrap();
        let general = laguerre_fn(k, 1, &p).unwrap();
        let special = laguerre_fn_imaginary(k, 1, y * y + v * v).unwrap();
        prop_assert!(general.im.abs() <= 1e-12 * special.abs());
        prop_assert!((general.re - special).abs() <= 1e-12 * special.abs());
    }
}

#[test]
fn hermite_functions_are_orthonormal() {
    let k_max = 20;
    let m = 4000;
    let h = 24.0 / m as f64;
    let mut gram = vec![0.0; (k_max + 1) * (k_max + 1)];
    let mut row = Vec::new();
    for i in 0..=m {
        let x = -12.0 + i as f64 * h;
        hermite_fns_upto(k_max, c(x, 0.0), &mut row).unwrap();
        for a in 0..=k_max {
            for b in 0..=k_max {
                gram[a * (k_max + 1) + b] += h * row[a].re * row[b].re;
            }
        }
    }
    for a in 0..=k_max {
        for b in 0..=k_max {
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((gram[a * (k_max + 1) + b] - want).abs() < 1e-12, "({a},{b})");
        }
    }
}

#[test]
fn polarized_identity_separates_levels() {
    let p = PhasePoint::from_parts(&[0.3], &[0.8], &[-0.2], &[0.5]).unwrap();
    let cfg = GutzmerConfig::default();
    for (a, b) in [(0, 1), (2, 5), (3, 3), (4, 4)] {
        let f = HermiteExpansion::basis(&MultiIndex::new(vec![a]), 6).unwrap();
        let g = HermiteExpansion::basis(&MultiIndex::new(vec![b]), 6).unwrap();
        let (lhs, rhs) = polarized_gutzmer(&f, &g, &p, &cfg).unwrap();
        if a == b {
            assert!(close(lhs.value, rhs, 1e-10));
        } else {
            assert_eq!(rhs, c(0.0, 0.0));
            assert!(lhs.value.norm() < 1e-12, "{a},{b}: {}", lhs.value);
        }
    }
}

#[test]
fn level_zero_right_side_is_gaussian() {
    // f = Φ_0: the series is the single term e^{u·y − v·x} e^{|y|²+|v|²}
    let f = HermiteExpansion::basis(&MultiIndex::zero(1), 0).unwrap();
    let (x, y, u, v) = (0.4, -0.7, 1.1, 0.3);
    let p = PhasePoint::from_parts(&[x], &[y], &[u], &[v]).unwrap();
    let want = (u * y - v * x + y * y + v * v).exp();
    let got = gutzmer_rhs(&f, &p).unwrap().value;
    assert!((got - want).abs() < 1e-13 * want);
}
