mod common;

use common::*;
use proptest::prelude::*;
use sconvex::covering::mean_value_witness;
use sconvex::{
    candidate_singular_points, cover_sigma0, cover_sigma1, eval_surface, random_monotone_with_chain,
    surface_gradient_check, theorem1_build, verify_coverage, ClusterOptions, Cover, GradientCheck,
    PointFilter,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn surface_contains_tie_set(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, j, c1, c2) = random_gap_instance(&mut r);
        let s = theorem1_build(&f, j, &c1, &c2, 1e-12).unwrap();
        for x in tie_set_points(&mut r, &f, &c1, &c2, 40) {
            prop_assert!(eval_surface(&s, &x).unwrap().abs() <= 1e-8);
            prop_assert!(mean_value_witness(&f, &s, &x, 1e-8).unwrap().is_some());
        }
    }

    #[test]
    fn surface_gradients_lie_in_normal_set(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, j, c1, c2) = random_gap_instance(&mut r);
        let s = theorem1_build(&f, j, &c1, &c2, 1e-12).unwrap();
        for w in s.normal_set() {
            prop_assert_eq!(w[j], 1.0);
        }
        for _ in 0..20 {
            let u = vec_in(&mut r, f.dim() - 1, -3.0, 3.0);
            let z = s.lift(&u);
            let check = surface_gradient_check(&s, &z, 1e-5, 1e-6).unwrap();
            prop_assert_ne!(check, GradientCheck::Fail);
        }
    }

    #[test]
    fn singleton_pair_is_a_hyperplane(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, j, c1, c2) = random_gap_instance(&mut r);
        let (k, l) = (c1[0], c2[0]);
        let s = theorem1_build(&f, j, &[k], &[l], 1e-12).unwrap();
        let (y, z) = (f.slope(k), f.slope(l));
        let ck = f.conjugate_at(y).unwrap().min(f.intercept(k));
        let cl = f.conjugate_at(z).unwrap().min(f.intercept(l));
        for _ in 0..10 {
            let x = vec_in(&mut r, f.dim(), -3.0, 3.0);
            let expected = (x.iter().zip(z.iter().zip(y)).map(|(a, (p, q))| a * (p - q)).sum::<f64>() - (cl - ck)) / (z[j] - y[j]);
            prop_assert!((eval_surface(&s, &x).unwrap() - expected).abs() < 1e-9 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn monotone_families_cover(seed in any::<u64>(), d in 2usize..=3) {
        let mut r = rng(seed);
        let space = random_form(&mut r, d, 1);
        let g = random_monotone_with_chain(&space, 6, 3, seed).unwrap();
        let pts = candidate_singular_points(&g, 4, 1.0, seed, 1e-9).unwrap();
        let opts = ClusterOptions::default();
        for j in 0..d {
            let s1: Vec<Cover> = cover_sigma1(&g, j, &opts, 1e-9).unwrap().into_iter().map(Cover::Surface).collect();
            let rep = verify_coverage(&s1, &pts, PointFilter::Sigma1(j), 1e-8);
            prop_assert!(rep.all_covered(), "{:?}", rep);
            let s0: Vec<Cover> = cover_sigma0(&g, j, 0.1, &opts, 1e-9).unwrap().into_iter().map(Cover::Surface).collect();
            let rep = verify_coverage(&s0, &pts, PointFilter::Sigma0Bar(j), 1e-8);
            prop_assert!(rep.all_covered(), "{:?}", rep);
        }
    }
}
