mod common;

use common::{companion_real_roots, resultant_count_2x2};
use kss_core::kss::System;
use kss_core::rootcount::{
    certified_real_count, count_system, count_system_with, count_univariate, count_univariate_with, estimate_moments,
    SubdivisionOptions, UnivariateMethod, UnivariateOptions,
};

#[test]
fn small_univariate_cases() {
    assert_eq!(count_univariate(&[-1.0, 0.0, 1.0]).unwrap().count, 2);
    assert_eq!(count_univariate(&[1.0, 0.0, 1.0]).unwrap().count, 0);
    assert!(count_univariate(&[0.0, 0.0]).is_err());
}

#[test]
fn sturm_agrees_with_eigenvalues_at_degree_20() {
    let sturm = UnivariateOptions {
        method: UnivariateMethod::Sturm,
        ..Default::default()
    };
    let mut band_disagreements = 0;
    for seed in 0..1000u64 {
        let s = System::<f64>::sample(1, 20, seed).unwrap();
        let a = s.equation(0);
        let r = count_univariate_with(a, &sturm).unwrap();
        assert!(r.certified && r.count <= 20);
        let eig = companion_real_roots(a, 1e-8).len() as u64;
        if eig != r.count {
            band_disagreements += 1;
            // Escalate: certified inclusion discs from a separate iteration.
            let c = certified_real_count(a).expect("inclusion discs separate");
            assert_eq!(c as u64, r.count, "seed {seed}");
        }
    }
    assert!(band_disagreements <= 1, "{band_disagreements} disagreements in the 1e-8 band");
}

#[test]
fn auto_route_matches_sturm_above_threshold() {
    let sturm = UnivariateOptions {
        method: UnivariateMethod::Sturm,
        ..Default::default()
    };
    for seed in 0..40u64 {
        let s = System::<f64>::sample(1, 30, seed).unwrap();
        let a = count_univariate(s.equation(0)).unwrap();
        let b = count_univariate_with(s.equation(0), &sturm).unwrap();
        assert_eq!(a.count, b.count, "seed {seed}");
    }
}

#[test]
fn product_and_padded_systems() {
    let mut s = System::<f64>::zeros(2, 2).unwrap();
    s.set(0, &[2, 0], 1.0).unwrap();
    s.set(0, &[0, 0], -1.0).unwrap();
    s.set(1, &[0, 2], 1.0).unwrap();
    s.set(1, &[0, 0], -1.0).unwrap();
    let r = count_system(&s).unwrap();
    assert_eq!((r.count, r.certified, r.bezout_cap), (4, true, 4));

    // (t1, t2) padded to degree 2: the homogenized system vanishes on a whole
    // line at infinity, so the finite root is found but not certified.
    let mut s = System::<f64>::zeros(2, 2).unwrap();
    s.set(0, &[1, 0], 1.0).unwrap();
    s.set(1, &[0, 1], 1.0).unwrap();
    let r = count_system(&s).unwrap();
    assert_eq!(r.count, 1);
}

#[test]
fn subdivision_agrees_with_resultant_at_degree_2() {
    let mut uncertified = 0;
    for seed in 0..200u64 {
        let s = System::<f64>::sample(2, 2, 77_000 + seed).unwrap();
        let r = count_system(&s).unwrap();
        if !r.certified {
            uncertified += 1;
        }
        assert!(r.count <= 4);
        assert_eq!(r.count as usize, resultant_count_2x2(&s), "seed {seed}");
    }
    assert_eq!(uncertified, 0);
}

#[test]
fn zeros_seen_from_two_charts_are_counted_once() {
    // Draws whose zeros were once verified in two charts with enclosures too
    // wide to merge.
    for (seed, want) in [(20_245_628u64, 2u64), (20_245_656, 4)] {
        let s = System::<f64>::sample(2, 2, seed).unwrap();
        let r = count_system(&s).unwrap();
        assert_eq!((r.count, r.certified), (want, true), "seed {seed}");
        assert_eq!(resultant_count_2x2(&s), want as usize);
    }
    let mut over = 0;
    for seed in 0..2000u64 {
        let s = System::<f64>::sample(2, 2, 3_000_000 + seed).unwrap();
        let r = count_system(&s).unwrap();
        if r.count > 4 || r.count as usize != resultant_count_2x2(&s) {
            over += 1;
        }
    }
    assert_eq!(over, 0);
}

#[test]
fn opposite_hemisphere_gives_the_same_count() {
    let neg = SubdivisionOptions {
        negative_faces: true,
        ..Default::default()
    };
    for seed in 0..30u64 {
        let s = System::<f64>::sample(2, 3, 500 + seed).unwrap();
        let a = count_system(&s).unwrap();
        let b = count_system_with(&s, &neg).unwrap();
        assert!(a.certified && b.certified);
        assert_eq!(a.count, b.count, "seed {seed}");
    }
}

#[test]
fn refinement_never_loses_roots() {
    for seed in 0..20u64 {
        let s = System::<f64>::sample(2, 3, 900 + seed).unwrap();
        let mut last = 0;
        for w in [1e-2, 1e-4, 1e-6, 1e-8] {
            let opts = SubdivisionOptions {
                min_width: w,
                ..Default::default()
            };
            let r = count_system_with(&s, &opts).unwrap();
            assert!(r.count >= last, "seed {seed} width {w}");
            last = r.count;
        }
    }
}

#[test]
fn mean_law_small_scale() {
    let e = estimate_moments(1, 10, 4000, 3).unwrap();
    let (m, se) = e.scaled_mean();
    assert!((m - 1.0).abs() < 3.0 * se, "{m} {se}");
    assert_eq!(e.uncertified_fraction, 0.0);
    let e = estimate_moments(2, 2, 600, 4).unwrap();
    let (m, se) = e.scaled_mean();
    assert!((m - 1.0).abs() < 3.0 * se, "{m} {se}");
    assert_eq!(e.uncertified_fraction, 0.0);
}
