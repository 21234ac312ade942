use kss_core::asymptotics::{m_kj, v_infinity, VInfSpec};
use kss_core::hermite::{
    column_integral, column_integral_limit, f_coefficients, f_tilde_22, hermite_eval, i2d_lower_bound, mehler_h2,
    multi_indices, parseval_sum, I2Column, I2Spec,
};
use kss_core::numerics::QuadratureSpec;

fn index(m: usize, entries: &[(usize, usize, u32)]) -> Vec<u32> {
    let mut b = vec![0; m * m];
    for &(i, j, v) in entries {
        b[i * m + j] = v;
    }
    b
}

#[test]
fn mean_abs_det_is_a_product_of_chi_means() {
    for m in 1..=3 {
        let exact: f64 = (1..=m).map(|k| m_kj(k, 1).unwrap()).product();
        let t = f_tilde_22(m, 400_000, 11).unwrap();
        assert!((t.mean_abs_det.value - exact).abs() < 4.0 * t.mean_abs_det.se, "m={m}");
    }
}

#[test]
fn second_order_coefficients_share_one_value() {
    let m = 3;
    let betas: Vec<Vec<u32>> = (0..m * m)
        .map(|p| {
            let mut b = vec![0; m * m];
            b[p] = 2;
            b
        })
        .collect();
    let f = f_coefficients(&betas, m, 400_000, 3).unwrap();
    let mean = f.iter().map(|e| e.value).sum::<f64>() / f.len() as f64;
    for e in &f {
        assert!((e.value - mean).abs() < 5.0 * e.se, "{e:?} vs {mean}");
    }
}

#[test]
fn odd_row_or_column_groups_vanish() {
    // Flipping the sign of one row leaves |det| unchanged, so any beta with
    // an odd total in some row (or column) has f_beta = 0.
    let m = 2;
    // The diagonal pair is odd in every row and column.
    let betas = vec![
        index(m, &[(0, 0, 1), (1, 0, 1)]),
        index(m, &[(0, 0, 1), (0, 1, 1)]),
        index(m, &[(0, 0, 3), (1, 0, 1)]),
        index(m, &[(0, 0, 1), (1, 1, 1)]),
    ];
    let f = f_coefficients(&betas, m, 400_000, 8).unwrap();
    for e in &f[..3] {
        assert!(e.value.abs() < 5.0 * e.se, "{e:?}");
    }
    assert!(f[3].value.abs() < 5.0 * f[3].se, "{:?}", f[3]);
    // All four entries once: every group is even. With x = ad, y = bc the
    // value is E[xy (|x - y| - |x + y|)] / 2 < 0.
    let all = f_coefficients(&[vec![1, 1, 1, 1]], m, 400_000, 8).unwrap()[0];
    assert!(all.value < -5.0 * all.se, "{all:?}");
}

#[test]
fn coefficient_normalization_for_m1() {
    // E[|Y| H_2(Y)] / 2 = 1 / sqrt(2 pi).
    let t = f_tilde_22(1, 1_000_000, 21).unwrap();
    let exact = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    assert!((t.coefficient.value - exact).abs() < 4.0 * t.coefficient.se);
    assert!((t.frobenius.value - 2.0 * t.coefficient.value).abs() < 1e-15);
}

#[test]
fn second_chaos_coefficient_is_positive() {
    for m in 1..=3 {
        let t = f_tilde_22(m, 400_000, 40 + m as u64).unwrap();
        assert!(t.coefficient.value > 5.0 * t.coefficient.se, "m={m} {:?}", t.coefficient);
    }
}

#[test]
fn parseval_sum_stays_below_second_moment() {
    for (m, order, bound) in [(1usize, 6u32, 1.0f64), (2, 4, 2.0)] {
        let p = parseval_sum(m, order, 400_000, 9).unwrap();
        assert!(p.value <= bound + 3.0 * p.se, "m={m} {p:?}");
        assert!(p.value > 0.8 * bound, "m={m} {p:?}");
    }
    assert_eq!(multi_indices(4, 4).len(), 70);
}

#[test]
fn chaos_components_are_orthogonal() {
    // E[H_2(X) H_4(Y)] = 0 for unit normals with any correlation.
    let n = 200_000;
    let mut s = 0.0;
    let mut s2 = 0.0;
    let mut rng = kss_core::rng::chunk_rng(99, 0);
    use rand::Rng;
    for _ in 0..n {
        let x: f64 = rng.sample(rand_distr::StandardNormal);
        let e: f64 = rng.sample(rand_distr::StandardNormal);
        let y = 0.6 * x + 0.8 * e;
        let v = hermite_eval(2, x) * hermite_eval(4, y);
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!(mean.abs() < 4.0 * se);
    let (h2, se2) = mehler_h2(0.6, n, 5).unwrap();
    assert!((h2 - 2.0 * 0.36).abs() < 4.0 * se2);
}

#[test]
fn column_integrals_converge() {
    let q = QuadratureSpec::default().with_abs_tol(1e-11);
    for (m, column) in [(1, I2Column::Radial), (2, I2Column::Transverse), (3, I2Column::Transverse)] {
        let lim = column_integral_limit(m, column);
        let mut last = f64::INFINITY;
        for d in [100u64, 1000, 10_000, 100_000] {
            let (v, _) = column_integral(d, m, column, &q).unwrap();
            let gap = (v - lim).abs();
            assert!(gap < last, "m={m} d={d}");
            last = gap;
        }
        assert!(last < 1e-3 * lim, "m={m} {last}");
    }
    assert!((column_integral_limit(1, I2Column::Radial) - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
}

#[test]
fn second_chaos_bound_sits_below_the_limit() {
    let spec = I2Spec {
        n_mc: 400_000,
        ..Default::default()
    };
    let v1 = v_infinity(1, &VInfSpec::default()).unwrap();
    let b1 = i2d_lower_bound(10_000, 1, &spec).unwrap();
    assert!(b1.value > 5.0 * b1.se);
    assert!(b1.value < v1.value);
    // The Frobenius-form normalization overshoots the limit.
    assert!(b1.value_frobenius - 3.0 * b1.se_frobenius > v1.value);
    let b2 = i2d_lower_bound(10_000, 2, &spec).unwrap();
    assert!(b2.value > 5.0 * b2.se && b2.value < 0.9);
}
