//! Acceptance criteria 1-10. Each criterion prints one PASS/FAIL line to
//! stderr (bypassing the test harness capture) and the test fails if any
//! criterion outside `KNOWN_UNATTAINABLE` fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use common::{companion_real_roots, resultant_count_2x2};
use kss_core::asymptotics::{m_kj, rho_bar, sigma_bar_sq, v_infinity, VInfSpec};
use kss_core::hermite::{
    b_coefficient, b_eps, f_coefficients, f_tilde_22, hermite_eval, i2d_lower_bound, mehler_h2, I2Spec,
};
use kss_core::kacrice::{decay_check, g_functional, symmetrization_gap, variance_finite_d, KacRiceSpec, Kernel};
use kss_core::kss::System;
use kss_core::numerics::gauss_hermite;
use kss_core::numerics::special::factorial;
use kss_core::rootcount::{certified_real_count, count_system, count_univariate_with, UnivariateMethod, UnivariateOptions};
use kss_engine::experiment::moments_in_memory;
use kss_engine::{run_experiment, ExperimentConfig, MomentSummary, RunOptions};

/// Criteria that cannot hold as stated; they are run and reported but do
/// not fail the test.
///
/// 6: the correlation bound `|rho| <= C (1 + z^2)^2 exp(-2 alpha z^2)`
/// needs `alpha <= 1/4`, since `rho ~ (1 - z^2) exp(-z^2 / 2)`; at
/// `alpha = 0.4` the ratio grows without bound along the grid. The other
/// items of the criterion are asserted separately below.
const KNOWN_UNATTAINABLE: [u32; 1] = [6];

const SEED: u64 = 20_240_601;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    secs: f64,
}

fn report(o: &Outcome) {
    let status = if o.pass { "PASS" } else { "FAIL" };
    let note = if !o.pass && KNOWN_UNATTAINABLE.contains(&o.id) { " (known unattainable)" } else { "" };
    let _ = writeln!(
        std::io::stderr(),
        "criterion {:>2} {:<28} {status}{note} [{:.1}s] {}",
        o.id,
        o.name,
        o.secs,
        o.detail
    );
}

fn within(x: f64, target: f64, se: f64, k: f64) -> bool {
    (x - target).abs() <= k * se
}

fn mean_law(runs: &[MomentSummary]) -> (bool, String) {
    let mut ok = true;
    let mut worst = 0.0f64;
    for r in runs {
        let z = (r.scaled_mean - 1.0).abs() / r.scaled_mean_se;
        worst = worst.max(z);
        ok &= z <= 3.0;
    }
    (ok, format!("{} runs, worst |mean/d^(m/2) - 1| = {worst:.2} SE", runs.len()))
}

fn dual_route(runs: &[MomentSummary]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in runs.iter().filter(|r| r.m == 1 && (r.d == 10 || r.d == 50)) {
        let kr = variance_finite_d(r.d as u64, 1, &KacRiceSpec::default()).unwrap();
        let z = (r.scaled_variance - kr.value).abs() / r.scaled_variance_se;
        ok &= z <= 3.0;
        parts.push(format!("d={}: MC {:.4} vs KR {:.4} ({z:.2} SE)", r.d, r.scaled_variance, kr.value));
    }
    (ok && parts.len() == 2, parts.join("; "))
}

fn convergence() -> (bool, String) {
    let v = v_infinity(1, &VInfSpec::default()).unwrap();
    let err = v.quadrature_error.hypot(v.mc_error);
    let mut gaps = Vec::new();
    for d in [100u64, 1000, 10_000] {
        let f = variance_finite_d(d, 1, &KacRiceSpec::default()).unwrap();
        gaps.push((f.value - v.value).abs());
    }
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let rel = gaps[2] / v.value;
    let ok = monotone && rel < 0.02 && err < 0.005 * v.value;
    (
        ok,
        format!(
            "V_inf(1) = {:.7} +- {err:.1e}; gaps {:.2e} {:.2e} {:.2e}; final rel gap {rel:.1e}",
            v.value, gaps[0], gaps[1], gaps[2]
        ),
    )
}

fn positivity_chain() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [1usize, 2] {
        let v = v_infinity(m, &VInfSpec::default()).unwrap();
        let b = i2d_lower_bound(10_000, m, &I2Spec::default()).unwrap();
        let v_err = v.quadrature_error.hypot(v.mc_error);
        let combined = v_err.hypot(b.se);
        let pos = b.value > 5.0 * b.se;
        let below = b.value <= v.value + combined;
        ok &= pos && below;
        parts.push(format!(
            "m={m}: i2d {:.4} +- {:.4} <= V_inf {:.4} +- {:.4}",
            b.value, b.se, v.value, v_err
        ));
    }
    (ok, parts.join("; "))
}

fn kernel_limits() -> (bool, String) {
    let d = 1_000_000;
    let mut worst = [0.0f64; 5];
    for z in [0.25, 0.5, 1.0, 2.0, 4.0f64] {
        let k = Kernel::<f64>::new(z, d).unwrap();
        let g = (-0.5 * z * z).exp();
        let errs = [
            (k.a + z * g).abs(),
            (k.b - (1.0 - z * z) * g).abs(),
            (k.c - g).abs(),
            (k.sigma_sq - sigma_bar_sq(z).unwrap()).abs(),
            (k.rho - rho_bar(z).unwrap()).abs(),
        ];
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
    }
    let ok = worst[0] < 1e-3 && worst[1] < 1e-3 && worst[2] < 1e-4 && worst[3] < 1e-3 && worst[4] < 1e-3;
    (
        ok,
        format!(
            "max errors A {:.1e} B {:.1e} C {:.1e} sigma^2 {:.1e} rho {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

/// Returns `(all items hold, all items except the rho bound hold, detail)`.
fn bound_suite() -> (bool, bool, String) {
    const ALPHA: f64 = 0.4;
    const DS: [u64; 10] = [17, 20, 30, 50, 100, 300, 1000, 5000, 20_000, 100_000];
    let (mut basic, mut sig, mut rho, mut gap) = (true, 0.0f64, 0.0f64, f64::INFINITY);
    for &d in &DS {
        let zmax = (d as f64).sqrt() * PI / 2.0;
        for i in 1..=50 {
            let z = zmax * i as f64 / 50.0;
            let c = decay_check(z, d, ALPHA).unwrap();
            basic &= c.inequalities_hold();
            sig = sig.max(c.sigma_constant);
            rho = rho.max(c.rho_constant);
            if z >= 1.0 {
                gap = gap.min(c.gap);
            }
        }
    }
    let mut sym = 0.0f64;
    for d in [17u64, 50, 400, 5000] {
        let zmax = (d as f64).sqrt() * PI / 2.0;
        for i in 1..=20 {
            sym = sym.max(symmetrization_gap(zmax * i as f64 / 20.0, d).unwrap());
        }
    }
    // Uniform constants: anything of order one passes; the rho constant is
    // reported as found.
    let sigma_ok = sig < 10.0;
    let rho_ok = rho < 10.0;
    let rest = basic && sigma_ok && gap > 0.1 && sym < 1e-8;
    (
        rest && rho_ok,
        rest,
        format!(
            "C<=D, D<=e^(-az^2), |A|, |B| bounds: {}; sigma const {sig:.2}; gap(z>=1) {gap:.3}; \
             rho const {rho:.2e}{}; symmetrization {sym:.1e}",
            if basic { "hold" } else { "VIOLATED" },
            if rho_ok { "" } else { " (unbounded)" }
        ),
    )
}

fn g_identities() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in 1..=3usize {
        let chi: f64 = (1..=m).map(|k| m_kj(k, 1).unwrap()).product();
        let (g0, s0) = g_functional(0.0, 0.0, m, 400_000, SEED + m as u64).unwrap();
        let (g1, s1) = g_functional(1.0, 1.0, m, 400_000, SEED + 10 + m as u64).unwrap();
        let fact = factorial(m as u64);
        let a = within(g0, chi * chi, s0, 3.0) || (s0 == 0.0 && (g0 - chi * chi).abs() < 1e-12);
        let b = within(g1, fact, s1, 3.0) || (s1 == 0.0 && (g1 - fact).abs() < 1e-12);
        ok &= a && b;
        parts.push(format!("m={m}: G(0,0) {g0:.4}/{:.4}, G(1,1) {g1:.4}/{fact}", chi * chi));
    }
    (ok, parts.join("; "))
}

fn hermite_suite() -> (bool, String) {
    // Recurrence: explicit polynomials at integer points are exact in f64.
    let explicit = |n: usize, x: f64| match n {
        0 => 1.0,
        1 => x,
        2 => x * x - 1.0,
        3 => x * x * x - 3.0 * x,
        4 => x.powi(4) - 6.0 * x * x + 3.0,
        5 => x.powi(5) - 10.0 * x.powi(3) + 15.0 * x,
        _ => unreachable!(),
    };
    let recurrence = (0..=5).all(|n| (-4..=4).all(|x| hermite_eval(n, x as f64) == explicit(n, x as f64)));

    let (x, w) = gauss_hermite(200);
    let mut orth = 0.0f64;
    for n in 0..=10 {
        for k in 0..=10 {
            let s: f64 = x.iter().zip(&w).map(|(&x, &w)| w * hermite_eval(n, x) * hermite_eval(k, x)).sum();
            let s = s / (factorial(n as u64) * factorial(k as u64)).sqrt();
            orth = orth.max((s - if n == k { 1.0 } else { 0.0 }).abs());
        }
    }

    let mut mehler = true;
    for (i, rho) in [-0.7, 0.3, 0.9].into_iter().enumerate() {
        let (h, se) = mehler_h2(rho, 400_000, SEED + i as u64).unwrap();
        mehler &= within(h, 2.0 * rho * rho, se, 3.0);
    }

    let mut beps = 0.0f64;
    for a in [vec![0u32], vec![2], vec![4], vec![0, 2], vec![2, 2]] {
        beps = beps.max((b_eps(&a, 1e-3).unwrap() - b_coefficient(&a)).abs());
    }

    // Symmetry over the entry carrying the 2, and vanishing for odd groups.
    let m = 2;
    let mut betas: Vec<Vec<u32>> = (0..m * m)
        .map(|p| {
            let mut b = vec![0; m * m];
            b[p] = 2;
            b
        })
        .collect();
    betas.extend([vec![1, 0, 1, 0], vec![1, 1, 0, 0], vec![3, 0, 1, 0], vec![1, 0, 0, 1], vec![1, 0, 0, 0]]);
    let f = f_coefficients(&betas, m, 400_000, SEED).unwrap();
    let symmetric = f[1..4]
        .iter()
        .all(|e| (e.value - f[0].value).abs() <= 3.0 * e.se.hypot(f[0].se));
    let vanish = f[4..].iter().all(|e| e.value.abs() <= 3.0 * e.se);

    let mut positive = true;
    let mut ft = Vec::new();
    for m in 1..=3 {
        let t = f_tilde_22(m, 400_000, SEED + m as u64).unwrap();
        positive &= t.coefficient.value > 5.0 * t.coefficient.se;
        ft.push(format!("{:.4}", t.coefficient.value));
    }
    let ok = recurrence && orth < 1e-10 && mehler && beps < 1e-3 && symmetric && vanish && positive;
    (
        ok,
        format!(
            "recurrence {recurrence}; GH orth {orth:.1e}; Mehler {mehler}; b_eps err {beps:.1e}; \
             symmetry {symmetric}; odd vanish {vanish}; f~ = [{}]",
            ft.join(", ")
        ),
    )
}

fn root_counting(runs: &[MomentSummary]) -> (bool, String) {
    let sturm = UnivariateOptions {
        method: UnivariateMethod::Sturm,
        ..Default::default()
    };
    let (mut uni_ok, mut escalated) = (true, 0);
    for i in 0..1000u64 {
        let s = System::<f64>::sample(1, 20, SEED + i).unwrap();
        let a = s.equation(0);
        let r = count_univariate_with(a, &sturm).unwrap();
        let eig = companion_real_roots(a, 1e-8).len() as u64;
        let agree = if eig == r.count {
            true
        } else {
            escalated += 1;
            certified_real_count(a) == Some(r.count as usize)
        };
        uni_ok &= agree && r.certified && r.count <= 20;
    }
    let mut sys_ok = true;
    for i in 0..200u64 {
        let s = System::<f64>::sample(2, 2, SEED + 5000 + i).unwrap();
        let r = count_system(&s).unwrap();
        sys_ok &= r.certified && r.count <= 4 && r.count as usize == resultant_count_2x2(&s);
    }
    let capped = runs.iter().all(|r| r.max_count <= r.bezout_cap);
    let uncertified: usize = runs.iter().map(|r| r.uncertified).sum();
    (
        uni_ok && sys_ok && capped && uncertified == 0,
        format!(
            "Sturm vs eigenvalues 1000/1000 {uni_ok} ({escalated} escalated); resultant 200/200 {sys_ok}; \
             counts <= d^m {capped}; uncertified {uncertified}"
        ),
    )
}

fn determinism() -> (bool, String) {
    let tmp = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for w in [1usize, 4, 8] {
        let c = ExperimentConfig {
            m: 2,
            d: vec![2, 3],
            n_samples: 300,
            master_seed: SEED,
            workers: w,
            out_dir: tmp.path().join(format!("w{w}")),
            ..Default::default()
        };
        let r = run_experiment(&c, &RunOptions::default()).unwrap();
        texts.push(std::fs::read(&r.aggregate_path).unwrap());
    }
    let ok = texts[0] == texts[1] && texts[0] == texts[2];
    (ok, format!("aggregate.json byte-identical for workers 1, 4, 8: {ok}"))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

#[test]
fn acceptance_criteria() {
    let mut outcomes = Vec::new();
    let mut push = |id, name, pass, detail, secs| {
        let o = Outcome {
            id,
            name,
            pass,
            detail,
            secs,
        };
        report(&o);
        outcomes.push(o);
    };

    let (runs, t_runs) = timed(|| {
        let mut runs = Vec::new();
        for d in [2u32, 10, 50, 200] {
            runs.push(moments_in_memory(1, d, 10_000, SEED, 0).unwrap());
        }
        for d in [2u32, 3, 5] {
            runs.push(moments_in_memory(2, d, 2000, SEED, 0).unwrap());
        }
        runs
    });
    let ((p, s), t) = timed(|| mean_law(&runs));
    push(1, "mean law", p, s, t + t_runs);
    let ((p, s), t) = timed(|| dual_route(&runs));
    push(2, "dual-route variance", p, s, t);
    let ((p, s), t) = timed(convergence);
    push(3, "convergence to the limit", p, s, t);
    let ((p, s), t) = timed(positivity_chain);
    push(4, "positivity chain", p, s, t);
    let ((p, s), t) = timed(kernel_limits);
    push(5, "kernel limits", p, s, t);
    let ((all, rest, s), t) = timed(bound_suite);
    push(6, "bound suite", all, s, t);
    let ((p, s), t) = timed(g_identities);
    push(7, "G identities", p, s, t);
    let ((p, s), t) = timed(hermite_suite);
    push(8, "Hermite suite", p, s, t);
    let ((p, s), t) = timed(|| root_counting(&runs));
    push(9, "root counting integrity", p, s, t);
    let ((p, s), t) = timed(determinism);
    push(10, "determinism", p, s, t);

    let failed: Vec<u32> = outcomes
        .iter()
        .filter(|o| !o.pass && !KNOWN_UNATTAINABLE.contains(&o.id))
        .map(|o| o.id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
    // Everything in criterion 6 apart from the rho bound must still hold.
    assert!(rest, "criterion 6 failed beyond the known rho bound");
}
