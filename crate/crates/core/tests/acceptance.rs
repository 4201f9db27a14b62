//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS` line (visible with `--nocapture`) and asserting its
//! wall-clock budget. Tolerances are pinned in the constants below.
//!
//! Criterion 12 (run determinism) lives in the CLI crate's acceptance test,
//! next to the binary it exercises.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use krieger_core::analytics::{
    chi, classify, conservativeness_certificate, hellinger_sum, hellinger_zero_block,
    kakutani_series, quadratic_growth_bound, restricted_product_mass, KriegerType,
};
use krieger_core::group::{GroupElement, GroupModel};
use krieger_core::sim::{
    delta1_mass_check, ratio_set_estimate, rn_cocycle, sample_configuration, sample_rng,
    sample_theta_counts, skellam_pmf, skellam_window, RatioSetFinding,
};
use krieger_core::system::{
    build_type_ii_inf, build_type_iii0, build_type_iii1, build_type_iii_lambda, c_of_lambda,
    solve_c_inverse, GeneratorId, Schedule, SystemSpec,
};
use rand::Rng;

fn four_constructions() -> Vec<(&'static str, SystemSpec)> {
    vec![
        ("II_inf", build_type_ii_inf(64).unwrap()),
        ("III_0", build_type_iii0(64, Schedule::Segmented).unwrap()),
        ("III_lambda(0.5)", build_type_iii_lambda(0.5, 64).unwrap()),
        ("III_1(1/2,1/3)", build_type_iii1(0.5, 1.0 / 3.0, 64).unwrap()),
    ]
}

fn shift(s: i64) -> GroupElement {
    GroupElement { coords: vec![s] }
}

fn finish(criterion: u32, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed <= budget,
        "criterion {criterion}: exceeded runtime budget ({elapsed:?} > {budget:?})"
    );
    println!("criterion {criterion}: PASS ({elapsed:?})");
}

#[test]
fn criterion_01_c_function_suite() {
    let t = Instant::now();
    assert_eq!(c_of_lambda(1.0).unwrap(), 0.0);
    let grid = 1_000usize;
    let mut prev = f64::INFINITY;
    for i in 1..grid {
        let lambda = i as f64 / grid as f64;
        let c = c_of_lambda(lambda).unwrap();
        assert!(c < prev, "c not strictly decreasing at λ = {lambda}");
        prev = c;
        // Symmetry c(1/λ)·λ = c(λ).
        let sym = c_of_lambda(1.0 / lambda).unwrap() * lambda;
        assert!((sym - c).abs() <= 1e-12 * c.max(1.0), "symmetry fails at λ = {lambda}");
    }
    for i in 1..grid {
        let lambda = i as f64 / grid as f64;
        let c = c_of_lambda(lambda).unwrap();
        let back = solve_c_inverse(c).unwrap();
        assert!((back - lambda).abs() <= 1e-10, "round-trip off at λ = {lambda}: {back}");
    }
    finish(1, t, Duration::from_secs(1));
}

#[test]
fn criterion_02_folner_validation() {
    let t = Instant::now();
    let report = GroupModel::new(1).unwrap().validate_folner(10_000).unwrap();
    assert!(report.pass, "worst margin {} at (k, n) = ({}, {})",
        report.worst_margin, report.witness_k, report.witness_n);
    finish(2, t, Duration::from_secs(10));
}

#[test]
fn criterion_03_chi_vanishes_exactly() {
    let t = Instant::now();
    for (name, spec) in four_constructions() {
        for k in 1..=100u64 {
            let v = chi(&spec, k).unwrap();
            assert_eq!(v, 0.0, "χ(γ_{k}) ≠ 0 on {name}");
        }
    }
    finish(3, t, Duration::from_secs(10));
}

#[test]
fn criterion_04_conservativeness_and_growth() {
    let t = Instant::now();
    let horizon = 1_000_000u64;
    for (name, spec) in four_constructions() {
        let cert = conservativeness_certificate(&spec, horizon).unwrap();
        assert!(!cert.divergence.is_convergent(), "Σ b_k must diverge on {name}");
        assert!(cert.summability.is_convergent(), "Σ b_k² e^{{B_k}} must converge on {name}");
    }
    // Growth of the certified quadratic-integral majorant: slope 1 against
    // log k for II_inf / III_0, slope 2c(λ) against log log k for III_lambda.
    let probes = [100u64, 1_000, 10_000];
    let cases: [(&str, SystemSpec, fn(f64) -> f64, f64); 3] = [
        ("II_inf", build_type_ii_inf(64).unwrap(), |k: f64| k.ln(), 1.0),
        ("III_0", build_type_iii0(64, Schedule::Segmented).unwrap(), |k: f64| k.ln(), 1.0),
        (
            "III_lambda(0.5)",
            build_type_iii_lambda(0.5, 64).unwrap(),
            |k: f64| k.ln().ln(),
            2.0 * c_of_lambda(0.5).unwrap(),
        ),
    ];
    for (name, spec, x_of, expected) in cases {
        let b: Vec<f64> =
            probes.iter().map(|&k| quadratic_growth_bound(&spec, k).unwrap()).collect();
        let x: Vec<f64> = probes.iter().map(|&k| x_of(k as f64)).collect();
        let fitted = (b[2] - b[0]) / (x[2] - x[0]);
        assert!(
            (fitted - expected).abs() <= 0.1,
            "{name}: fitted slope {fitted} vs expected {expected}"
        );
        // All chords agree with the fitted constant within the tolerance.
        for (i, j) in [(0usize, 1usize), (1, 2)] {
            let chord = (b[j] - b[i]) / (x[j] - x[i]);
            assert!(
                (chord - fitted).abs() <= 0.1,
                "{name}: chord {chord} drifts from fitted {fitted}"
            );
        }
    }
    finish(4, t, Duration::from_secs(300));
}

/// Hellinger distance between Poisson(μ) and Poisson(ν) by direct pmf
/// summation: H² = 1 − Σ_k √(p_μ(k) p_ν(k)), summed to numerical exhaustion.
fn hellinger_by_pmf(mu: f64, nu: f64) -> f64 {
    let mut affinity = 0.0f64;
    // √(p_μ(k) p_ν(k)) = e^{−(μ+ν)/2} (√(μν))^k / k!
    let mut term = (-(mu + nu) / 2.0).exp();
    let root = (mu * nu).sqrt();
    let mut k = 0u64;
    loop {
        affinity += term;
        k += 1;
        term *= root / k as f64;
        if term < 1e-18 * affinity.max(1e-300) || k > 10_000 {
            break;
        }
    }
    1.0 - affinity
}

#[test]
fn criterion_05_hellinger_closed_form_and_ii_inf_verdicts() {
    let t = Instant::now();
    // 10³ parameter points: closed form vs pmf integration to 1e-10.
    let spec = build_type_ii_inf(64).unwrap();
    let mut checked = 0usize;
    for i in 1..=1_000u64 {
        let mu = i as f64 * 5.0e-3;
        // Block-zero comparison: Poisson(μ) against the empty process.
        let closed = 1.0 - (-mu / 2.0).exp();
        assert!(
            (closed - hellinger_by_pmf(mu, 0.0)).abs() <= 1e-10,
            "closed form vs pmf off at μ = {mu}"
        );
        checked += 1;
    }
    assert_eq!(checked, 1_000);
    // The construction's own block values go through the same closed form.
    for n in 1..=64 {
        let h = hellinger_zero_block(&spec, n).unwrap();
        let mu = spec.block(n).unwrap().mu_tower();
        assert!((h - hellinger_by_pmf(mu, 0.0)).abs() <= 1e-10);
    }
    let horizon = 1_000_000u64;
    let hs = hellinger_sum(&spec, horizon).unwrap();
    assert!(hs.is_convergent(), "Hellinger sum must converge for II_inf");
    assert!(hs.tail_upper.is_finite());
    let mass = restricted_product_mass(&spec, horizon).unwrap();
    assert!(!mass.is_convergent(), "Σ ν(A_n) must diverge for II_inf");
    assert!(mass.tail_lower.is_infinite(), "divergence needs an infinite certified minorant");
    finish(5, t, Duration::from_secs(30));
}

#[test]
fn criterion_06_kakutani_diverges_for_iii0() {
    let t = Instant::now();
    let spec = build_type_iii0(64, Schedule::Segmented).unwrap();
    let v = kakutani_series(&spec, 1_000_000).unwrap();
    assert!(!v.is_convergent());
    assert!(v.tail_lower.is_infinite(), "divergence needs an infinite certified minorant");
    finish(6, t, Duration::from_secs(30));
}

#[test]
fn criterion_07_rn_unit_expectation() {
    let t = Instant::now();
    for (name, spec) in four_constructions() {
        let est =
            krieger_core::sim::estimate_rn_expectation(&spec, 50, 1_000_000, 2024).unwrap();
        assert!(
            (est.mean - 1.0).abs() <= 4.0 * est.std_error,
            "{name}: mean {} ± {} strays from 1",
            est.mean,
            est.std_error
        );
    }
    finish(7, t, Duration::from_secs(120));
}

fn tv_distance(counts: &BTreeMap<i64, u64>, mu1: f64, mu2: f64) -> f64 {
    let total: u64 = counts.values().sum();
    let lo = counts.keys().next().copied().unwrap() - 40;
    let hi = counts.keys().next_back().copied().unwrap() + 40;
    let mut tv = 0.0;
    let mut pmf_mass = 0.0;
    for k in lo..=hi {
        let p = skellam_pmf(k, mu1, mu2);
        pmf_mass += p;
        let emp = counts.get(&k).map_or(0.0, |&c| c as f64 / total as f64);
        tv += (emp - p).abs();
    }
    0.5 * (tv + (1.0 - pmf_mass).max(0.0))
}

#[test]
fn criterion_08_skellam_suite() {
    let t = Instant::now();
    for (i, lambda) in [0.3f64, 0.5, 0.8].into_iter().enumerate() {
        let spec = build_type_iii_lambda(lambda, 64).unwrap();
        let window = skellam_window(&spec, 1).unwrap();
        assert!(
            window.alpha_n > 0.5 && window.alpha_n < 1.0,
            "α = {} outside (0.5, 1) at λ = {lambda}",
            window.alpha_n
        );
        let d1 = delta1_mass_check(&spec, &window).unwrap();
        assert!(d1.pass, "unit-mass chain fails at λ = {lambda}: {d1:?}");
        assert!(d1.pmf1 > d1.analytic_lower && d1.analytic_lower > 1.0 / 16.0);
        assert!(d1.pmf0 > d1.pmf1);
        let counts = sample_theta_counts(&spec, &window, 1_000_000, 31 + i as u64).unwrap();
        let tv = tv_distance(&counts, window.alpha_n, lambda * window.alpha_n);
        assert!(tv < 5e-3, "TV distance {tv} too large at λ = {lambda}");
    }
    finish(8, t, Duration::from_secs(540));
}

#[test]
fn criterion_09_lattice_exactness() {
    let t = Instant::now();
    let elements: Vec<GroupElement> = (1..=10u64)
        .map(|k| GroupModel::new(1).unwrap().enumerate(k).unwrap())
        .collect();

    // III_lambda: every value in (log λ)·Z, integer-exact.
    let spec = build_type_iii_lambda(0.5, 32).unwrap();
    let est = ratio_set_estimate(&spec, &elements, 100_000, 5, None).unwrap();
    match est.finding {
        RatioSetFinding::Lattice { base, exponent_gcd, fitted_lambda, .. } => {
            assert_eq!(base, 0.5);
            assert!(exponent_gcd != 0);
            assert_eq!(fitted_lambda, 0.5f64.powi(exponent_gcd as i32));
        }
        other => panic!("expected a lattice finding for III_lambda, got {other:?}"),
    }
    assert!(est.observations_nonzero > 0);

    // III_1(1/2, 1/3): two rationally independent generators → DENSE.
    let spec = build_type_iii1(0.5, 1.0 / 3.0, 32).unwrap();
    let est = ratio_set_estimate(&spec, &elements, 100_000, 5, None).unwrap();
    match est.finding {
        RatioSetFinding::Dense { generators } => assert!(generators.len() >= 2),
        other => panic!("expected a dense finding for III_1, got {other:?}"),
    }

    // III_0 conditioned on the first block: values confined to the lattice
    // of the next level — every exponent divisible by that level.
    let spec = build_type_iii0(16, Schedule::Explicit { levels: vec![1, 2] }).unwrap();
    let zero: BTreeSet<u64> = [1u64].into_iter().collect();
    let est = ratio_set_estimate(&spec, &elements, 100_000, 5, Some(&zero)).unwrap();
    match est.finding {
        RatioSetFinding::Lattice { base, exponent_gcd, .. } => {
            assert_eq!(base, 2.0);
            assert_eq!(exponent_gcd % 2, 0, "conditioned exponents must sit in 2·Z");
        }
        other => panic!("expected a conditioned lattice finding for III_0, got {other:?}"),
    }
    finish(9, t, Duration::from_secs(300));
}

#[test]
fn criterion_10_cocycle_identity() {
    let t = Instant::now();
    let spec = build_type_iii1(0.5, 1.0 / 3.0, 16).unwrap();
    let mut rng = sample_rng(99, 0);
    let mut tested = 0u64;
    let mut valid = 0u64;
    // Strict truncation flags discard most triples (any point whose image
    // leaves the modeled window invalidates the evaluation), so draw until
    // 10⁴ fully evaluable triples have been checked.
    while valid < 10_000 && tested < 2_000_000 {
        let gs: i64 = rng.gen_range(-3..=3);
        let hs: i64 = rng.gen_range(-3..=3);
        let idx: u64 = rng.gen_range(0..1_000_000);
        tested += 1;
        let omega = sample_configuration(&spec, 10, 8, 47, idx).unwrap();
        let (g, h, gh) = (shift(gs), shift(hs), shift(gs + hs));
        let c_h = rn_cocycle(&spec, &h, &omega).unwrap();
        let h_omega = omega.translate(&spec, &h).unwrap();
        let c_g = rn_cocycle(&spec, &g, &h_omega).unwrap();
        let c_gh = rn_cocycle(&spec, &gh, &omega).unwrap();
        if !(c_h.truncation_valid && c_g.truncation_valid && c_gh.truncation_valid) {
            continue;
        }
        valid += 1;
        for gen in [GeneratorId(0), GeneratorId(1)] {
            assert_eq!(
                c_gh.exponent_of(gen),
                c_g.exponent_of(gen) + c_h.exponent_of(gen),
                "cocycle identity violated at (g, h, ω) = ({gs}, {hs}, {idx})"
            );
        }
    }
    assert_eq!(valid, 10_000, "only {valid} evaluable triples out of {tested} draws");
    finish(10, t, Duration::from_secs(60));
}

#[test]
fn criterion_11_classification() {
    let t = Instant::now();
    let horizon = 1_000_000u64;
    assert_eq!(
        classify(&build_type_ii_inf(64).unwrap(), horizon).unwrap().krieger_type,
        KriegerType::IiInf
    );
    assert_eq!(
        classify(&build_type_iii0(64, Schedule::Segmented).unwrap(), horizon)
            .unwrap()
            .krieger_type,
        KriegerType::Iii0
    );
    assert_eq!(
        classify(&build_type_iii_lambda(0.5, 64).unwrap(), horizon).unwrap().krieger_type,
        KriegerType::IiiLambda(0.5)
    );
    assert_eq!(
        classify(&build_type_iii1(0.5, 1.0 / 3.0, 64).unwrap(), horizon)
            .unwrap()
            .krieger_type,
        KriegerType::Iii1
    );
    // Starved horizon: the III_0 lattice shrinkage needs the first level
    // rise (block 55); below that the classifier must refuse to guess.
    assert_eq!(
        classify(&build_type_iii0(64, Schedule::Segmented).unwrap(), 40)
            .unwrap()
            .krieger_type,
        KriegerType::Undetermined
    );
    // A bounded explicit schedule can never witness shrinkage.
    assert_eq!(
        classify(&build_type_iii0(64, Schedule::Explicit { levels: vec![2] }).unwrap(), horizon)
            .unwrap()
            .krieger_type,
        KriegerType::Undetermined
    );
    finish(11, t, Duration::from_secs(60));
}
