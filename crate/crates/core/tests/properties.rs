//! Property tests for the structural invariants: algebraic identities of
//! the density coefficient, exact block pairing, group axioms, Følner
//! combinatorics against brute force, pmf normalization, and determinism
//! of the samplers.

use proptest::prelude::*;

use krieger_core::group::{GroupElement, GroupModel};
use krieger_core::sim::{rn_block_density, sample_configuration, skellam_pmf};
use krieger_core::system::{
    build_type_iii_lambda, c_of_lambda, c_of_lambda_poly, solve_c_inverse,
};

proptest! {
    // c(1/λ)·λ = c(λ), and the factored and polynomial forms agree.
    #[test]
    fn c_symmetry_and_dual_forms(lambda in 1e-3f64..0.999) {
        let c = c_of_lambda(lambda).unwrap();
        prop_assert!(c > 0.0);
        let sym = c_of_lambda(1.0 / lambda).unwrap() * lambda;
        prop_assert!((sym - c).abs() <= 1e-11 * c.max(1.0));
        let poly = c_of_lambda_poly(lambda).unwrap();
        prop_assert!((poly - c).abs() <= 1e-9 * c.max(1.0));
    }

    // Strict monotonicity on (0,1): λ₁ < λ₂ ⇒ c(λ₁) > c(λ₂).
    #[test]
    fn c_strictly_decreasing(a in 1e-3f64..0.998, delta in 1e-4f64..0.5) {
        let b = (a + delta).min(0.9995);
        prop_assume!(b > a);
        prop_assert!(c_of_lambda(a).unwrap() > c_of_lambda(b).unwrap());
    }

    // Inversion round-trip over ten orders of magnitude of targets.
    #[test]
    fn c_inverse_round_trip(log_target in -6.0f64..6.0) {
        let target = log_target.exp();
        let lambda = solve_c_inverse(target).unwrap();
        prop_assert!(lambda > 0.0 && lambda < 1.0);
        let back = c_of_lambda(lambda).unwrap();
        prop_assert!((back - target).abs() <= 1e-9 * target.max(1.0));
    }

    // Exact block pairing of the two-sided construction: the heavier mate
    // carries exactly the μ-mass of its partner, making Σ(μ_n − ν_n)
    // telescope pairwise.
    #[test]
    fn paired_blocks_telescope(lambda in 0.05f64..0.95, k in 1u64..200) {
        let spec = build_type_iii_lambda(lambda, 512).unwrap();
        let odd = spec.block(2 * k - 1).unwrap();
        let even = spec.block(2 * k).unwrap();
        prop_assert!((odd.mu_tower() - even.nu_tower).abs() <= 4.0 * f64::EPSILON * even.nu_tower);
        prop_assert!((even.mu_tower() - odd.nu_tower).abs() <= 4.0 * f64::EPSILON * odd.nu_tower);
    }

    // The Skellam pmf is a probability distribution and obeys the swap
    // symmetry pmf(k; μ₁, μ₂) = pmf(−k; μ₂, μ₁).
    #[test]
    fn skellam_pmf_normalized_and_symmetric(mu1 in 0.01f64..3.0, mu2 in 0.01f64..3.0) {
        let mut total = 0.0;
        for k in -60i64..=60 {
            let p = skellam_pmf(k, mu1, mu2);
            prop_assert!(p >= 0.0);
            let swapped = skellam_pmf(-k, mu2, mu1);
            prop_assert!((p - swapped).abs() <= 1e-14 * p.max(1e-300));
            total += p;
        }
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    // Group axioms for the integer lattice model.
    #[test]
    fn group_axioms(a in proptest::collection::vec(-50i64..50, 1..=3),
                    b in proptest::collection::vec(-50i64..50, 1..=3)) {
        prop_assume!(a.len() == b.len());
        let rank = a.len();
        let g = GroupElement { coords: a };
        let h = GroupElement { coords: b };
        let e = GroupElement::identity(rank);
        prop_assert_eq!(g.compose(&e), g.clone());
        prop_assert_eq!(g.compose(&g.inverse()), e);
        prop_assert_eq!(g.compose(&h).inverse(), h.inverse().compose(&g.inverse()));
    }

    // The closed-form symmetric-difference count matches brute force on
    // small boxes, and the flux count is exactly half of it.
    #[test]
    fn symdiff_closed_form_matches_brute_force(n in 1u64..5, s1 in -30i64..30, s2 in -30i64..30) {
        let model = GroupModel::new(2).unwrap();
        let g = GroupElement { coords: vec![s1, s2] };
        let the_box = model.folner_set(n).unwrap();
        let pts: std::collections::HashSet<Vec<i64>> = the_box.points().into_iter().collect();
        let mut brute = 0u128;
        for p in &pts {
            let shifted: Vec<i64> = p.iter().zip(&g.coords).map(|(x, d)| x + d).collect();
            if !pts.contains(&shifted) {
                brute += 2; // the pair (shifted-out, uncovered) counts twice
            }
        }
        prop_assert_eq!(model.symdiff_count(&g, n).unwrap(), brute);
        prop_assert_eq!(model.flux_count(&g, n).unwrap(), brute / 2);
    }

    // The sampler is a pure function of (seed, sample index).
    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), idx in 0u64..1_000_000) {
        let spec = build_type_iii_lambda(0.5, 16).unwrap();
        let a = sample_configuration(&spec, 8, 2, seed, idx).unwrap();
        let b = sample_configuration(&spec, 8, 2, seed, idx).unwrap();
        prop_assert_eq!(a.counts, b.counts);
    }

    // Block densities are positive and sit exactly on the generator lattice.
    #[test]
    fn rn_block_density_on_lattice(k in 0u64..20, n in 1u64..30) {
        let spec = build_type_iii_lambda(0.5, 64).unwrap();
        let d = rn_block_density(&spec, n, k).unwrap();
        prop_assert!(d > 0.0);
        let b = spec.block(n).unwrap();
        let expected = (b.mu_tower() - b.nu_tower).exp() * b.lambda.powi(-(k as i32));
        prop_assert!((d - expected).abs() <= 1e-12 * expected);
    }
}
