//! Property tests for the exact invariants of the data layer, the Cox
//! profile likelihood, the sampler, and the quantile machinery.

mod common;

use proptest::prelude::*;

use common::dataset;
use proflik::{
    discretized_information, run_chain, Chain, ChainConfig, CoxProfile, Dataset, DiffScheme,
    InfoStep, Observation, PoProfile, ProposalScale,
};

fn arb_rows(max_n: usize) -> impl Strategy<Value = Vec<(f64, bool, f64)>> {
    prop::collection::vec(
        (0.01f64..20.0, any::<bool>(), -3.0f64..3.0),
        2..max_n,
    )
}

/// at least one event and distinct covariates, so the Cox fit is well posed
fn arb_cox_rows() -> impl Strategy<Value = Vec<(f64, bool, f64)>> {
    arb_rows(30).prop_map(|mut rows| {
        rows[0].1 = true;
        rows
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sort_preserves_the_row_multiset(rows in arb_rows(60)) {
        let d = dataset(&rows);
        let s = d.sort_by_time();
        prop_assert!(s.is_sorted_by_time());
        prop_assert_eq!(s.sort_by_time(), s.clone());
        let mut before: Vec<_> = rows.clone();
        let mut after: Vec<_> = s
            .observations()
            .iter()
            .map(|o| (o.time(), o.event(), o.covariate()))
            .collect();
        let key = |r: &(f64, bool, f64)| (r.0.to_bits(), r.1, r.2.to_bits());
        before.sort_by_key(key);
        after.sort_by_key(key);
        prop_assert_eq!(before, after);
        prop_assert_eq!(d.event_count(), s.event_count());
    }

    #[test]
    fn csv_round_trips_exactly(rows in arb_rows(40), tag in 0u32..1_000_000) {
        let d = dataset(&rows);
        let path = std::env::temp_dir().join(format!(
            "proflik-prop-{}-{tag}.csv",
            std::process::id()
        ));
        d.save_csv(&path).unwrap();
        let back = Dataset::load_csv(&path).unwrap();
        std::fs::remove_file(&path).ok();
        prop_assert_eq!(d.observations(), back.observations());
    }

    #[test]
    fn cox_loglik_is_translation_invariant(
        rows in arb_cox_rows(),
        theta in -3.0f64..3.0,
        shift in -5.0f64..5.0,
    ) {
        let p0 = CoxProfile::new(dataset(&rows)).unwrap();
        let shifted: Vec<_> = rows.iter().map(|&(t, e, z)| (t, e, z + shift)).collect();
        let p1 = CoxProfile::new(dataset(&shifted)).unwrap();
        let a = p0.log_profile_lik(theta);
        let b = p1.log_profile_lik(theta);
        prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn cox_loglik_depends_only_on_time_ranks(
        rows in arb_cox_rows(),
        theta in -3.0f64..3.0,
    ) {
        let p0 = CoxProfile::new(dataset(&rows)).unwrap();
        // strictly increasing transforms of time
        let affine: Vec<_> = rows.iter().map(|&(t, e, z)| (2.5 * t + 1.0, e, z)).collect();
        let expm1: Vec<_> = rows.iter().map(|&(t, e, z)| (t.exp_m1(), e, z)).collect();
        for transformed in [affine, expm1] {
            let p1 = CoxProfile::new(dataset(&transformed)).unwrap();
            let a = p0.log_profile_lik(theta);
            let b = p1.log_profile_lik(theta);
            prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
            let (s0, c0) = p0.score_and_curvature(theta);
            let (s1, c1) = p1.score_and_curvature(theta);
            prop_assert!((s0 - s1).abs() < 1e-10);
            prop_assert!((c0 - c1).abs() < 1e-10);
        }
    }

    #[test]
    fn cox_curvature_is_nonpositive(rows in arb_cox_rows(), theta in -3.0f64..3.0) {
        let p = CoxProfile::new(dataset(&rows)).unwrap();
        let (_, curvature) = p.score_and_curvature(theta);
        prop_assert!(curvature <= 1e-12, "curvature {}", curvature);
    }

    #[test]
    fn breslow_mass_counts_events(rows in arb_cox_rows(), theta in -2.0f64..2.0) {
        let p = CoxProfile::new(dataset(&rows)).unwrap();
        let f = p.breslow(theta);
        // jump times are exactly the distinct event times
        let mut events: Vec<f64> = rows.iter().filter(|r| r.1).map(|r| r.0).collect();
        events.sort_by(f64::total_cmp);
        events.dedup();
        prop_assert_eq!(f.jump_times(), &events[..]);
        // at theta = 0 the total mass telescopes over reciprocal risk sizes
        if theta == 0.0 {
            let n = rows.len() as f64;
            prop_assert!(f.total_mass() <= n);
        }
        prop_assert!(f.jump_sizes().iter().all(|&s| s > 0.0));
    }

    #[test]
    fn chain_is_a_pure_function_of_the_seed(seed in any::<u64>()) {
        let mut cfg = ChainConfig::new(seed);
        cfg.length = 400;
        cfg.burn_in = 100;
        let a = run_chain(|t| -0.5 * t * t, &cfg).unwrap();
        let b = run_chain(|t| -0.5 * t * t, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn constant_posterior_shift_is_invisible(
        seed in any::<u64>(),
        shift in -100.0f64..100.0,
    ) {
        let mut cfg = ChainConfig::new(seed);
        cfg.length = 400;
        cfg.burn_in = 100;
        cfg.proposal_sd = ProposalScale::Fixed(0.7);
        let a = run_chain(|t| -0.5 * t * t, &cfg).unwrap();
        let b = run_chain(|t| -0.5 * t * t + shift, &cfg).unwrap();
        prop_assert_eq!(a.draws, b.draws);
    }

    #[test]
    fn quantiles_are_monotone_and_hit_the_median(
        draws in prop::collection::vec(-50.0f64..50.0, 100..400),
    ) {
        let chain = Chain {
            draws,
            accept_rate: 0.3,
            proposal_sd_used: 1.0,
            seed: 0,
            warning: None,
        };
        let s = proflik::summarize(&chain, 10).unwrap();
        prop_assert_eq!(s.quantile(0.5), s.median);
        let mut prev = f64::NEG_INFINITY;
        for k in 1..40 {
            let q = s.quantile(k as f64 / 40.0);
            prop_assert!(q >= prev);
            prev = q;
        }
    }

    #[test]
    fn discretized_information_is_exact_on_quadratics(
        info in 0.01f64..50.0,
        center in -5.0f64..5.0,
        step in prop::option::of(1e-4f64..1.0),
        n in 10usize..5000,
    ) {
        let logpl = move |t: f64| -0.5 * n as f64 * info * (t - center) * (t - center);
        let rule = match step {
            Some(s) => InfoStep::Fixed(s),
            None => InfoStep::Auto,
        };
        for scheme in [DiffScheme::OneSided, DiffScheme::Symmetric] {
            let est = discretized_information(logpl, center, n, rule, scheme).unwrap();
            prop_assert!((est - info).abs() <= 1e-9 * info.max(1.0), "{} vs {}", est, info);
        }
    }

    #[test]
    fn po_profile_dominates_hand_picked_jumps(
        theta in -1.5f64..1.5,
        j0 in 0.05f64..5.0,
        j1 in 0.05f64..5.0,
    ) {
        let p = PoProfile::new(dataset(&[
            (1.0, true, 0.3),
            (2.0, false, -0.2),
            (3.0, true, 0.8),
            (4.0, false, 0.5),
        ]))
        .unwrap();
        let (value, _) = p.profile_inner(theta).unwrap();
        let v = p.log_lik(theta, &[j0, j1]).unwrap();
        prop_assert!(v <= value + 1e-9, "{} > {}", v, value);
    }
}

#[test]
fn observation_rejects_non_finite_fields() {
    assert!(Observation::new(f64::INFINITY, true, 0.0).is_err());
    assert!(Observation::new(1.0, true, f64::NAN).is_err());
}
